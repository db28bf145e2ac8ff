//! Per-cell propagation gains, the composite reflected channel, the
//! equivalent array factor and path loss.
//!
//! Every term `h·r·g` of the double sum has a frequency-independent
//! magnitude and a phase that is affine in frequency, so the channel over all
//! subcarriers is computed with one phasor rotation per cell and subcarrier.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use crate::environment::{diffuse_amplitude, diffuse_phase, specular_term, Wall};
use crate::geometry::{angle_of, Angle2D, OfdmPlan, Position, SurfaceGrid, SPEED_OF_LIGHT};
use crate::metaprism::{cell_pattern, CellModel, Metaprism, PhaseProfile, Steering};
use crate::{Error, Result};

/// How the gain between an endpoint and a cell is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropagationMode {
    /// True per-cell distance in amplitude and phase.
    #[default]
    Exact,
    /// Center distance in amplitude, plane-wave phase across the surface.
    FarField,
}

/// Electrical path length from `endpoint` to a cell in the `z = 0` plane.
pub fn path_length(mode: PropagationMode, endpoint: Position, cell: Position) -> f64 {
    match mode {
        PropagationMode::Exact => endpoint.distance(&cell),
        PropagationMode::FarField => {
            let d = endpoint.norm();
            d - (cell.x * endpoint.x + cell.y * endpoint.y) / d
        }
    }
}

fn amplitude_distance(mode: PropagationMode, endpoint: Position, cell: Position) -> f64 {
    match mode {
        PropagationMode::Exact => endpoint.distance(&cell),
        PropagationMode::FarField => endpoint.norm(),
    }
}

fn hop_gain(endpoint: Position, cell: Position, f_k: f64, gain: f64, lambda: f64, mode: PropagationMode) -> Result<Complex64> {
    if endpoint.distance(&cell) == 0.0 || endpoint.norm() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let amplitude = gain.sqrt() * lambda / (4.0 * PI * amplitude_distance(mode, endpoint, cell));
    let phase = -2.0 * PI * f_k / SPEED_OF_LIGHT * path_length(mode, endpoint, cell);
    Ok(Complex64::from_polar(amplitude, phase))
}

/// Gain from the BS to a cell at `f_k`. `lambda` is the center wavelength.
pub fn incident_gain(p_bs: Position, cell: Position, f_k: f64, gt: f64, lambda: f64, mode: PropagationMode) -> Result<Complex64> {
    hop_gain(p_bs, cell, f_k, gt, lambda, mode)
}

/// Gain from a cell to the receiver at `f_k`.
pub fn reflected_gain(cell: Position, p: Position, f_k: f64, gr: f64, lambda: f64, mode: PropagationMode) -> Result<Complex64> {
    hop_gain(p, cell, f_k, gr, lambda, mode)
}

/// BS and receiver of one reflected link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub bs: Position,
    pub rx: Position,
    /// Linear transmit antenna gain.
    pub gt: f64,
    /// Linear receive antenna gain.
    pub gr: f64,
    pub bs_mode: PropagationMode,
    pub rx_mode: PropagationMode,
}

impl Link {
    /// Far-field BS, exact receiver.
    pub fn new(bs: Position, rx: Position, gt: f64, gr: f64) -> Self {
        Link { bs, rx, gt, gr, bs_mode: PropagationMode::FarField, rx_mode: PropagationMode::Exact }
    }

    pub fn with_modes(self, bs_mode: PropagationMode, rx_mode: PropagationMode) -> Self {
        Link { bs_mode, rx_mode, ..self }
    }

    /// Receiver and BS exchanged, with their gains and modes.
    pub fn reversed(&self) -> Self {
        Link { bs: self.rx, rx: self.bs, gt: self.gr, gr: self.gt, bs_mode: self.rx_mode, rx_mode: self.bs_mode }
    }

    pub fn incident_angle(&self) -> Result<Angle2D> {
        angle_of(self.bs)
    }

    pub fn observed_angle(&self) -> Result<Angle2D> {
        angle_of(self.rx)
    }

    /// Amplitude of `h·g` for `cell` at center wavelength `lambda`.
    fn amplitude(&self, cell: Position, lambda: f64) -> Result<f64> {
        let d1 = amplitude_distance(self.bs_mode, self.bs, cell);
        let d2 = amplitude_distance(self.rx_mode, self.rx, cell);
        if d1 == 0.0 || d2 == 0.0 || self.bs.distance(&cell) == 0.0 || self.rx.distance(&cell) == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        Ok((self.gt * self.gr).sqrt() * lambda * lambda / (16.0 * PI * PI * d1 * d2))
    }

    fn length(&self, cell: Position) -> f64 {
        path_length(self.bs_mode, self.bs, cell) + path_length(self.rx_mode, self.rx, cell)
    }
}

/// Reflection coefficient of one cell as a function of frequency:
/// `value·e^{j·slope·(f − f_ref)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellResponse {
    pub value: Complex64,
    pub slope: f64,
    pub f_ref: f64,
}

impl CellResponse {
    pub fn at(&self, f: f64) -> Complex64 {
        self.value * Complex64::cis(self.slope * (f - self.f_ref))
    }
}

/// A discretized reflecting surface.
pub trait Reflector {
    /// Per-link quantities shared by all cells.
    type Context;

    fn grid(&self) -> &SurfaceGrid;

    fn context(&self, link: &Link, plan: &OfdmPlan) -> Result<Self::Context>;

    fn response(&self, ctx: &Self::Context, n: usize, m: usize, cell: Position) -> CellResponse;

    /// Whether subcarrier `k` is reflected at all.
    fn is_active(&self, _ctx: &Self::Context, _plan: &OfdmPlan, _k: usize) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MetaprismContext {
    amplitude: f64,
    incident: Angle2D,
    steering: Option<Steering>,
}

impl Reflector for Metaprism {
    type Context = MetaprismContext;

    fn grid(&self) -> &SurfaceGrid {
        &self.grid
    }

    fn context(&self, link: &Link, _plan: &OfdmPlan) -> Result<MetaprismContext> {
        let incident = link.incident_angle()?;
        let observed = link.observed_angle()?;
        let amplitude = (self.cell.pattern(incident) * self.cell.pattern(observed)).sqrt()
            * self.cell.gc
            * self.cell.gamma_magnitude;
        Ok(MetaprismContext { amplitude, incident, steering: self.profile.steering().copied() })
    }

    fn response(&self, ctx: &MetaprismContext, _n: usize, _m: usize, cell: Position) -> CellResponse {
        match self.profile {
            PhaseProfile::Specular { phase } => {
                CellResponse { value: Complex64::from_polar(ctx.amplitude, phase), slope: 0.0, f_ref: 0.0 }
            }
            _ => CellResponse {
                value: Complex64::new(ctx.amplitude, 0.0),
                slope: self.profile.slope(cell),
                f_ref: self.profile.reference_frequency(),
            },
        }
    }

    fn is_active(&self, ctx: &MetaprismContext, plan: &OfdmPlan, k: usize) -> bool {
        match &ctx.steering {
            Some(s) => s.direction(ctx.incident, plan, k).map(|d| d.is_propagating()).unwrap_or(false),
            None => true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WallContext {
    specular: Complex64,
    diffuse: f64,
    incident: Angle2D,
    observed: Angle2D,
}

impl Reflector for Wall {
    type Context = WallContext;

    fn grid(&self) -> &SurfaceGrid {
        &self.grid
    }

    fn context(&self, link: &Link, _plan: &OfdmPlan) -> Result<WallContext> {
        let incident = link.incident_angle()?;
        let observed = link.observed_angle()?;
        let gs = self.scattering_gain();
        Ok(WallContext {
            specular: specular_term(incident, &self.material, gs),
            diffuse: diffuse_amplitude(incident, observed, &self.material, gs),
            incident,
            observed,
        })
    }

    fn response(&self, ctx: &WallContext, _n: usize, _m: usize, cell: Position) -> CellResponse {
        let psi = diffuse_phase(cell.x, cell.y, ctx.incident, ctx.observed, self.lambda) + self.diffuse_offset;
        CellResponse { value: ctx.specular + Complex64::from_polar(ctx.diffuse, psi), slope: 0.0, f_ref: 0.0 }
    }
}

/// End-to-end reflected channel `c^(k)(p_bs, p)` on one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCoefficient {
    pub value: Complex64,
    pub k: usize,
    pub bs: Position,
    pub rx: Position,
}

impl ChannelCoefficient {
    pub fn path_loss(&self) -> f64 {
        path_loss(self)
    }
}

/// `h·r·g` of one cell at `f`.
pub fn cell_term<R: Reflector>(
    surface: &R,
    ctx: &R::Context,
    link: &Link,
    plan: &OfdmPlan,
    n: usize,
    m: usize,
    f: f64,
) -> Result<Complex64> {
    let cell = surface.grid().cell(n, m);
    let r = surface.response(ctx, n, m, cell);
    let amplitude = link.amplitude(cell, plan.wavelength())?;
    let phase = r.slope * (f - r.f_ref) - 2.0 * PI * f / SPEED_OF_LIGHT * link.length(cell);
    Ok(r.value * Complex64::from_polar(amplitude, phase))
}

/// Sum over all cells at subcarrier `k`, in row-major order.
pub fn composite_channel<R: Reflector>(surface: &R, link: &Link, plan: &OfdmPlan, k: usize) -> Result<ChannelCoefficient> {
    let f = plan.frequency(k)?;
    let ctx = surface.context(link, plan)?;
    let mut value = Complex64::new(0.0, 0.0);
    if surface.is_active(&ctx, plan, k) {
        for (n, m, _) in surface.grid().cells() {
            value += cell_term(surface, &ctx, link, plan, n, m, f)?;
        }
    }
    Ok(ChannelCoefficient { value, k, bs: link.bs, rx: link.rx })
}

/// Channel on every subcarrier; element `k − 1` holds `c^(k)`.
pub fn composite_channel_all<R: Reflector>(surface: &R, link: &Link, plan: &OfdmPlan) -> Result<Vec<Complex64>> {
    let ctx = surface.context(link, plan)?;
    let lambda = plan.wavelength();
    let f1 = plan.first_frequency();
    let df = plan.spacing();
    let mut acc = vec![Complex64::new(0.0, 0.0); plan.subcarriers()];
    let idle = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let mut block = [idle; 4];
    let mut filled = 0;
    for (n, m, cell) in surface.grid().cells() {
        let r = surface.response(&ctx, n, m, cell);
        let amplitude = link.amplitude(cell, lambda)?;
        let slope = r.slope - 2.0 * PI / SPEED_OF_LIGHT * link.length(cell);
        let phase = r.slope * (f1 - r.f_ref) - 2.0 * PI * f1 / SPEED_OF_LIGHT * link.length(cell);
        block[filled] = (r.value * Complex64::from_polar(amplitude, phase), Complex64::cis(slope * df));
        filled += 1;
        if filled == 4 {
            rotate_into(&mut acc, &block);
            filled = 0;
        }
    }
    if filled > 0 {
        block[filled..].fill(idle);
        rotate_into(&mut acc, &block);
    }
    for (i, a) in acc.iter_mut().enumerate() {
        if !surface.is_active(&ctx, plan, i + 1) {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    Ok(acc)
}

fn rotate_into(acc: &mut [Complex64], block: &[(Complex64, Complex64); 4]) {
    let [(mut z0, w0), (mut z1, w1), (mut z2, w2), (mut z3, w3)] = *block;
    for a in acc.iter_mut() {
        *a += (z0 + z1) + (z2 + z3);
        z0 *= w0;
        z1 *= w1;
        z2 *= w2;
        z3 *= w3;
    }
}

/// Equivalent array factor of the surface steered toward `theta_0`.
pub fn array_factor(grid: &SurfaceGrid, theta_0: Angle2D, theta: Angle2D, lambda: f64) -> Complex64 {
    let (ux0, uy0) = theta_0.direction_cosines();
    let (ux, uy) = theta.direction_cosines();
    let line = |count: usize, pitch: f64, du: f64| {
        let step = 2.0 * PI * pitch / lambda * du;
        (0..count).map(|i| Complex64::cis(step * i as f64)).fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    };
    line(grid.n_x(), grid.dx(), ux - ux0) * line(grid.n_y(), grid.dy(), uy - uy0)
}

/// Path loss in dB; infinite when the channel vanishes.
pub fn path_loss(c: &ChannelCoefficient) -> f64 {
    let power = c.value.norm_sqr();
    if power == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * power.log10()
    }
}

/// Path loss in dB of a surface with all phasors aligned, using center
/// distances and center angles.
pub fn path_loss_ideal(link: &Link, lambda: f64, model: &CellModel, cells: usize) -> Result<f64> {
    let fi = model.pattern(link.incident_angle()?);
    let fo = model.pattern(link.observed_angle()?);
    let nm = cells as f64;
    let num = (4.0 * PI).powi(4) * link.bs.norm().powi(2) * link.rx.norm().powi(2);
    let den = lambda.powi(4) * link.gt * link.gr * model.gc * model.gc * fi * fo * nm * nm;
    Ok(10.0 * (num / den).log10())
}

/// Radar cross section `4πA²F(Θi)F(Θ)/λ²` of a surface of area `area`.
pub fn equivalent_rcs(area: f64, lambda: f64, incident: Angle2D, observed: Angle2D, q: f64) -> f64 {
    4.0 * PI * area * area * cell_pattern(incident, q) * cell_pattern(observed, q) / (lambda * lambda)
}

/// Bistatic radar-equation loss in dB.
pub fn radar_equation_loss(d1: f64, d2: f64, lambda: f64, gt: f64, gr: f64, rcs: f64) -> f64 {
    10.0 * ((4.0 * PI).powi(3) * d1 * d1 * d2 * d2 / (lambda * lambda * gt * gr * rcs)).log10()
}

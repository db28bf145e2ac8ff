//! Metaprism cell response and phase-profile synthesis.
//!
//! Every profile realized here is affine in frequency,
//! `Ψ_nm(f) = α_nm·(f − f_r) + const`, which is what a passive, fixed load can
//! provide. The steering direction and focal distance therefore move with the
//! subcarrier.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use crate::channel::{path_length, PropagationMode};
use crate::geometry::{fresnel_distance, Angle2D, OfdmPlan, Position, SurfaceGrid, SPEED_OF_LIGHT};
use crate::{Error, Result};

/// Steered directions with `|θ|` at or above this are flagged near-grazing.
pub const NEAR_GRAZING: f64 = 80.0 * PI / 180.0;

/// Default antenna resistance seen by each cell load, ohms.
pub const DEFAULT_R0: f64 = 50.0;

/// Normalized power pattern `cos^q(θ)` of a cell, zero outside the front
/// half-space.
pub fn cell_pattern(angle: Angle2D, q: f64) -> f64 {
    let theta = angle.theta.abs();
    if theta >= PI / 2.0 {
        return 0.0;
    }
    theta.cos().max(0.0).powf(q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoresightGain {
    /// `4π·dx·dy/λ²`.
    pub gain: f64,
    /// Pattern exponent `Gc/2 − 1`, clamped at 0.
    pub q: f64,
    /// Set when the raw exponent was negative.
    pub clamped: bool,
}

/// Boresight gain of a cell whose effective area equals its physical area.
pub fn boresight_gain(dx: f64, dy: f64, lambda: f64) -> Result<BoresightGain> {
    if !(dx > 0.0 && dy > 0.0) {
        return Err(Error::Domain("cell spacing must be positive"));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain("wavelength must be positive"));
    }
    let gain = 4.0 * PI * dx * dy / (lambda * lambda);
    let raw_q = gain / 2.0 - 1.0;
    let clamped = raw_q < 0.0;
    if clamped {
        log::warn!("cell gain {gain:.3} below 2 gives negative pattern exponent {raw_q:.3}; clamping to 0");
    }
    Ok(BoresightGain { gain, q: raw_q.max(0.0), clamped })
}

/// Radiating-element model of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellModel {
    pub q: f64,
    /// Boresight gain `2(q + 1)`, linear.
    pub gc: f64,
    pub r0: f64,
    /// Load reflection magnitude `|Γ|`, at most 1.
    pub gamma_magnitude: f64,
}

impl CellModel {
    pub fn new(q: f64, r0: f64, gamma_magnitude: f64) -> Result<Self> {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::Domain("pattern exponent must be non-negative"));
        }
        if !(r0 > 0.0) {
            return Err(Error::Domain("antenna resistance must be positive"));
        }
        if !(0.0..=1.0).contains(&gamma_magnitude) {
            return Err(Error::Domain("|Gamma| must lie in [0, 1] for a passive cell"));
        }
        Ok(CellModel { q, gc: 2.0 * (q + 1.0), r0, gamma_magnitude })
    }

    /// Lossless cell sized to the grid pitch.
    pub fn for_grid(grid: &SurfaceGrid, lambda: f64) -> Result<Self> {
        let g = boresight_gain(grid.dx(), grid.dy(), lambda)?;
        CellModel::new(g.q, DEFAULT_R0, 1.0)
    }

    pub fn pattern(&self, angle: Angle2D) -> f64 {
        cell_pattern(angle, self.q)
    }

    /// `√(F(Θi)F(Θ))·Gc·|Γ|·e^{jΨ}`.
    pub fn reflection(&self, phase: f64, incident: Angle2D, observed: Angle2D) -> Complex64 {
        reflection_coefficient(self, phase, incident, observed)
    }
}

pub fn reflection_coefficient(
    model: &CellModel,
    phase: f64,
    incident: Angle2D,
    observed: Angle2D,
) -> Complex64 {
    let amplitude =
        (model.pattern(incident) * model.pattern(observed)).sqrt() * model.gc * model.gamma_magnitude;
    Complex64::from_polar(amplitude, phase)
}

/// Linear steering coefficients: `Ψ = (a0·x + b0·y)(f − f_ref)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steering {
    /// rad per Hz per meter of `x`.
    pub a0: f64,
    /// rad per Hz per meter of `y`.
    pub b0: f64,
    /// Frequency at which the profile is flat.
    pub f_ref: f64,
}

/// Direction a linear profile sends subcarrier `k` toward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SteeredDirection {
    Propagating(Angle2D),
    /// `u_x² + u_y² > 1`: no propagating reflection at this subcarrier.
    Evanescent,
}

impl SteeredDirection {
    pub fn angle(&self) -> Option<Angle2D> {
        match self {
            SteeredDirection::Propagating(a) => Some(*a),
            SteeredDirection::Evanescent => None,
        }
    }

    pub fn is_propagating(&self) -> bool {
        matches!(self, SteeredDirection::Propagating(_))
    }

    /// Propagating with `|θ| ≥ NEAR_GRAZING`.
    pub fn is_near_grazing(&self) -> bool {
        self.angle().is_some_and(|a| a.theta.abs() >= NEAR_GRAZING)
    }
}

/// Coefficients that send the wave arriving from `incident` toward `target`
/// at a frequency `span` Hz away from the reference frequency.
pub fn steering_coefficients(
    incident: Angle2D,
    target: Angle2D,
    lambda: f64,
    span: f64,
) -> Result<(f64, f64)> {
    if !(lambda > 0.0) || span == 0.0 || !span.is_finite() {
        return Err(Error::Domain("steering needs a positive wavelength and non-zero span"));
    }
    let (uxi, uyi) = incident.direction_cosines();
    let (uxt, uyt) = target.direction_cosines();
    let scale = -2.0 * PI / (lambda * span);
    Ok((scale * (uxi + uxt), scale * (uyi + uyt)))
}

/// Beamsteering design centered on `f0`: the center subcarrier reflects
/// specularly and the top subcarrier leaves at `−θi − θm` in the plane of
/// incidence.
pub fn beamsteer_coefficients(
    incident: Angle2D,
    theta_m: f64,
    lambda: f64,
    bandwidth: f64,
) -> Result<(f64, f64)> {
    let target = in_plane_target(incident, theta_m)?;
    steering_coefficients(incident, target, lambda, bandwidth / 2.0)
}

fn in_plane_target(incident: Angle2D, theta_m: f64) -> Result<Angle2D> {
    let theta = -(incident.theta + theta_m);
    if theta.abs() > PI / 2.0 + 1e-12 {
        return Err(Error::Domain("theta_i + theta_m outside [-pi/2, pi/2]"));
    }
    Ok(Angle2D { theta: theta.clamp(-PI / 2.0, PI / 2.0), phi: incident.phi })
}

impl Steering {
    pub fn beamsteer(incident: Angle2D, theta_m: f64, plan: &OfdmPlan) -> Result<Self> {
        let (a0, b0) = beamsteer_coefficients(incident, theta_m, plan.wavelength(), plan.bandwidth())?;
        Ok(Steering { a0, b0, f_ref: plan.center_frequency() })
    }

    /// Profile flat at `f0` that sends subcarrier `k` toward `target`.
    pub fn toward(incident: Angle2D, target: Angle2D, plan: &OfdmPlan, k: usize) -> Result<Self> {
        let span = plan.frequency(k)? - plan.center_frequency();
        let (a0, b0) = steering_coefficients(incident, target, plan.wavelength(), span)?;
        Ok(Steering { a0, b0, f_ref: plan.center_frequency() })
    }

    /// Frequency-linear phase of the cell at `(x, y)`.
    pub fn phase(&self, x: f64, y: f64, f: f64) -> f64 {
        beamsteer_phase(x, y, f, self)
    }

    pub fn slope(&self, x: f64, y: f64) -> f64 {
        self.a0 * x + self.b0 * y
    }

    pub fn direction(&self, incident: Angle2D, plan: &OfdmPlan, k: usize) -> Result<SteeredDirection> {
        steered_direction(self, incident, plan, k)
    }
}

/// Reflection direction of subcarrier `k` for a linear profile.
pub fn steered_direction(
    steering: &Steering,
    incident: Angle2D,
    plan: &OfdmPlan,
    k: usize,
) -> Result<SteeredDirection> {
    let df = plan.frequency(k)? - steering.f_ref;
    let (uxi, uyi) = incident.direction_cosines();
    let scale = plan.wavelength() * df / (2.0 * PI);
    let ux = -uxi - steering.a0 * scale;
    let uy = -uyi - steering.b0 * scale;
    Ok(match Angle2D::from_direction_cosines(ux, uy) {
        Some(a) => SteeredDirection::Propagating(a),
        None => SteeredDirection::Evanescent,
    })
}

/// `(a0·x + b0·y)(f − f_ref)`.
pub fn beamsteer_phase(x: f64, y: f64, f: f64, steering: &Steering) -> f64 {
    steering.slope(x, y) * (f - steering.f_ref)
}

/// Phase that makes all cell phasors add up toward `target` for a plane wave
/// arriving from `incident`.
pub fn pointing_phase(x: f64, y: f64, incident: Angle2D, target: Angle2D, lambda: f64) -> f64 {
    let (uxi, uyi) = incident.direction_cosines();
    let (uxt, uyt) = target.direction_cosines();
    -2.0 * PI / lambda * (x * (uxi + uxt) + y * (uyi + uyt))
}

/// Focal distance of a focusing profile at one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FocalDistance {
    Finite(f64),
    /// The lowest subcarrier: the profile degenerates to beamsteering.
    Infinite,
}

impl FocalDistance {
    pub fn meters(&self) -> Option<f64> {
        match self {
            FocalDistance::Finite(d) => Some(*d),
            FocalDistance::Infinite => None,
        }
    }
}

/// How the quadratic coefficient of a focusing profile is derived from the
/// minimum focal distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FocusConstant {
    /// Top subcarrier focuses exactly at `d_m`.
    #[default]
    SelfConsistent,
    /// `2π f1 / (c·d_m·W)`: top subcarrier focuses at about `d_m/2`.
    Literal,
}

/// Quadratic coefficient `a_F` such that the top subcarrier focuses at `d_m`.
pub fn focus_coefficient(d_m: f64, plan: &OfdmPlan) -> Result<f64> {
    if !(d_m > 0.0 && d_m.is_finite()) {
        return Err(Error::Domain("minimum focal distance must be positive"));
    }
    let span = plan.offset_from_first(plan.subcarriers())?;
    if span == 0.0 {
        return Err(Error::Domain("focusing needs at least two subcarriers"));
    }
    Ok(PI * plan.first_frequency() / (SPEED_OF_LIGHT * d_m * span))
}

/// The closed-form constant `2π f1 / (c·d_m·W)`.
pub fn focus_coefficient_literal(d_m: f64, plan: &OfdmPlan) -> Result<f64> {
    if !(d_m > 0.0 && d_m.is_finite()) {
        return Err(Error::Domain("minimum focal distance must be positive"));
    }
    Ok(2.0 * PI * plan.first_frequency() / (SPEED_OF_LIGHT * d_m * plan.bandwidth()))
}

/// `d_F^(k) = π f1 / (c·a_F·(f_k − f1))`.
pub fn focal_distance(a_f: f64, plan: &OfdmPlan, k: usize) -> Result<FocalDistance> {
    let df = plan.offset_from_first(k)?;
    if df == 0.0 || a_f == 0.0 {
        return Ok(FocalDistance::Infinite);
    }
    Ok(FocalDistance::Finite(PI * plan.first_frequency() / (SPEED_OF_LIGHT * a_f * df)))
}

/// Fresnel-approximation focusing phase: quadratic term for the focal
/// distance plus the pointing term toward `target`.
pub fn focus_phase(
    x: f64,
    y: f64,
    incident: Angle2D,
    target: Angle2D,
    focal: FocalDistance,
    lambda: f64,
) -> f64 {
    let quadratic = match focal {
        FocalDistance::Finite(d) => 2.0 * PI / lambda * (x * x + y * y) / (2.0 * d),
        FocalDistance::Infinite => 0.0,
    };
    quadratic + pointing_phase(x, y, incident, target, lambda)
}

/// Frequency-linear focusing profile:
/// `Ψ = [a_F(x² + y²) + a0·x + b0·y](f − f1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Focusing {
    pub a_f: f64,
    /// Linear part, referenced to the first subcarrier.
    pub steering: Steering,
}

impl Focusing {
    /// Focus at `d_m` on the top subcarrier, toward `−θi − θm` in the plane
    /// of incidence. The lowest subcarrier reflects specularly.
    pub fn design(
        incident: Angle2D,
        theta_m: f64,
        d_m: f64,
        plan: &OfdmPlan,
        constant: FocusConstant,
    ) -> Result<Self> {
        let target = in_plane_target(incident, theta_m)?;
        let mut focusing = Focusing::toward(incident, target, d_m, plan, plan.subcarriers())?;
        if constant == FocusConstant::Literal {
            focusing.a_f = focus_coefficient_literal(d_m, plan)?;
        }
        Ok(focusing)
    }

    /// Profile flat at `f1` that focuses subcarrier `k` at `distance` along
    /// `target`.
    pub fn toward(incident: Angle2D, target: Angle2D, distance: f64, plan: &OfdmPlan, k: usize) -> Result<Self> {
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::Domain("focal distance must be positive"));
        }
        let span = plan.offset_from_first(k)?;
        if span == 0.0 {
            return Err(Error::Domain("the first subcarrier cannot be focused"));
        }
        let a_f = PI * plan.first_frequency() / (SPEED_OF_LIGHT * distance * span);
        let (a0, b0) = steering_coefficients(incident, target, plan.wavelength(), span)?;
        Ok(Focusing { a_f, steering: Steering { a0, b0, f_ref: plan.first_frequency() } })
    }

    /// Warns when `d_m` is inside the reactive near field of `grid`.
    pub fn check_range(d_m: f64, grid: &SurfaceGrid, lambda: f64) -> bool {
        let fresnel = fresnel_distance(grid.diameter(), lambda).unwrap_or(0.0);
        let ok = d_m > fresnel;
        if !ok {
            log::warn!("focal distance {d_m} m is inside the reactive near field ({fresnel:.3} m)");
        }
        ok
    }

    pub fn slope(&self, x: f64, y: f64) -> f64 {
        self.a_f * (x * x + y * y) + self.steering.slope(x, y)
    }

    pub fn phase(&self, x: f64, y: f64, f: f64) -> f64 {
        self.slope(x, y) * (f - self.steering.f_ref)
    }

    pub fn focal_distance(&self, plan: &OfdmPlan, k: usize) -> Result<FocalDistance> {
        focal_distance(self.a_f, plan, k)
    }
}

/// Phase that exactly cancels both propagation phases at `f_k`.
pub fn ideal_phase(cell: Position, bs: Position, target: Position, f_k: f64) -> Result<f64> {
    let d1 = bs.distance(&cell);
    let d2 = target.distance(&cell);
    if d1 == 0.0 || d2 == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(2.0 * PI * f_k / SPEED_OF_LIGHT * (d1 + d2))
}

/// Reflection phase rule of a metaprism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseProfile {
    /// Same phase on every cell at every frequency.
    Specular { phase: f64 },
    Beamsteer(Steering),
    Focus(Focusing),
    /// Conjugate of the propagation phase toward a single target, with path
    /// lengths evaluated under the given modes.
    Ideal { bs: Position, target: Position, bs_mode: PropagationMode, target_mode: PropagationMode },
}

impl PhaseProfile {
    /// Plain mirror with the π phase of a perfect conductor.
    pub const MIRROR: PhaseProfile = PhaseProfile::Specular { phase: PI };

    /// Ideal profile with exact distances on both sides.
    pub fn ideal(bs: Position, target: Position) -> Self {
        PhaseProfile::Ideal { bs, target, bs_mode: PropagationMode::Exact, target_mode: PropagationMode::Exact }
    }

    /// `dΨ/df` of the cell at `(x, y)`, rad/Hz.
    pub fn slope(&self, cell: Position) -> f64 {
        match self {
            PhaseProfile::Specular { .. } => 0.0,
            PhaseProfile::Beamsteer(s) => s.slope(cell.x, cell.y),
            PhaseProfile::Focus(fc) => fc.slope(cell.x, cell.y),
            PhaseProfile::Ideal { bs, target, bs_mode, target_mode } => {
                2.0 * PI / SPEED_OF_LIGHT
                    * (path_length(*bs_mode, *bs, cell) + path_length(*target_mode, *target, cell))
            }
        }
    }

    /// Frequency at which `Ψ` takes its constant part.
    pub fn reference_frequency(&self) -> f64 {
        match self {
            PhaseProfile::Specular { .. } | PhaseProfile::Ideal { .. } => 0.0,
            PhaseProfile::Beamsteer(s) => s.f_ref,
            PhaseProfile::Focus(fc) => fc.steering.f_ref,
        }
    }

    /// `Ψ_nm(f)` for the cell at `cell`.
    pub fn phase(&self, cell: Position, f: f64) -> f64 {
        match self {
            PhaseProfile::Specular { phase } => *phase,
            PhaseProfile::Ideal { .. } => self.slope(cell) * f,
            _ => self.slope(cell) * (f - self.reference_frequency()),
        }
    }

    /// Steering part of a frequency-dependent profile.
    pub fn steering(&self) -> Option<&Steering> {
        match self {
            PhaseProfile::Beamsteer(s) => Some(s),
            PhaseProfile::Focus(fc) => Some(&fc.steering),
            _ => None,
        }
    }
}

/// A metaprism: cell grid, cell model and phase profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Metaprism {
    pub grid: SurfaceGrid,
    pub cell: CellModel,
    pub profile: PhaseProfile,
}

impl Metaprism {
    pub fn new(grid: SurfaceGrid, cell: CellModel, profile: PhaseProfile) -> Self {
        Metaprism { grid, cell, profile }
    }

    /// Lossless cells sized to the grid pitch at the plan's wavelength.
    pub fn lossless(grid: SurfaceGrid, plan: &OfdmPlan, profile: PhaseProfile) -> Result<Self> {
        let cell = CellModel::for_grid(&grid, plan.wavelength())?;
        Ok(Metaprism { grid, cell, profile })
    }

    /// Reflection of cell `(n, m)` at frequency `f`.
    pub fn cell_reflection(&self, n: usize, m: usize, f: f64, incident: Angle2D, observed: Angle2D) -> Complex64 {
        let phase = self.profile.phase(self.grid.cell(n, m), f);
        self.cell.reflection(phase, incident, observed)
    }
}

/// Series LC load of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcLoad {
    /// Henries.
    pub inductance: f64,
    /// Farads.
    pub capacitance: f64,
}

impl LcLoad {
    pub fn resonance(&self) -> f64 {
        1.0 / (2.0 * PI * (self.inductance * self.capacitance).sqrt())
    }

    /// `X(f) = −(1 − (2πf)²LC)/(2πfC)`.
    pub fn reactance(&self, f: f64) -> f64 {
        let w = 2.0 * PI * f;
        -(1.0 - w * w * self.inductance * self.capacitance) / (w * self.capacitance)
    }
}

/// Load whose reflection phase has slope `alpha` (rad/Hz) at `f_r`.
pub fn lc_load_synthesis(alpha: f64, r0: f64, f_r: f64) -> Result<LcLoad> {
    if !(alpha < 0.0) || !alpha.is_finite() {
        return Err(Error::UnrealizableLoad { alpha });
    }
    if !(r0 > 0.0 && f_r > 0.0) {
        return Err(Error::Domain("resistance and resonance must be positive"));
    }
    let inductance = -alpha * r0 / (8.0 * PI);
    let w = 2.0 * PI * f_r;
    Ok(LcLoad { inductance, capacitance: 1.0 / (w * w * inductance) })
}

/// Exact reflection phase `−2·atan(X(f)/R0)` of a reactive load.
pub fn lc_phase_exact(load: &LcLoad, r0: f64, f: f64) -> f64 {
    -2.0 * (load.reactance(f) / r0).atan()
}

/// One row of an LC load table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellLoad {
    pub n: usize,
    pub m: usize,
    pub load: LcLoad,
}

/// LC loads realizing `profile` on `grid`.
///
/// A common slope is subtracted from every cell so that all slopes are
/// negative; a phase common to all cells does not change the reflected
/// pattern. Returns the loads and the subtracted slope.
pub fn lc_loads(profile: &PhaseProfile, grid: &SurfaceGrid, r0: f64, f_r: f64) -> Result<(Vec<CellLoad>, f64)> {
    let slopes: Vec<(usize, usize, f64)> =
        grid.cells().map(|(n, m, p)| (n, m, profile.slope(p))).collect();
    let max = slopes.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
    let min = slopes.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let span = max - min;
    let margin = if span > 0.0 { 0.01 * span } else { 1e-12 };
    let offset = max + margin;
    let loads = slopes
        .into_iter()
        .map(|(n, m, a)| lc_load_synthesis(a - offset, r0, f_r).map(|load| CellLoad { n, m, load }))
        .collect::<Result<Vec<_>>>()?;
    Ok((loads, offset))
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // literal example values
mod tests {
    use super::*;

    fn plan() -> OfdmPlan {
        OfdmPlan::new(28e9, 100e6, 256).unwrap()
    }

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    #[test]
    fn pattern_examples() {
        assert_eq!(cell_pattern(Angle2D::BORESIGHT, 0.57), 1.0);
        assert_eq!(cell_pattern(Angle2D::in_plane(deg(90.0)), 0.57), 0.0);
        assert_eq!(cell_pattern(Angle2D::in_plane(deg(-90.0)), 3.0), 0.0);
        let v = cell_pattern(Angle2D::in_plane(deg(60.0)), 0.57);
        assert!((v - 0.5f64.powf(0.57)).abs() < 1e-12);
        assert!((v - 0.6736).abs() < 1e-4);
        // signed convention: pattern is even in theta
        assert_eq!(v, cell_pattern(Angle2D::in_plane(deg(-60.0)), 0.57));
    }

    #[test]
    fn boresight_gain_examples() {
        let lambda = 0.01;
        let g = boresight_gain(lambda / 2.0, lambda / 2.0, lambda).unwrap();
        assert!((g.gain - PI).abs() < 1e-12);
        assert!((10.0 * g.gain.log10() - 4.97).abs() < 0.01);
        assert!((g.q - 0.5708).abs() < 1e-4 && !g.clamped);

        let side = lambda / (4.0 * PI).sqrt();
        let g = boresight_gain(side, side, lambda).unwrap();
        assert!((g.gain - 1.0).abs() < 1e-12);
        assert!(g.clamped && g.q == 0.0);

        let g = boresight_gain(lambda, lambda, lambda).unwrap();
        assert!((g.gain - 4.0 * PI).abs() < 1e-12);
        assert!((g.q - 5.283).abs() < 1e-3);
        assert!(boresight_gain(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn cell_model_invariants() {
        let m = CellModel::new(0.57, 50.0, 1.0).unwrap();
        assert!((m.gc - 3.14).abs() < 1e-12);
        assert!(CellModel::new(-0.1, 50.0, 1.0).is_err());
        assert!(CellModel::new(1.0, 50.0, 1.5).is_err());
    }

    #[test]
    fn reflection_examples() {
        let m = CellModel::new(PI / 2.0 - 1.0, 50.0, 1.0).unwrap();
        let r = reflection_coefficient(&m, 0.0, Angle2D::BORESIGHT, Angle2D::BORESIGHT);
        assert!((r.re - PI).abs() < 1e-12 && r.im.abs() < 1e-12);
        let r = reflection_coefficient(&m, 0.3, Angle2D::BORESIGHT, Angle2D::in_plane(deg(90.0)));
        assert_eq!(r.norm(), 0.0);

        let m = CellModel::new(0.57, 50.0, 1.0).unwrap();
        let m = CellModel { gc: PI, ..m };
        let r = reflection_coefficient(&m, PI, Angle2D::in_plane(deg(45.0)), Angle2D::in_plane(deg(-45.0)));
        let expected = -PI * deg(45.0).cos().powf(0.57);
        assert!((r.re - expected).abs() < 1e-12 && r.im.abs() < 1e-12);
    }

    #[test]
    fn beamsteer_coefficient_examples() {
        let inc = Angle2D::in_plane(deg(45.0));
        let (a0, b0) = beamsteer_coefficients(inc, deg(40.0), 1.0, 1e6).unwrap();
        assert!((a0 - 3.633e-6).abs() < 1e-9, "{a0}");
        assert_eq!(b0, 0.0);

        let (a0, _) = beamsteer_coefficients(Angle2D::BORESIGHT, deg(90.0), 0.01, 1e8).unwrap();
        assert!((a0.abs() - 4.0 * PI / (0.01 * 1e8)).abs() < 1e-18);

        let (a0, b0) = beamsteer_coefficients(Angle2D::in_plane(deg(-20.0)), 0.0, 0.01, 1e8).unwrap();
        assert!(a0.abs() < 1e-20 && b0 == 0.0);
        assert!(beamsteer_coefficients(inc, deg(60.0), 0.01, 1e8).is_err());
    }

    #[test]
    fn off_plane_incidence_steers_in_its_own_plane() {
        let plan = plan();
        let inc = Angle2D::from_degrees(30.0, 60.0).unwrap();
        let s = Steering::beamsteer(inc, deg(20.0), &plan).unwrap();
        assert!(s.b0 != 0.0);
        let top = s.direction(inc, &plan, 256).unwrap().angle().unwrap();
        assert!((top.theta_deg() + 50.0).abs() < 1e-9);
        assert!((top.phi_deg() - 60.0).abs() < 1e-9);
    }

    fn fig4a_plan() -> OfdmPlan {
        // λ·W = 1e6 m·Hz at 28 GHz
        let lambda = SPEED_OF_LIGHT / 28e9;
        OfdmPlan::new(28e9, 1e6 / lambda, 256).unwrap()
    }

    #[test]
    fn steered_direction_examples() {
        let plan = fig4a_plan();
        let inc = Angle2D::in_plane(deg(45.0));
        let s = Steering::beamsteer(inc, deg(40.0), &plan).unwrap();
        let at = |k| s.direction(inc, &plan, k).unwrap().angle().unwrap().theta_deg();
        assert!((at(128) + 45.0).abs() < 1e-9);
        assert!((at(256) + 85.0).abs() < 1e-9);
        // sin θ0 = −sin θi + 2(f1 − f0)/W·(sin(−θi−θm) + sin θi)
        let frac = 2.0 * plan.offset_from_center(1).unwrap() / plan.bandwidth();
        let oracle = (-deg(45.0).sin() + frac * (-deg(85.0).sin() + deg(45.0).sin())).asin().to_degrees();
        assert!((at(1) - oracle).abs() < 1e-9);
        // band-edge value (f1 → f0 − W/2)
        assert!((at(1) + 24.71).abs() < 0.2);
        assert!(s.direction(inc, &plan, 0).is_err());
    }

    #[test]
    fn steering_turns_evanescent_past_grazing() {
        let plan = plan();
        let inc = Angle2D::in_plane(deg(45.0));
        let s = Steering { a0: 1e-5, b0: 0.0, f_ref: plan.center_frequency() };
        assert_eq!(s.direction(inc, &plan, 256).unwrap(), SteeredDirection::Evanescent);
        assert!(!SteeredDirection::Evanescent.is_near_grazing());
    }

    #[test]
    fn beamsteer_phase_examples() {
        let s = Steering { a0: 3.633e-6, b0: 0.0, f_ref: 28e9 };
        assert_eq!(beamsteer_phase(0.3, -0.2, 28e9, &s), 0.0);
        assert!((beamsteer_phase(0.1, 0.0, 28e9 + 5e7, &s) - 3.633e-6 * 0.1 * 5e7).abs() < 1e-12);
        assert_eq!(beamsteer_phase(0.0, 0.0, 28.03e9, &s), 0.0);
    }

    #[test]
    fn focus_coefficient_examples() {
        let plan = plan();
        let a_f = focus_coefficient(2.0, &plan).unwrap();
        assert!((a_f - 1.4702e-6).abs() < 1e-10, "{a_f}");
        let literal = focus_coefficient_literal(2.0, &plan).unwrap();
        assert!((literal / a_f - 2.0 * 255.0 / 256.0).abs() < 1e-12);
        let top = focal_distance(a_f, &plan, 256).unwrap().meters().unwrap();
        assert!((top - 2.0).abs() < 1e-9 * 2.0);
        // f_k − f1 = (f_K − f1)/2 ⇔ k − 1 = 127.5; use the two neighbours
        let d128 = focal_distance(a_f, &plan, 128).unwrap().meters().unwrap();
        let d129 = focal_distance(a_f, &plan, 129).unwrap().meters().unwrap();
        assert!(d128 > 4.0 && d129 < 4.0);
        assert!((2.0 * 255.0 / 127.0 - d128).abs() < 1e-9);
        assert_eq!(focal_distance(a_f, &plan, 1).unwrap(), FocalDistance::Infinite);
        assert!(focus_coefficient(0.0, &plan).is_err());
    }

    #[test]
    fn focal_distance_decreases() {
        let plan = plan();
        let a_f = focus_coefficient(2.0, &plan).unwrap();
        let mut prev = f64::INFINITY;
        for k in 2..=256 {
            let d = focal_distance(a_f, &plan, k).unwrap().meters().unwrap();
            assert!(d < prev);
            prev = d;
        }
        let mid = focal_distance(a_f, &plan, 129).unwrap().meters().unwrap();
        assert!((mid - 2.0 * 255.0 / 128.0).abs() < 1e-9);
    }

    #[test]
    fn focus_phase_examples() {
        let lambda = 0.010707;
        let inc = Angle2D::in_plane(deg(45.0));
        let out = Angle2D::in_plane(deg(-45.0));
        assert_eq!(focus_phase(0.0, 0.0, inc, out, FocalDistance::Finite(3.0), lambda), 0.0);
        let v = focus_phase(0.25, 0.0, Angle2D::BORESIGHT, Angle2D::BORESIGHT, FocalDistance::Finite(2.0), lambda);
        let oracle = 2.0 * PI / lambda * 0.0625 / 4.0;
        assert!((v - oracle).abs() < 1e-12);
        assert!((v - 9.17).abs() < 0.01);
        let a = Angle2D::in_plane(deg(-30.0));
        let inf = focus_phase(0.1, 0.05, inc, a, FocalDistance::Infinite, lambda);
        assert_eq!(inf, pointing_phase(0.1, 0.05, inc, a, lambda));
    }

    #[test]
    fn focus_design_steers_top_subcarrier() {
        let plan = plan();
        let inc = Angle2D::in_plane(deg(45.0));
        let fc = Focusing::design(inc, deg(5.0), 2.0, &plan, FocusConstant::SelfConsistent).unwrap();
        assert!((fc.a_f - focus_coefficient(2.0, &plan).unwrap()).abs() < 1e-18);
        let lit = Focusing::design(inc, deg(5.0), 2.0, &plan, FocusConstant::Literal).unwrap();
        assert_eq!(lit.a_f, focus_coefficient_literal(2.0, &plan).unwrap());
        let toward = Steering::toward(inc, Angle2D::in_plane(deg(-60.0)), &plan, 10).unwrap();
        let d = toward.direction(inc, &plan, 10).unwrap().angle().unwrap();
        assert!((d.theta_deg() + 60.0).abs() < 1e-9);
        let first = fc.steering.direction(inc, &plan, 1).unwrap().angle().unwrap();
        let top = fc.steering.direction(inc, &plan, 256).unwrap().angle().unwrap();
        assert!((first.theta_deg() + 45.0).abs() < 1e-9);
        assert!((top.theta_deg() + 50.0).abs() < 1e-9);
        assert_eq!(fc.phase(0.1, 0.1, plan.first_frequency()), 0.0);
    }

    #[test]
    fn ideal_phase_examples() {
        let bs = Position::new(0.0, 0.0, 20.0);
        let p = Position::new(0.0, 0.0, 5.0);
        let a = ideal_phase(Position::new(-0.1, 0.0, 0.0), bs, p, 28e9).unwrap();
        let b = ideal_phase(Position::new(0.1, 0.0, 0.0), bs, p, 28e9).unwrap();
        assert!((a - b).abs() < 1e-9);
        assert_eq!(ideal_phase(bs, bs, p, 28e9), Err(Error::CoincidentPoints));
    }

    #[test]
    fn lc_synthesis_inverts_slope() {
        let f_r = 28e9;
        let load = lc_load_synthesis(-8.0 * PI / 50.0 * 1e-9, 50.0, f_r).unwrap();
        assert!((load.inductance - 1e-9).abs() < 1e-21);
        let w = 2.0 * PI * f_r;
        assert!((load.capacitance - 1.0 / (w * w * 1e-9)).abs() < 1e-27);
        assert!((load.resonance() / f_r - 1.0).abs() < 1e-9);
        assert!(lc_phase_exact(&load, 50.0, f_r).abs() < 1e-6);
        assert_eq!(lc_load_synthesis(0.0, 50.0, f_r), Err(Error::UnrealizableLoad { alpha: 0.0 }));
        assert!(lc_load_synthesis(1e-9, 50.0, f_r).is_err());
    }

    #[test]
    fn lc_slope_matches_alpha() {
        let f_r = 28e9;
        let w_band = 100e6;
        // |α|·W/2 from 0.01 up to π/2
        for i in 1..=20 {
            let edge = PI / 2.0 * i as f64 / 20.0;
            let alpha = -edge / (w_band / 2.0);
            let load = lc_load_synthesis(alpha, 50.0, f_r).unwrap();
            let h = 1.0;
            let slope = (lc_phase_exact(&load, 50.0, f_r + h) - lc_phase_exact(&load, 50.0, f_r - h)) / (2.0 * h);
            assert!((slope / alpha - 1.0).abs() < 0.01, "edge {edge}: {slope} vs {alpha}");
        }
    }

    #[test]
    fn lc_table_is_realizable() {
        let plan = plan();
        let grid = SurfaceGrid::square(0.05, plan.wavelength() / 2.0).unwrap();
        let inc = Angle2D::in_plane(deg(45.0));
        let profile = PhaseProfile::Beamsteer(Steering::beamsteer(inc, deg(40.0), &plan).unwrap());
        let (loads, offset) = lc_loads(&profile, &grid, 50.0, plan.center_frequency()).unwrap();
        assert_eq!(loads.len(), grid.len());
        assert!(offset > 0.0);
        for l in &loads {
            assert!(l.load.inductance > 0.0 && l.load.capacitance > 0.0);
            assert!((l.load.resonance() / plan.center_frequency() - 1.0).abs() < 1e-9);
        }
        let (loads, _) = lc_loads(&PhaseProfile::MIRROR, &grid, 50.0, 28e9).unwrap();
        assert!(loads.iter().all(|l| l.load.inductance > 0.0));
    }
}

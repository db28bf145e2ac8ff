//! Surface-centered geometry and the OFDM band plan.
//!
//! The reflecting surface lies in the x–y plane, centered at the origin, with
//! outward normal +z. Directions use a signed inclination `theta` in
//! `[-π/2, π/2]` and an azimuth `phi` in `[0, π)`, so that in-plane (`phi = 0`)
//! reflections toward negative x read as negative angles.

use core::f64::consts::PI;
use core::ops::Sub;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Speed of light in vacuum, m/s (SI exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative bandwidth above which the narrowband channel model is suspect.
pub const NARROWBAND_LIMIT: f64 = 0.05;

/// A point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Position { x, y, z }
    }

    /// Point at `range` meters from the surface center in direction `angle`.
    pub fn from_angle(angle: Angle2D, range: f64) -> Self {
        let (ux, uy) = angle.direction_cosines();
        Position::new(range * ux, range * uy, range * angle.theta.cos())
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Sub for Position {
    type Output = Position;

    fn sub(self, rhs: Position) -> Position {
        Position::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

/// Direction seen from the surface center, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Angle2D {
    /// Signed inclination from the surface normal.
    pub theta: f64,
    /// Azimuth in `[0, π)`.
    pub phi: f64,
}

impl Angle2D {
    pub const BORESIGHT: Angle2D = Angle2D { theta: 0.0, phi: 0.0 };

    /// Validated constructor; the angle must lie in the signed convention.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(Error::Domain("angle must be finite"));
        }
        if theta.abs() > PI / 2.0 + 1e-12 {
            return Err(Error::Domain("inclination outside [-pi/2, pi/2]"));
        }
        if !(0.0..PI).contains(&phi) {
            return Err(Error::Domain("azimuth outside [0, pi)"));
        }
        Ok(Angle2D { theta, phi })
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Angle2D::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    /// In-plane (`phi = 0`) direction. `theta` is not range-checked.
    pub const fn in_plane(theta: f64) -> Self {
        Angle2D { theta, phi: 0.0 }
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn phi_deg(&self) -> f64 {
        self.phi.to_degrees()
    }

    /// `(sin θ cos φ, sin θ sin φ)`.
    pub fn direction_cosines(&self) -> (f64, f64) {
        let s = self.theta.sin();
        (s * self.phi.cos(), s * self.phi.sin())
    }

    /// Inverse of [`direction_cosines`](Self::direction_cosines) on the front
    /// half-space. Returns `None` when `ux² + uy² > 1` (evanescent).
    pub fn from_direction_cosines(ux: f64, uy: f64) -> Option<Self> {
        let s2 = ux * ux + uy * uy;
        if !s2.is_finite() || s2 > 1.0 + 1e-12 {
            return None;
        }
        let s = s2.sqrt().min(1.0);
        Some(signed_from_components(ux, uy, s.asin()))
    }

    /// Conventional spherical angles: `theta ∈ [0, π/2]`, `phi ∈ [0, 2π)`.
    pub fn to_conventional(&self) -> (f64, f64) {
        if self.theta < 0.0 {
            (-self.theta, self.phi + PI)
        } else {
            (self.theta, self.phi)
        }
    }

    /// Maps conventional front-half-space angles into the signed convention.
    pub fn from_conventional(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI / 2.0).contains(&theta) {
            return Err(Error::Domain("conventional inclination outside [0, pi/2]"));
        }
        let phi = num_traits::Euclid::rem_euclid(&phi, &(2.0 * PI));
        if phi >= PI {
            Ok(Angle2D { theta: -theta, phi: phi - PI })
        } else {
            Ok(Angle2D { theta, phi })
        }
    }
}

/// Builds the signed angle whose direction cosines point along `(ux, uy)`,
/// given the unsigned inclination.
fn signed_from_components(ux: f64, uy: f64, theta_abs: f64) -> Angle2D {
    if ux == 0.0 && uy == 0.0 {
        return Angle2D { theta: theta_abs, phi: 0.0 };
    }
    let phi = uy.atan2(ux);
    if (0.0..PI).contains(&phi) {
        Angle2D { theta: theta_abs, phi }
    } else if phi < 0.0 {
        Angle2D { theta: -theta_abs, phi: phi + PI }
    } else {
        Angle2D { theta: -theta_abs, phi: 0.0 }
    }
}

/// `(u_x, u_y)` of an angle.
pub fn direction_cosines(angle: Angle2D) -> (f64, f64) {
    angle.direction_cosines()
}

/// Direction of `position` as seen from the surface center.
pub fn angle_of(position: Position) -> Result<Angle2D> {
    if !position.is_finite() {
        return Err(Error::Domain("position must be finite"));
    }
    let r = position.norm();
    if r == 0.0 {
        return Err(Error::Domain("direction of the zero vector"));
    }
    if position.z < 0.0 {
        return Err(Error::Domain("position behind the surface (z < 0)"));
    }
    let s = position.x.hypot(position.y);
    Ok(signed_from_components(position.x, position.y, s.atan2(position.z)))
}

/// Uniform N×M grid of cells centered on the origin.
///
/// Cell `(n, m)` sits at `(n·dx − Lx/2, m·dy − Ly/2, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceGrid {
    n_x: usize,
    n_y: usize,
    dx: f64,
    dy: f64,
}

impl SurfaceGrid {
    pub fn new(n_x: usize, n_y: usize, dx: f64, dy: f64) -> Result<Self> {
        if n_x == 0 || n_y == 0 {
            return Err(Error::Domain("surface needs at least one cell per side"));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::Domain("cell spacing must be positive"));
        }
        Ok(SurfaceGrid { n_x, n_y, dx, dy })
    }

    /// Square grid of side `side` with square cells of pitch `pitch`; the
    /// cell count per side is rounded to the nearest integer (at least 1).
    pub fn square(side: f64, pitch: f64) -> Result<Self> {
        if !(side > 0.0 && pitch > 0.0) {
            return Err(Error::Domain("surface side and pitch must be positive"));
        }
        let n = ((side / pitch).round() as usize).max(1);
        SurfaceGrid::new(n, n, pitch, pitch)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lx(&self) -> f64 {
        self.n_x as f64 * self.dx
    }

    pub fn ly(&self) -> f64 {
        self.n_y as f64 * self.dy
    }

    pub fn diameter(&self) -> f64 {
        self.lx().max(self.ly())
    }

    pub fn area(&self) -> f64 {
        self.lx() * self.ly()
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn x(&self, n: usize) -> f64 {
        n as f64 * self.dx - self.lx() / 2.0
    }

    pub fn y(&self, m: usize) -> f64 {
        m as f64 * self.dy - self.ly() / 2.0
    }

    pub fn cell(&self, n: usize, m: usize) -> Position {
        Position::new(self.x(n), self.y(m), 0.0)
    }

    /// All cells in row-major `(n, m)` order (n outer).
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, Position)> + '_ {
        (0..self.n_x).flat_map(move |n| (0..self.n_y).map(move |m| (n, m, self.cell(n, m))))
    }
}

/// OFDM band plan with 1-based subcarrier indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmPlan {
    f0: f64,
    bandwidth: f64,
    subcarriers: usize,
}

impl OfdmPlan {
    pub fn new(f0: f64, bandwidth: f64, subcarriers: usize) -> Result<Self> {
        if subcarriers == 0 {
            return Err(Error::Domain("at least one subcarrier is required"));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::Domain("bandwidth must be positive"));
        }
        if !(f0 > bandwidth / 2.0 && f0.is_finite()) {
            return Err(Error::Domain("center frequency must exceed half the bandwidth"));
        }
        let plan = OfdmPlan { f0, bandwidth, subcarriers };
        if !plan.is_narrowband() {
            log::warn!(
                "relative bandwidth {:.3} exceeds {NARROWBAND_LIMIT}; narrowband channel model is approximate",
                plan.relative_bandwidth()
            );
        }
        Ok(plan)
    }

    pub fn center_frequency(&self) -> f64 {
        self.f0
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn spacing(&self) -> f64 {
        self.bandwidth / self.subcarriers as f64
    }

    /// Wavelength at the center frequency.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f0
    }

    pub fn relative_bandwidth(&self) -> f64 {
        self.bandwidth / self.f0
    }

    pub fn is_narrowband(&self) -> bool {
        self.relative_bandwidth() <= NARROWBAND_LIMIT
    }

    pub fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.subcarriers {
            Err(Error::SubcarrierOutOfRange { k, subcarriers: self.subcarriers })
        } else {
            Ok(())
        }
    }

    /// `f_k = f0 − W/2 + k·Δf`.
    pub fn frequency(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        Ok(self.f0 + self.offset_unchecked(k))
    }

    /// `f_k − f0`, computed without cancellation.
    pub fn offset_from_center(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        Ok(self.offset_unchecked(k))
    }

    /// `f_k − f_1 = (k − 1)·Δf`.
    pub fn offset_from_first(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        Ok((k - 1) as f64 * self.spacing())
    }

    fn offset_unchecked(&self, k: usize) -> f64 {
        (k as f64 - self.subcarriers as f64 / 2.0) * self.spacing()
    }

    pub fn first_frequency(&self) -> f64 {
        self.f0 + self.offset_unchecked(1)
    }

    pub fn last_frequency(&self) -> f64 {
        self.f0 + self.bandwidth / 2.0
    }

    /// `(k, f_k)` for every subcarrier.
    pub fn frequencies(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (1..=self.subcarriers).map(move |k| (k, self.f0 + self.offset_unchecked(k)))
    }
}

/// `f_k` of `plan`; errors for `k` outside `1..=K`.
pub fn subcarrier_frequency(plan: &OfdmPlan, k: usize) -> Result<f64> {
    plan.frequency(k)
}

fn check_wavelength(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain("wavelength must be positive"))
    }
}

/// Far-field boundary `2D²/λ`.
pub fn fraunhofer_distance(diameter: f64, lambda: f64) -> Result<f64> {
    check_wavelength(lambda)?;
    if !(diameter >= 0.0) {
        return Err(Error::Domain("diameter must be non-negative"));
    }
    Ok(2.0 * diameter * diameter / lambda)
}

/// Reactive near-field boundary `(D⁴/8λ)^(1/3)`.
pub fn fresnel_distance(diameter: f64, lambda: f64) -> Result<f64> {
    check_wavelength(lambda)?;
    if !(diameter >= 0.0) {
        return Err(Error::Domain("diameter must be non-negative"));
    }
    Ok(libm::cbrt(diameter.powi(4) / (8.0 * lambda)))
}

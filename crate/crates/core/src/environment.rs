//! Rough-wall scattering: Fresnel specular reflection plus a Lambertian
//! diffuse term, as per-cell reflection coefficients.

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use crate::geometry::{Angle2D, SurfaceGrid};
use crate::{Error, Result};

/// Dielectric and roughness parameters of a wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallMaterial {
    pub eps_r: f64,
    pub tan_delta: f64,
    /// Power scattering coefficient `S²`.
    pub s2: f64,
    /// Power reduction factor `R²` of the specular term.
    pub r2: f64,
}

impl WallMaterial {
    pub const AERATED_CONCRETE: WallMaterial =
        WallMaterial { eps_r: 2.26, tan_delta: 0.0491, s2: 0.1, r2: 0.9 };

    pub fn new(eps_r: f64, tan_delta: f64, s2: f64, r2: f64) -> Result<Self> {
        if !(eps_r >= 1.0 && eps_r.is_finite()) {
            return Err(Error::Domain("eps_r must be at least 1"));
        }
        if !(tan_delta >= 0.0 && tan_delta.is_finite()) {
            return Err(Error::Domain("loss tangent must be non-negative"));
        }
        if !(0.0..=1.0).contains(&s2) || !(0.0..=1.0).contains(&r2) {
            return Err(Error::Domain("S^2 and R^2 must lie in [0, 1]"));
        }
        Ok(WallMaterial { eps_r, tan_delta, s2, r2 })
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Option<WallMaterial> {
        match name {
            "aerated_concrete" => Some(Self::AERATED_CONCRETE),
            _ => None,
        }
    }

    pub fn s(&self) -> f64 {
        self.s2.sqrt()
    }

    pub fn r(&self) -> f64 {
        self.r2.sqrt()
    }

    /// Complex `n² = εr − j·εr·tanδ`.
    pub fn refractive_index_squared(&self) -> Complex64 {
        Complex64::new(self.eps_r, -self.eps_r * self.tan_delta)
    }
}

/// TE Fresnel reflection coefficient.
pub fn fresnel_te(theta_i: f64, material: &WallMaterial) -> Complex64 {
    let c = theta_i.cos();
    let s = theta_i.sin();
    let root = (material.refractive_index_squared() - s * s).sqrt();
    (c - root) / (c + root)
}

/// Reflection coefficient of one wall cell for a plane wave arriving from
/// `incident` and observed toward `observed`. `diffuse_offset` is the common
/// phase `Ψ0`.
#[allow(clippy::too_many_arguments)]
pub fn wall_cell_reflection(
    n: usize,
    m: usize,
    incident: Angle2D,
    observed: Angle2D,
    material: &WallMaterial,
    grid: &SurfaceGrid,
    lambda: f64,
    diffuse_offset: f64,
) -> Complex64 {
    let gs = scattering_gain(grid, lambda);
    let specular = specular_term(incident, material, gs);
    let diffuse = diffuse_amplitude(incident, observed, material, gs);
    let psi = diffuse_phase(grid.x(n), grid.y(m), incident, observed, lambda) + diffuse_offset;
    specular + Complex64::from_polar(diffuse, psi)
}

/// `Gs = Ac·4π/λ²`.
pub fn scattering_gain(grid: &SurfaceGrid, lambda: f64) -> f64 {
    grid.cell_area() * 4.0 * PI / (lambda * lambda)
}

/// `Γ(θi)·R·√Gs`, common to all cells.
pub fn specular_term(incident: Angle2D, material: &WallMaterial, gs: f64) -> Complex64 {
    fresnel_te(incident.theta, material) * (material.r() * gs.sqrt())
}

/// `S·√(Gs·cosθi·cosθ)`.
pub fn diffuse_amplitude(incident: Angle2D, observed: Angle2D, material: &WallMaterial, gs: f64) -> f64 {
    let cos_product = (incident.theta.cos() * observed.theta.cos()).max(0.0);
    material.s() * (gs * cos_product).sqrt()
}

/// Phase that makes the diffuse terms add coherently toward `observed`.
pub fn diffuse_phase(x: f64, y: f64, incident: Angle2D, observed: Angle2D, lambda: f64) -> f64 {
    let (uxi, uyi) = incident.direction_cosines();
    let (ux, uy) = observed.direction_cosines();
    -2.0 * PI / lambda * (x * (uxi + ux) + y * (uyi + uy))
}

/// A rough wall discretized like a metaprism.
#[derive(Debug, Clone, PartialEq)]
pub struct Wall {
    pub grid: SurfaceGrid,
    pub material: WallMaterial,
    /// Wavelength used for `Gs` and the diffuse phase.
    pub lambda: f64,
    pub diffuse_offset: f64,
}

impl Wall {
    pub fn new(grid: SurfaceGrid, material: WallMaterial, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain("wavelength must be positive"));
        }
        Ok(Wall { grid, material, lambda, diffuse_offset: 0.0 })
    }

    pub fn scattering_gain(&self) -> f64 {
        scattering_gain(&self.grid, self.lambda)
    }

    pub fn cell_reflection(&self, n: usize, m: usize, incident: Angle2D, observed: Angle2D) -> Complex64 {
        wall_cell_reflection(n, m, incident, observed, &self.material, &self.grid, self.lambda, self.diffuse_offset)
    }
}

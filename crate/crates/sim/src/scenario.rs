//! Scenario files: TOML with units in the key names, angles in degrees.
//!
//! Every field has a default; an empty file is the urban NLOS scenario with a
//! 50 cm beamsteering metaprism (BS at (14.21, 0, 14.21) m, 28 GHz, 100 MHz,
//! 256 subcarriers).

use std::path::Path;

use metaprism_core::channel::{composite_channel, composite_channel_all, Link, PropagationMode};
use metaprism_core::environment::{Wall, WallMaterial};
use metaprism_core::geometry::{angle_of, Angle2D, OfdmPlan, Position, SurfaceGrid};
use metaprism_core::link::{db_to_linear, dbm_to_watts, AssignmentMode, LinkBudget};
use metaprism_core::metaprism::{CellModel, FocusConstant, Focusing, Metaprism, PhaseProfile, Steering};
use metaprism_core::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Metaprism,
    Wall,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Beamsteer,
    Focus,
    Ideal,
    Specular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    FarField,
}

impl From<Mode> for PropagationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => PropagationMode::Exact,
            Mode::FarField => PropagationMode::FarField,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FocusRule {
    SelfConsistent,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    Literal,
    AmplitudeConsistent,
}

impl From<WeightRule> for AssignmentMode {
    fn from(w: WeightRule) -> Self {
        match w {
            WeightRule::Literal => AssignmentMode::Literal,
            WeightRule::AmplitudeConsistent => AssignmentMode::AmplitudeConsistent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Grid,
    Ray,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Band {
    pub f0_ghz: f64,
    pub bandwidth_mhz: f64,
    pub subcarriers: usize,
}

impl Default for Band {
    fn default() -> Self {
        Band { f0_ghz: 28.0, bandwidth_mhz: 100.0, subcarriers: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    pub ptx_dbm: f64,
    pub gt_db: f64,
    pub gr_db: f64,
    pub noise_figure_db: f64,
    pub t0_k: f64,
    pub bs_mode: Mode,
    pub rx_mode: Mode,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            ptx_dbm: 20.0,
            gt_db: 10.0,
            gr_db: 2.0,
            noise_figure_db: 3.0,
            t0_k: 290.0,
            bs_mode: Mode::FarField,
            rx_mode: Mode::Exact,
        }
    }
}

/// BS placement: `position_m` if given, else `distance_m` along the angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BsConfig {
    pub distance_m: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub position_m: Option<[f64; 3]>,
}

impl Default for BsConfig {
    fn default() -> Self {
        BsConfig { distance_m: 14.21 * std::f64::consts::SQRT_2, theta_deg: 45.0, phi_deg: 0.0, position_m: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetaprismConfig {
    pub side_m: f64,
    pub pitch_wavelengths: f64,
    pub gamma_magnitude: f64,
    pub r0_ohm: f64,
    pub profile: ProfileKind,
    pub theta_m_deg: f64,
    pub d_m_m: f64,
    pub focus_constant: FocusRule,
    pub specular_phase_deg: f64,
    /// Target of the ideal profile.
    pub target_m: Option<[f64; 3]>,
}

impl Default for MetaprismConfig {
    fn default() -> Self {
        MetaprismConfig {
            side_m: 0.5,
            pitch_wavelengths: 0.5,
            gamma_magnitude: 1.0,
            r0_ohm: 50.0,
            profile: ProfileKind::Beamsteer,
            theta_m_deg: 40.0,
            d_m_m: 2.0,
            focus_constant: FocusRule::SelfConsistent,
            specular_phase_deg: 180.0,
            target_m: None,
        }
    }
}

/// Wall material: a named preset, with any explicit constant overriding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WallConfig {
    pub material: String,
    pub eps_r: Option<f64>,
    pub tan_delta: Option<f64>,
    pub s2: Option<f64>,
    pub r2: Option<f64>,
    pub side_m: f64,
    pub pitch_wavelengths: f64,
    pub diffuse_offset_deg: f64,
}

impl Default for WallConfig {
    fn default() -> Self {
        WallConfig {
            material: "aerated_concrete".into(),
            eps_r: None,
            tan_delta: None,
            s2: None,
            r2: None,
            side_m: 2.0,
            pitch_wavelengths: 0.5,
            diffuse_offset_deg: 0.0,
        }
    }
}

/// Receiver region: an `x`–`z` grid at height `y_m`, or a ray from the
/// surface center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Region {
    pub kind: RegionKind,
    pub x_min_m: f64,
    pub x_max_m: f64,
    pub z_min_m: f64,
    pub z_max_m: f64,
    pub y_m: f64,
    pub step_m: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub points: usize,
    pub log_spacing: bool,
}

impl Default for Region {
    fn default() -> Self {
        Region {
            kind: RegionKind::Grid,
            x_min_m: -15.0,
            x_max_m: -5.0,
            z_min_m: 2.0,
            z_max_m: 10.0,
            y_m: 0.0,
            step_m: 0.5,
            theta_deg: 0.0,
            phi_deg: 0.0,
            d_min_m: 2.0,
            d_max_m: 200.0,
            points: 41,
            log_spacing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnrMapConfig {
    /// Subcarriers reported per point; empty means all.
    pub subcarriers: Vec<usize>,
}

impl Default for SnrMapConfig {
    fn default() -> Self {
        SnrMapConfig { subcarriers: vec![1, 64, 128, 192, 256] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlSweepConfig {
    pub profiles: Vec<ProfileKind>,
    /// Receiver distances along the region ray; empty means the ray's own
    /// sampling.
    pub distances_m: Vec<f64>,
    /// Design and evaluation subcarrier; defaults to the last one.
    pub subcarrier: Option<usize>,
}

impl Default for PlSweepConfig {
    fn default() -> Self {
        PlSweepConfig {
            profiles: vec![ProfileKind::Beamsteer, ProfileKind::Focus, ProfileKind::Ideal],
            distances_m: Vec::new(),
            subcarrier: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateSweepConfig {
    pub users: Vec<usize>,
    pub trials: usize,
    pub assignment: WeightRule,
}

impl Default for RateSweepConfig {
    fn default() -> Self {
        RateSweepConfig {
            users: vec![1, 2, 4, 6, 8, 10, 12, 14, 16],
            trials: 20,
            assignment: WeightRule::AmplitudeConsistent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayFactorConfig {
    pub subcarriers: Vec<usize>,
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub theta_step_deg: f64,
}

impl Default for ArrayFactorConfig {
    fn default() -> Self {
        ArrayFactorConfig { subcarriers: vec![1, 128, 256], theta_min_deg: -90.0, theta_max_deg: 90.0, theta_step_deg: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub seed: u64,
    pub surface: SurfaceKind,
    pub band: Band,
    pub link: LinkConfig,
    pub bs: BsConfig,
    pub metaprism: MetaprismConfig,
    pub wall: WallConfig,
    pub region: Region,
    pub snr_map: SnrMapConfig,
    pub pl_sweep: PlSweepConfig,
    pub rate_sweep: RateSweepConfig,
    pub array_factor: ArrayFactorConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            seed: 1,
            surface: SurfaceKind::Metaprism,
            band: Band::default(),
            link: LinkConfig::default(),
            bs: BsConfig::default(),
            metaprism: MetaprismConfig::default(),
            wall: WallConfig::default(),
            region: Region::default(),
            snr_map: SnrMapConfig::default(),
            pl_sweep: PlSweepConfig::default(),
            rate_sweep: RateSweepConfig::default(),
            array_factor: ArrayFactorConfig::default(),
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Scenario::from_toml(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the resolved scenario, hex.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        self.plan()?;
        let bs = self.bs_position()?;
        if !(bs.z > 0.0) {
            return config("BS must be in front of the surface (z > 0)");
        }
        let r = &self.region;
        match r.kind {
            RegionKind::Grid => {
                if !(r.step_m > 0.0) || r.x_max_m < r.x_min_m || r.z_max_m < r.z_min_m {
                    return config("region grid needs step_m > 0 and ordered bounds");
                }
                if !(r.z_min_m > 0.0) {
                    return config("region must lie in front of the surface (z_min_m > 0)");
                }
            }
            RegionKind::Ray => {
                if !(r.d_min_m > 0.0) || r.d_max_m < r.d_min_m || r.points == 0 {
                    return config("region ray needs 0 < d_min_m <= d_max_m and points >= 1");
                }
                if r.theta_deg.abs() >= 90.0 {
                    return config("region ray must point into the front half-space");
                }
            }
        }
        if matches!(self.surface, SurfaceKind::Wall | SurfaceKind::Both) {
            self.material()?;
        }
        Ok(())
    }

    pub fn plan(&self) -> Result<OfdmPlan> {
        Ok(OfdmPlan::new(self.band.f0_ghz * 1e9, self.band.bandwidth_mhz * 1e6, self.band.subcarriers)?)
    }

    pub fn budget(&self, plan: &OfdmPlan) -> Result<LinkBudget> {
        Ok(LinkBudget::new(dbm_to_watts(self.link.ptx_dbm), self.link.noise_figure_db, self.link.t0_k, plan)?)
    }

    pub fn bs_position(&self) -> Result<Position> {
        match self.bs.position_m {
            Some([x, y, z]) => Ok(Position::new(x, y, z)),
            None => {
                let angle = Angle2D::from_degrees(self.bs.theta_deg, self.bs.phi_deg)?;
                Ok(Position::from_angle(angle, self.bs.distance_m))
            }
        }
    }

    pub fn incident_angle(&self) -> Result<Angle2D> {
        Ok(angle_of(self.bs_position()?)?)
    }

    pub fn link_to(&self, rx: Position) -> Result<Link> {
        Ok(Link::new(self.bs_position()?, rx, db_to_linear(self.link.gt_db), db_to_linear(self.link.gr_db))
            .with_modes(self.link.bs_mode.into(), self.link.rx_mode.into()))
    }

    pub fn material(&self) -> Result<WallMaterial> {
        let w = &self.wall;
        let base = match WallMaterial::preset(&w.material) {
            Some(m) => m,
            None => return config(format!("unknown wall material preset '{}'", w.material)),
        };
        Ok(WallMaterial::new(
            w.eps_r.unwrap_or(base.eps_r),
            w.tan_delta.unwrap_or(base.tan_delta),
            w.s2.unwrap_or(base.s2),
            w.r2.unwrap_or(base.r2),
        )?)
    }

    pub fn metaprism_grid(&self, plan: &OfdmPlan) -> Result<SurfaceGrid> {
        let m = &self.metaprism;
        Ok(SurfaceGrid::square(m.side_m, m.pitch_wavelengths * plan.wavelength())?)
    }

    pub fn cell_model(&self, grid: &SurfaceGrid, plan: &OfdmPlan) -> Result<CellModel> {
        let base = CellModel::for_grid(grid, plan.wavelength())?;
        Ok(CellModel::new(base.q, self.metaprism.r0_ohm, self.metaprism.gamma_magnitude)?)
    }

    /// Phase profile of the configured metaprism.
    pub fn profile(&self, plan: &OfdmPlan) -> Result<PhaseProfile> {
        let m = &self.metaprism;
        let incident = self.incident_angle()?;
        let theta_m = m.theta_m_deg.to_radians();
        Ok(match m.profile {
            ProfileKind::Beamsteer => PhaseProfile::Beamsteer(Steering::beamsteer(incident, theta_m, plan)?),
            ProfileKind::Focus => {
                let constant = match m.focus_constant {
                    FocusRule::SelfConsistent => FocusConstant::SelfConsistent,
                    FocusRule::Literal => FocusConstant::Literal,
                };
                let grid = self.metaprism_grid(plan)?;
                Focusing::check_range(m.d_m_m, &grid, plan.wavelength());
                PhaseProfile::Focus(Focusing::design(incident, theta_m, m.d_m_m, plan, constant)?)
            }
            ProfileKind::Ideal => {
                let Some([x, y, z]) = m.target_m else {
                    return config("ideal profile needs metaprism.target_m");
                };
                PhaseProfile::Ideal {
                    bs: self.bs_position()?,
                    target: Position::new(x, y, z),
                    bs_mode: self.link.bs_mode.into(),
                    target_mode: self.link.rx_mode.into(),
                }
            }
            ProfileKind::Specular => PhaseProfile::Specular { phase: m.specular_phase_deg.to_radians() },
        })
    }

    pub fn build_metaprism(&self, plan: &OfdmPlan) -> Result<Metaprism> {
        let grid = self.metaprism_grid(plan)?;
        let cell = self.cell_model(&grid, plan)?;
        Ok(Metaprism::new(grid, cell, self.profile(plan)?))
    }

    pub fn build_wall(&self, plan: &OfdmPlan) -> Result<Wall> {
        let w = &self.wall;
        let grid = SurfaceGrid::square(w.side_m, w.pitch_wavelengths * plan.wavelength())?;
        let mut wall = Wall::new(grid, self.material()?, plan.wavelength())?;
        wall.diffuse_offset = w.diffuse_offset_deg.to_radians();
        Ok(wall)
    }

    pub fn surfaces(&self, plan: &OfdmPlan) -> Result<Surfaces> {
        let metaprism = match self.surface {
            SurfaceKind::Metaprism | SurfaceKind::Both => Some(self.build_metaprism(plan)?),
            SurfaceKind::Wall => None,
        };
        let wall = match self.surface {
            SurfaceKind::Wall | SurfaceKind::Both => Some(self.build_wall(plan)?),
            SurfaceKind::Metaprism => None,
        };
        Ok(Surfaces { metaprism, wall })
    }

    /// Receiver positions of the region in declared order: grid points with
    /// `x` outer and `z` inner, or ray points by increasing distance.
    pub fn region_points(&self) -> Result<Vec<Position>> {
        let r = &self.region;
        match r.kind {
            RegionKind::Grid => {
                let xs = steps(r.x_min_m, r.x_max_m, r.step_m);
                let zs = steps(r.z_min_m, r.z_max_m, r.step_m);
                Ok(xs.iter().flat_map(|&x| zs.iter().map(move |&z| Position::new(x, r.y_m, z))).collect())
            }
            RegionKind::Ray => {
                let dir = self.ray_direction()?;
                Ok(ray_distances(r.d_min_m, r.d_max_m, r.points, r.log_spacing)
                    .into_iter()
                    .map(|d| Position::from_angle(dir, d))
                    .collect())
            }
        }
    }

    pub fn ray_direction(&self) -> Result<Angle2D> {
        Ok(Angle2D::from_degrees(self.region.theta_deg, self.region.phi_deg)?)
    }

    /// A receiver drawn uniformly from the region.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Result<Position> {
        let r = &self.region;
        Ok(match r.kind {
            RegionKind::Grid => {
                Position::new(uniform(rng, r.x_min_m, r.x_max_m), r.y_m, uniform(rng, r.z_min_m, r.z_max_m))
            }
            RegionKind::Ray => Position::from_angle(self.ray_direction()?, uniform(rng, r.d_min_m, r.d_max_m)),
        })
    }
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// `lo, lo + step, …` up to `hi` inclusive (with a small tolerance).
pub fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

pub fn ray_distances(lo: f64, hi: f64, points: usize, log: bool) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            if log {
                lo * (hi / lo).powf(t)
            } else {
                lo + (hi - lo) * t
            }
        })
        .collect()
}

/// The reflecting surfaces of a scenario; their channels add coherently.
#[derive(Debug, Clone)]
pub struct Surfaces {
    pub metaprism: Option<Metaprism>,
    pub wall: Option<Wall>,
}

impl Surfaces {
    /// Channel on subcarriers `ks` (1-based), or on all subcarriers if `ks`
    /// is `None`.
    pub fn channel(&self, link: &Link, plan: &OfdmPlan, ks: Option<&[usize]>) -> Result<Vec<Complex64>> {
        let mut total = match ks {
            Some(ks) => vec![Complex64::new(0.0, 0.0); ks.len()],
            None => vec![Complex64::new(0.0, 0.0); plan.subcarriers()],
        };
        if let Some(mp) = &self.metaprism {
            add(&mut total, &channel_of(mp, link, plan, ks)?);
        }
        if let Some(w) = &self.wall {
            add(&mut total, &channel_of(w, link, plan, ks)?);
        }
        Ok(total)
    }
}

fn add(total: &mut [Complex64], part: &[Complex64]) {
    total.iter_mut().zip(part).for_each(|(t, p)| *t += p);
}

/// Few subcarriers are summed directly, many through the all-subcarrier
/// recurrence.
fn channel_of<R: metaprism_core::channel::Reflector>(
    surface: &R,
    link: &Link,
    plan: &OfdmPlan,
    ks: Option<&[usize]>,
) -> Result<Vec<Complex64>> {
    match ks {
        Some(ks) if ks.len() <= 8 => {
            ks.iter().map(|&k| Ok(composite_channel(surface, link, plan, k)?.value)).collect()
        }
        Some(ks) => {
            for &k in ks {
                plan.check_index(k)?;
            }
            let all = composite_channel_all(surface, link, plan)?;
            Ok(ks.iter().map(|&k| all[k - 1]).collect())
        }
        None => Ok(composite_channel_all(surface, link, plan)?),
    }
}

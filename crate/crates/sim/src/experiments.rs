//! Experiment drivers. Each is a pure function of the scenario (and its
//! seed); rows come out in declared order regardless of worker scheduling.

use metaprism_core::channel::{composite_channel, path_loss, path_loss_ideal};
use metaprism_core::geometry::{Angle2D, OfdmPlan, Position};
use metaprism_core::link::{assign_subcarriers, linear_to_db, AssignmentPlan, LinkBudget, SnrMatrix};
use metaprism_core::metaprism::{
    lc_loads, Focusing, Metaprism, PhaseProfile, Steering, SteeredDirection,
};
use metaprism_core::channel::array_factor;
use metaprism_core::Error as ModelError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{config, Result, SimError};
use crate::output::{Table, PRNG_NAME};
use crate::scenario::{ray_distances, steps, ProfileKind, Scenario, Surfaces};

/// Provenance lines for the head of every table.
pub fn header(scenario: &Scenario, command: &str) -> Vec<String> {
    vec![
        format!("metaprism {command}"),
        format!("scenario_sha256: {}", scenario.hash()),
        format!("seed: {}", scenario.seed),
        format!("prng: {PRNG_NAME}"),
    ]
}

fn db(x: f64) -> f64 {
    linear_to_db(x)
}

/// SNR map over the receiver region. Columns: position, best subcarrier
/// among those listed (all if the list is empty), its SNR, then the SNR of
/// each listed subcarrier.
pub fn run_snr_map(s: &Scenario) -> Result<Table> {
    let plan = s.plan()?;
    let budget = s.budget(&plan)?;
    let surfaces = s.surfaces(&plan)?;
    let points = s.region_points()?;
    if points.is_empty() {
        return config("receiver region is empty");
    }
    let ks = s.snr_map.subcarriers.clone();
    for &k in &ks {
        plan.check_index(k)?;
    }
    let mut table = Table::new(["x_m", "y_m", "z_m", "k_best", "snr_db_best"]);
    table.columns.extend(ks.iter().map(|k| format!("snr_db_k{k}")));
    table.comments = header(s, "snr-map");

    table.rows = points
        .par_iter()
        .map(|&p| {
            let link = s.link_to(p)?;
            let channel = surfaces.channel(&link, &plan, (!ks.is_empty()).then_some(ks.as_slice()))?;
            let snrs: Vec<f64> = channel.iter().map(|c| budget.snr(*c)).collect();
            let best = argmax(&snrs);
            let k_best = if ks.is_empty() { best + 1 } else { ks[best] };
            let mut row = vec![p.x, p.y, p.z, k_best as f64, db(snrs[best])];
            if !ks.is_empty() {
                row.extend(snrs.iter().map(|v| db(*v)));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(table)
}

/// First index of the largest value.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Profile designed for a receiver at distance `d` along `dir`, on
/// subcarrier `k`.
fn design_for(
    kind: ProfileKind,
    s: &Scenario,
    plan: &OfdmPlan,
    dir: Angle2D,
    rx: Position,
    k: usize,
) -> Result<PhaseProfile> {
    let incident = s.incident_angle()?;
    let link = s.link_to(rx)?;
    Ok(match kind {
        ProfileKind::Beamsteer => PhaseProfile::Beamsteer(Steering::toward(incident, dir, plan, k)?),
        ProfileKind::Focus => PhaseProfile::Focus(Focusing::toward(incident, dir, rx.norm(), plan, k)?),
        ProfileKind::Ideal => {
            PhaseProfile::Ideal { bs: link.bs, target: rx, bs_mode: link.bs_mode, target_mode: link.rx_mode }
        }
        ProfileKind::Specular => PhaseProfile::Specular { phase: s.metaprism.specular_phase_deg.to_radians() },
    })
}

/// Path loss along the region ray. At each distance every listed profile is
/// redesigned for that receiver; the last column is the aligned-phasor
/// closed form.
pub fn run_pl_sweep(s: &Scenario) -> Result<Table> {
    let plan = s.plan()?;
    let k = s.pl_sweep.subcarrier.unwrap_or(plan.subcarriers());
    plan.check_index(k)?;
    let dir = s.ray_direction()?;
    let distances = if s.pl_sweep.distances_m.is_empty() {
        let r = &s.region;
        ray_distances(r.d_min_m, r.d_max_m, r.points, r.log_spacing)
    } else {
        s.pl_sweep.distances_m.clone()
    };
    if distances.iter().any(|d| !(*d > 0.0)) {
        return config("path-loss distances must be positive");
    }
    let grid = s.metaprism_grid(&plan)?;
    let cell = s.cell_model(&grid, &plan)?;
    let profiles = s.pl_sweep.profiles.clone();

    let mut table = Table::new(["d_m"]);
    table.columns.extend(profiles.iter().map(|p| format!("L_{}_db", profile_name(*p))));
    table.columns.push("L_closed_db".into());
    table.comments = header(s, "pl-sweep");
    table.comments.push(format!("subcarrier: {k}"));

    table.rows = distances
        .par_iter()
        .map(|&d| {
            let rx = Position::from_angle(dir, d);
            let link = s.link_to(rx)?;
            let mut row = vec![d];
            for &kind in &profiles {
                let mp = Metaprism::new(grid, cell, design_for(kind, s, &plan, dir, rx, k)?);
                row.push(path_loss(&composite_channel(&mp, &link, &plan, k)?));
            }
            row.push(path_loss_ideal(&link, plan.wavelength(), &cell, grid.len())?);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(table)
}

pub fn profile_name(p: ProfileKind) -> &'static str {
    match p {
        ProfileKind::Beamsteer => "beamsteer",
        ProfileKind::Focus => "focus",
        ProfileKind::Ideal => "ideal",
        ProfileKind::Specular => "specular",
    }
}

/// Generator for trial `trial` of the sweep point with `users` users.
pub fn trial_rng(seed: u64, users: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((users as u64) << 32) | trial as u64);
    rng
}

/// Unit-weight SNR of each receiver on every subcarrier.
pub fn snr_matrix(
    s: &Scenario,
    surfaces: &Surfaces,
    plan: &OfdmPlan,
    budget: &LinkBudget,
    users: &[Position],
) -> Result<SnrMatrix> {
    let mut data = Vec::with_capacity(users.len() * plan.subcarriers());
    for &p in users {
        let channel = surfaces.channel(&s.link_to(p)?, plan, None)?;
        data.extend(channel.iter().map(|c| budget.snr(*c)));
    }
    Ok(SnrMatrix::new(users.len(), plan.subcarriers(), data)?)
}

/// Users of one trial, drawn uniformly from the region.
pub fn draw_users(s: &Scenario, users: usize, trial: usize) -> Result<Vec<Position>> {
    let mut rng = trial_rng(s.seed, users, trial);
    (0..users).map(|_| s.random_point(&mut rng)).collect()
}

/// Assignment for one trial. A matrix with no usable entry leaves every
/// user uncovered.
pub fn assign_trial(s: &Scenario, matrix: &SnrMatrix) -> Result<AssignmentPlan> {
    match assign_subcarriers(matrix, s.rate_sweep.assignment.into()) {
        Ok(p) => Ok(p),
        Err(ModelError::DegenerateAssignment) => Ok(AssignmentPlan {
            assignment: vec![None; matrix.users()],
            weights: vec![0.0; matrix.subcarriers()],
            uncovered: vec![true; matrix.users()],
            steps: Vec::new(),
            mode: s.rate_sweep.assignment.into(),
        }),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub mean_rate: f64,
    pub fraction_uncovered: f64,
}

pub fn run_trial(s: &Scenario, surfaces: &Surfaces, plan: &OfdmPlan, budget: &LinkBudget, users: usize, trial: usize) -> Result<TrialOutcome> {
    let positions = draw_users(s, users, trial)?;
    let matrix = snr_matrix(s, surfaces, plan, budget, &positions)?;
    let assignment = assign_trial(s, &matrix)?;
    let total: f64 = (0..users).map(|u| assignment.user_rate(&matrix, u)).sum();
    Ok(TrialOutcome {
        mean_rate: total / users as f64,
        fraction_uncovered: assignment.uncovered_count() as f64 / users as f64,
    })
}

/// Mean per-user rate against the number of users.
pub fn run_rate_sweep(s: &Scenario) -> Result<Table> {
    let plan = s.plan()?;
    let budget = s.budget(&plan)?;
    let trials = s.rate_sweep.trials;
    if trials == 0 {
        return config("rate sweep needs at least one trial");
    }
    for &u in &s.rate_sweep.users {
        if u > plan.subcarriers() {
            return Err(SimError::Model(ModelError::Capacity { users: u, subcarriers: plan.subcarriers() }));
        }
    }
    let surfaces = s.surfaces(&plan)?;
    let mut table = Table::new(["users", "mean_rate_bps_hz", "fraction_uncovered"]);
    table.comments = header(s, "rate-sweep");
    table.comments.push(format!("trials: {trials}"));
    for &users in s.rate_sweep.users.iter().filter(|u| **u > 0) {
        let outcomes = (0..trials)
            .into_par_iter()
            .map(|t| run_trial(s, &surfaces, &plan, &budget, users, t))
            .collect::<Result<Vec<_>>>()?;
        let n = outcomes.len() as f64;
        let rate = outcomes.iter().map(|o| o.mean_rate).sum::<f64>() / n;
        let uncovered = outcomes.iter().map(|o| o.fraction_uncovered).sum::<f64>() / n;
        table.rows.push(vec![users as f64, rate, uncovered]);
    }
    Ok(table)
}

/// Assignment plan for the first trial of `users` users.
pub fn run_assignment(s: &Scenario, users: usize) -> Result<Table> {
    let plan = s.plan()?;
    if users > plan.subcarriers() {
        return Err(SimError::Model(ModelError::Capacity { users, subcarriers: plan.subcarriers() }));
    }
    let budget = s.budget(&plan)?;
    let surfaces = s.surfaces(&plan)?;
    let positions = draw_users(s, users, 0)?;
    let matrix = snr_matrix(s, &surfaces, &plan, &budget, &positions)?;
    let assignment = assign_trial(s, &matrix)?;
    let mut table =
        Table::new(["user", "subcarrier", "omega", "snr_db", "rate_bps_hz", "x_m", "y_m", "z_m"]);
    table.comments = header(s, "assign");
    for (u, p) in positions.iter().enumerate() {
        let (k, omega) = match assignment.assignment[u] {
            Some(k) => (k + 1, assignment.weights[k]),
            None => (0, 0.0),
        };
        let snr = assignment.user_snr(&matrix, u);
        table.rows.push(vec![(u + 1) as f64, k as f64, omega, db(snr), assignment.user_rate(&matrix, u), p.x, p.y, p.z]);
    }
    Ok(table)
}

/// Main-lobe direction of subcarrier `k` for the configured profile.
pub fn lobe_direction(profile: &PhaseProfile, incident: Angle2D, plan: &OfdmPlan, k: usize) -> Result<SteeredDirection> {
    Ok(match profile {
        PhaseProfile::Beamsteer(st) => st.direction(incident, plan, k)?,
        PhaseProfile::Focus(fc) => fc.steering.direction(incident, plan, k)?,
        PhaseProfile::Specular { .. } => {
            SteeredDirection::Propagating(Angle2D { theta: -incident.theta, phi: incident.phi })
        }
        PhaseProfile::Ideal { target, .. } => SteeredDirection::Propagating(metaprism_core::geometry::angle_of(*target)?),
    })
}

/// Normalized array factor `|AF|/(N·M)` over an angle cut in the plane of
/// incidence.
pub fn run_array_factor(s: &Scenario) -> Result<Table> {
    let plan = s.plan()?;
    let grid = s.metaprism_grid(&plan)?;
    let incident = s.incident_angle()?;
    let profile = s.profile(&plan)?;
    let cfg = &s.array_factor;
    if !(cfg.theta_step_deg > 0.0) || cfg.theta_min_deg < -90.0 || cfg.theta_max_deg > 90.0 {
        return config("array-factor angles must lie in [-90, 90] with a positive step");
    }
    let thetas = steps(cfg.theta_min_deg, cfg.theta_max_deg, cfg.theta_step_deg);
    let norm = grid.len() as f64;
    let mut table = Table::new(["k", "theta_deg", "af_norm"]);
    table.comments = header(s, "array-factor");
    for &k in &cfg.subcarriers {
        plan.check_index(k)?;
        let lobe = lobe_direction(&profile, incident, &plan, k)?;
        let rows: Vec<Vec<f64>> = thetas
            .par_iter()
            .map(|&t| {
                let theta = Angle2D { theta: t.to_radians(), phi: incident.phi };
                let v = match lobe {
                    SteeredDirection::Propagating(t0) => array_factor(&grid, t0, theta, plan.wavelength()).norm() / norm,
                    SteeredDirection::Evanescent => 0.0,
                };
                vec![k as f64, t, v]
            })
            .collect();
        table.rows.extend(rows);
    }
    Ok(table)
}

/// LC loads realizing the configured profile.
pub fn run_lc_export(s: &Scenario) -> Result<Table> {
    let plan = s.plan()?;
    let mp = s.build_metaprism(&plan)?;
    let f_r = match mp.profile {
        PhaseProfile::Beamsteer(_) | PhaseProfile::Focus(_) => mp.profile.reference_frequency(),
        _ => plan.center_frequency(),
    };
    let (loads, offset) = lc_loads(&mp.profile, &mp.grid, mp.cell.r0, f_r)?;
    let mut table = Table::new(["n", "m", "L_henries", "C_farads"]);
    table.comments = header(s, "lc-export");
    table.comments.push(format!("resonance_hz: {f_r:?}"));
    table.comments.push(format!("common_slope_offset_rad_per_hz: {offset:?}"));
    table.rows = loads
        .iter()
        .map(|l| vec![l.n as f64, l.m as f64, l.load.inductance, l.load.capacitance])
        .collect();
    Ok(table)
}

use std::f64::consts::PI;

use metaprism_core::channel::{array_factor, composite_channel, composite_channel_all, Link, PropagationMode};
use metaprism_core::environment::{diffuse_amplitude, fresnel_te, scattering_gain, wall_cell_reflection, WallMaterial};
use metaprism_core::geometry::{Angle2D, OfdmPlan, Position, SurfaceGrid};
use metaprism_core::link::{assign_subcarriers, AssignmentMode, SnrMatrix};
use metaprism_core::metaprism::{
    beamsteer_phase, focal_distance, focus_coefficient, focus_phase, pointing_phase, reflection_coefficient,
    CellModel, FocalDistance, Metaprism, PhaseProfile, Steering, SteeredDirection,
};
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = Angle2D> {
    (-PI / 2.0..PI / 2.0, 0.0..PI).prop_map(|(t, p)| Angle2D::new(t, p).unwrap())
}

fn plan() -> OfdmPlan {
    OfdmPlan::new(28e9, 100e6, 256).unwrap()
}

proptest! {
    #[test]
    fn direction_cosines_in_unit_disk(a in angle()) {
        let (ux, uy) = a.direction_cosines();
        prop_assert!(ux * ux + uy * uy <= 1.0 + 1e-15);
    }

    #[test]
    fn conventional_round_trip(a in angle()) {
        let (t, p) = a.to_conventional();
        let back = Angle2D::from_conventional(t, p).unwrap();
        let (u0, v0) = a.direction_cosines();
        let (u1, v1) = back.direction_cosines();
        prop_assert!((u0 - u1).abs() < 1e-12 && (v0 - v1).abs() < 1e-12);
    }

    #[test]
    fn reflection_is_passive(i in angle(), o in angle(), q in 0.0..8.0f64, g in 0.0..=1.0f64, psi in -10.0..10.0f64) {
        let m = CellModel::new(q, 50.0, g).unwrap();
        prop_assert!(reflection_coefficient(&m, psi, i, o).norm() / m.gc <= 1.0 + 1e-15);
    }

    #[test]
    fn steering_inverse_pair(
        a0 in -5e-6..5e-6f64, b0 in -5e-6..5e-6f64, inc in angle(), k in 1usize..=256,
        x in -0.25..0.25f64, y in -0.25..0.25f64,
    ) {
        let plan = plan();
        let s = Steering { a0, b0, f_ref: plan.center_frequency() };
        let f = plan.frequency(k).unwrap();
        if let SteeredDirection::Propagating(t0) = s.direction(inc, &plan, k).unwrap() {
            let direct = beamsteer_phase(x, y, f, &s);
            let via_angle = pointing_phase(x, y, inc, t0, plan.wavelength());
            prop_assert!((direct - via_angle).abs() < 1e-9 * (1.0 + direct.abs()), "{direct} vs {via_angle}");
        }
    }

    #[test]
    fn focal_distance_monotone(d_m in 0.5..50.0f64, k in 2usize..256) {
        let plan = plan();
        let a_f = focus_coefficient(d_m, &plan).unwrap();
        let a = focal_distance(a_f, &plan, k).unwrap().meters().unwrap();
        let b = focal_distance(a_f, &plan, k + 1).unwrap().meters().unwrap();
        prop_assert!(b < a);
        let top = focal_distance(a_f, &plan, 256).unwrap().meters().unwrap();
        prop_assert!((top / d_m - 1.0).abs() < 1e-9);
    }

    #[test]
    fn focus_phase_tends_to_steering(x in -0.5..0.5f64, y in -0.5..0.5f64, d in 1.0..1e3f64) {
        let lambda = plan().wavelength();
        let inc = Angle2D::in_plane(0.3);
        let t0 = Angle2D::in_plane(-0.6);
        let base = pointing_phase(x, y, inc, t0, lambda);
        let near = focus_phase(x, y, inc, t0, FocalDistance::Finite(d), lambda) - base;
        let far = focus_phase(x, y, inc, t0, FocalDistance::Finite(10.0 * d), lambda) - base;
        let quad = PI * (x * x + y * y) / (lambda * d);
        prop_assert!((near - quad).abs() < 1e-9 * (1.0 + quad));
        prop_assert!(far.abs() <= near.abs() / 10.0 + 1e-12);
    }

    #[test]
    fn diffuse_reciprocity(a in angle(), b in angle()) {
        let m = WallMaterial::AERATED_CONCRETE;
        prop_assert_eq!(diffuse_amplitude(a, b, &m, 3.1), diffuse_amplitude(b, a, &m, 3.1));
    }

    #[test]
    fn wall_energy_bound(a in angle(), b in angle(), n in 0usize..10, m in 0usize..10, psi0 in -4.0..4.0f64) {
        let lambda = plan().wavelength();
        let grid = SurfaceGrid::new(10, 10, lambda / 2.0, lambda / 2.0).unwrap();
        let mat = WallMaterial::AERATED_CONCRETE;
        let gs = scattering_gain(&grid, lambda);
        let r = wall_cell_reflection(n, m, a, b, &mat, &grid, lambda, psi0);
        let bound = fresnel_te(a.theta, &mat).norm() * mat.r() + mat.s();
        prop_assert!(r.norm_sqr() / gs <= bound * bound * (1.0 + 1e-12));
    }

    #[test]
    fn single_cell_degeneration(
        bx in -20.0..20.0f64, bz in 1.0..20.0f64, rx in -10.0..10.0f64, rz in 0.5..10.0f64, psi in -3.0..3.0f64,
    ) {
        let plan = plan();
        let lambda = plan.wavelength();
        let grid = SurfaceGrid::new(1, 1, lambda / 2.0, lambda / 2.0).unwrap();
        let mp = Metaprism::lossless(grid, &plan, PhaseProfile::Specular { phase: psi }).unwrap();
        let link = Link::new(Position::new(bx, 0.0, bz), Position::new(rx, 0.3, rz), 10.0, 1.585)
            .with_modes(PropagationMode::Exact, PropagationMode::Exact);
        let all = composite_channel_all(&mp, &link, &plan).unwrap();
        let cell = mp.grid.cell(0, 0);
        let d1 = link.bs.distance(&cell);
        let d2 = link.rx.distance(&cell);
        let amp = mp.cell.gc
            * (mp.cell.pattern(link.incident_angle().unwrap()) * mp.cell.pattern(link.observed_angle().unwrap())).sqrt()
            * (10.0f64 * 1.585).sqrt() * lambda * lambda / (16.0 * PI * PI * d1 * d2);
        for k in [1usize, 64, 129, 256] {
            let f = plan.frequency(k).unwrap();
            let phase = psi - 2.0 * PI * f / 299_792_458.0 * (d1 + d2);
            let oracle = metaprism_core::Complex64::from_polar(amp, phase);
            prop_assert!((all[k - 1] - oracle).norm() < 1e-9 * amp);
        }
    }
}

fn scan_argmax(m: &SnrMatrix, users_free: &[bool], carriers_free: &[bool]) -> Option<(usize, usize, f64)> {
    let mut best = None::<(usize, usize, f64)>;
    for k in 0..m.subcarriers() {
        for u in 0..m.users() {
            if !users_free[u] || !carriers_free[k] {
                continue;
            }
            let v = m.get(u, k);
            let better = match best {
                None => true,
                Some((bu, bk, bv)) => v > bv || (v == bv && (u < bu || (u == bu && k < bk))),
            };
            if better {
                best = Some((u, k, v));
            }
        }
    }
    best
}

fn snr_matrix() -> impl Strategy<Value = SnrMatrix> {
    (1usize..=16, 0usize..=48).prop_flat_map(|(u, extra)| {
        let k = u + extra;
        proptest::collection::vec(1e-3..1e6f64, u * k).prop_map(move |d| SnrMatrix::new(u, k, d).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn consistent_mode_equalizes_snr(m in snr_matrix()) {
        let p = assign_subcarriers(&m, AssignmentMode::AmplitudeConsistent).unwrap();
        let snrs: Vec<f64> = (0..m.users()).map(|u| p.user_snr(&m, u)).collect();
        let first = snrs[0];
        for s in &snrs {
            prop_assert!((s / first - 1.0).abs() < 1e-9);
        }
        let energy: f64 = p.weights.iter().map(|w| w * w).sum();
        prop_assert!((energy - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn greedy_matches_rescan(m in snr_matrix(), literal in any::<bool>()) {
        let mode = if literal { AssignmentMode::Literal } else { AssignmentMode::AmplitudeConsistent };
        let p = assign_subcarriers(&m, mode).unwrap();
        let mut users_free = vec![true; m.users()];
        let mut carriers_free = vec![true; m.subcarriers()];
        for step in &p.steps {
            let (u, k, v) = scan_argmax(&m, &users_free, &carriers_free).unwrap();
            prop_assert_eq!((step.user, step.subcarrier, step.snr), (u, k, v));
            users_free[u] = false;
            carriers_free[k] = false;
        }
        if literal {
            prop_assert!((p.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn assignment_is_injective(m in snr_matrix()) {
        let p = assign_subcarriers(&m, AssignmentMode::AmplitudeConsistent).unwrap();
        let mut used = vec![false; m.subcarriers()];
        for a in p.assignment.iter() {
            let k = a.unwrap();
            prop_assert!(!used[k]);
            used[k] = true;
            prop_assert!(p.weights[k] > 0.0);
        }
        for (k, w) in p.weights.iter().enumerate() {
            if !used[k] {
                prop_assert_eq!(*w, 0.0);
            }
        }
    }

    #[test]
    fn assignment_scale_invariant(m in snr_matrix(), scale in 1e-6..1e6f64) {
        let a = assign_subcarriers(&m, AssignmentMode::AmplitudeConsistent).unwrap();
        let b = assign_subcarriers(&m.scaled(scale).unwrap(), AssignmentMode::AmplitudeConsistent).unwrap();
        prop_assert_eq!(&a.assignment, &b.assignment);
        for (x, y) in a.weights.iter().zip(&b.weights) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn array_factor_peak_tracks_steered_direction() {
    let lambda = 299_792_458.0 / 28e9;
    let plan = OfdmPlan::new(28e9, 1e6 / lambda, 256).unwrap();
    let grid = SurfaceGrid::new(50, 50, lambda / 2.0, lambda / 2.0).unwrap();
    let inc = Angle2D::in_plane(45f64.to_radians());
    let s = Steering::beamsteer(inc, 40f64.to_radians(), &plan).unwrap();
    for k in (1..=256).step_by(15) {
        let t0 = s.direction(inc, &plan, k).unwrap().angle().unwrap();
        if t0.theta.abs() > 80f64.to_radians() {
            continue;
        }
        let (best, _) = (0..=1800)
            .map(|i| -90.0 + 0.1 * i as f64)
            .map(|deg| (deg, array_factor(&grid, t0, Angle2D::in_plane(deg.to_radians()), lambda).norm()))
            .fold((0.0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        assert!((best - t0.theta_deg()).abs() <= 0.1, "k={k}: {best} vs {}", t0.theta_deg());
    }
}

#[test]
fn reciprocity_holds_for_wall_and_mirror() {
    let plan = plan();
    let lambda = plan.wavelength();
    let grid = SurfaceGrid::square(0.1, lambda / 2.0).unwrap();
    let a = Position::new(2.0, 0.0, 3.0);
    let b = Position::new(-1.0, 0.5, 2.0);
    let link = Link::new(a, b, 10.0, 1.585).with_modes(PropagationMode::Exact, PropagationMode::Exact);
    let mp = Metaprism::lossless(grid, &plan, PhaseProfile::MIRROR).unwrap();
    for k in [1, 128, 256] {
        let f = composite_channel(&mp, &link, &plan, k).unwrap().value.norm();
        let r = composite_channel(&mp, &link.reversed(), &plan, k).unwrap().value.norm();
        assert!((f / r - 1.0).abs() < 1e-12);
    }
}

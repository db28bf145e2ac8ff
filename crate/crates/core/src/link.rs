//! Noise, SNR, achievable rate and greedy equal-rate subcarrier assignment.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use crate::geometry::OfdmPlan;
use crate::{Error, Result};

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Default noise temperature, K.
pub const T0: f64 = 290.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

/// Thermal noise power in one subcarrier, `kB·T0·Δf·NF`, watts.
pub fn noise_variance(plan: &OfdmPlan, noise_figure_db: f64, t0: f64) -> Result<f64> {
    if !(t0 > 0.0) {
        return Err(Error::Domain("noise temperature must be positive"));
    }
    Ok(BOLTZMANN * t0 * plan.spacing() * db_to_linear(noise_figure_db))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Total transmit power, watts.
    pub ptx: f64,
    pub noise_figure_db: f64,
    pub t0: f64,
    /// Per-subcarrier noise variance, watts.
    pub sigma_n2: f64,
}

impl LinkBudget {
    pub fn new(ptx: f64, noise_figure_db: f64, t0: f64, plan: &OfdmPlan) -> Result<Self> {
        if !(ptx > 0.0 && ptx.is_finite()) {
            return Err(Error::Domain("transmit power must be positive"));
        }
        let sigma_n2 = noise_variance(plan, noise_figure_db, t0)?;
        Ok(LinkBudget { ptx, noise_figure_db, t0, sigma_n2 })
    }

    /// `Ptx·|c|²/σ²` at unit weight.
    pub fn snr(&self, c: Complex64) -> f64 {
        snr(c, 1.0, self)
    }
}

/// `Ptx·|c·ω|²/σ²`.
pub fn snr(c: Complex64, omega: f64, budget: &LinkBudget) -> f64 {
    budget.ptx * (c * omega).norm_sqr() / budget.sigma_n2
}

/// `log2(1 + SNR)`, bit/s/Hz.
pub fn achievable_rate(snr: f64) -> f64 {
    (1.0 + snr.max(0.0)).log2()
}

/// Unit-weight SNR of every user on every subcarrier, row-major by user.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrMatrix {
    users: usize,
    subcarriers: usize,
    data: Vec<f64>,
}

impl SnrMatrix {
    pub fn new(users: usize, subcarriers: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != users * subcarriers {
            return Err(Error::Domain("SNR matrix size does not match users x subcarriers"));
        }
        if data.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain("SNR entries must be finite and non-negative"));
        }
        Ok(SnrMatrix { users, subcarriers, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let subcarriers = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != subcarriers) {
            return Err(Error::Domain("ragged SNR matrix"));
        }
        SnrMatrix::new(rows.len(), subcarriers, rows.concat())
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    /// Entry for 0-based user `u` and subcarrier `k`.
    pub fn get(&self, u: usize, k: usize) -> f64 {
        self.data[u * self.subcarriers + k]
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.data[u * self.subcarriers..(u + 1) * self.subcarriers]
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        SnrMatrix::new(self.users, self.subcarriers, self.data.iter().map(|v| v * factor).collect())
    }
}

/// Weight rule applied after each greedy pick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssignmentMode {
    /// `ω = refsnr/msnr`, normalized so `Σω = 1`.
    Literal,
    /// `ω = √(refsnr/msnr)`, normalized so `Σω² = 1`; equalizes the
    /// weighted SNR of all covered users.
    #[default]
    AmplitudeConsistent,
}

/// One greedy pick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssignmentStep {
    pub user: usize,
    pub subcarrier: usize,
    pub snr: f64,
}

/// Subcarrier per user (0-based) and weight per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentPlan {
    pub assignment: Vec<Option<usize>>,
    /// One entry per subcarrier; zero where unassigned.
    pub weights: Vec<f64>,
    /// Users left without a subcarrier because every remaining SNR was zero.
    pub uncovered: Vec<bool>,
    pub steps: Vec<AssignmentStep>,
    pub mode: AssignmentMode,
}

impl AssignmentPlan {
    /// SNR of user `u` after weighting.
    pub fn user_snr(&self, matrix: &SnrMatrix, u: usize) -> f64 {
        match self.assignment[u] {
            Some(k) => matrix.get(u, k) * self.weights[k] * self.weights[k],
            None => 0.0,
        }
    }

    pub fn user_rate(&self, matrix: &SnrMatrix, u: usize) -> f64 {
        achievable_rate(self.user_snr(matrix, u))
    }

    pub fn uncovered_count(&self) -> usize {
        self.uncovered.iter().filter(|u| **u).count()
    }
}

/// Greedy assignment: repeatedly take the largest remaining SNR, bind its
/// user and subcarrier, and weight the subcarrier against the first pick.
/// Ties go to the lowest user, then the lowest subcarrier.
pub fn assign_subcarriers(matrix: &SnrMatrix, mode: AssignmentMode) -> Result<AssignmentPlan> {
    let users = matrix.users();
    let subcarriers = matrix.subcarriers();
    if users > subcarriers {
        return Err(Error::Capacity { users, subcarriers });
    }
    let mut user_free = vec![true; users];
    let mut carrier_free = vec![true; subcarriers];
    let mut assignment = vec![None; users];
    let mut weights = vec![0.0; subcarriers];
    let mut steps = Vec::with_capacity(users);
    let mut reference = 0.0;

    for _ in 0..users {
        let mut best: Option<(usize, usize, f64)> = None;
        for u in (0..users).filter(|u| user_free[*u]) {
            for k in (0..subcarriers).filter(|k| carrier_free[*k]) {
                let v = matrix.get(u, k);
                if best.is_none_or(|b| v > b.2) {
                    best = Some((u, k, v));
                }
            }
        }
        let Some((u, k, msnr)) = best else { break };
        if msnr <= 0.0 {
            break;
        }
        if steps.is_empty() {
            reference = msnr;
        }
        user_free[u] = false;
        carrier_free[k] = false;
        assignment[u] = Some(k);
        weights[k] = match mode {
            AssignmentMode::Literal => reference / msnr,
            AssignmentMode::AmplitudeConsistent => (reference / msnr).sqrt(),
        };
        steps.push(AssignmentStep { user: u, subcarrier: k, snr: msnr });
    }
    if users > 0 && steps.is_empty() {
        return Err(Error::DegenerateAssignment);
    }

    let norm = match mode {
        AssignmentMode::Literal => weights.iter().sum::<f64>(),
        AssignmentMode::AmplitudeConsistent => weights.iter().map(|w| w * w).sum::<f64>().sqrt(),
    };
    if norm > 0.0 {
        weights.iter_mut().for_each(|w| *w /= norm);
    }
    let uncovered = assignment.iter().map(|a| a.is_none()).collect::<Vec<_>>();
    if uncovered.iter().any(|u| *u) {
        log::debug!("{} of {users} users have zero SNR on every free subcarrier", uncovered.iter().filter(|u| **u).count());
    }
    Ok(AssignmentPlan { assignment, weights, uncovered, steps, mode })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan() -> OfdmPlan {
        OfdmPlan::new(28e9, 100e6, 256).unwrap()
    }

    #[test]
    fn noise_examples() {
        let n = noise_variance(&plan(), 3.0, 290.0).unwrap();
        assert!((watts_to_dbm(n) + 115.1).abs() < 0.05, "{}", watts_to_dbm(n));
        let hz = OfdmPlan::new(28e9, 1.0, 1).unwrap();
        let floor = watts_to_dbm(noise_variance(&hz, 0.0, 290.0).unwrap());
        assert!((floor + 174.0).abs() < 0.05);
        let wide = OfdmPlan::new(28e9, 200e6, 256).unwrap();
        let d = watts_to_dbm(noise_variance(&wide, 3.0, 290.0).unwrap()) - watts_to_dbm(n);
        assert!((d - 3.0103).abs() < 1e-3);
    }

    #[test]
    fn snr_and_rate_examples() {
        let b = LinkBudget::new(0.1, 3.0, 290.0, &plan()).unwrap();
        let c = Complex64::new((b.sigma_n2 / b.ptx).sqrt(), 0.0);
        assert!((snr(c, 1.0, &b) - 1.0).abs() < 1e-12);
        assert_eq!(snr(c, 0.0, &b), 0.0);
        assert!((snr(c, 0.5, &b) - 0.25).abs() < 1e-12);
        assert_eq!(achievable_rate(0.0), 0.0);
        assert_eq!(achievable_rate(1.0), 1.0);
        assert_eq!(achievable_rate(15.0), 4.0);
    }

    #[test]
    fn hand_traced_literal() {
        let m = SnrMatrix::from_rows(&[vec![4.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let p = assign_subcarriers(&m, AssignmentMode::Literal).unwrap();
        assert_eq!(p.assignment, vec![Some(0), Some(1)]);
        assert!((p.weights[0] - 3.0 / 7.0).abs() < 1e-15);
        assert!((p.weights[1] - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn hand_traced_consistent() {
        let m = SnrMatrix::from_rows(&[vec![4.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let p = assign_subcarriers(&m, AssignmentMode::AmplitudeConsistent).unwrap();
        assert_eq!(p.assignment, vec![Some(0), Some(1)]);
        assert!((p.weights[0] - (3.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert!((p.weights[1] - (4.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert!((p.weights[0] - 0.6547).abs() < 1e-4 && (p.weights[1] - 0.7559).abs() < 1e-4);
        assert!((p.user_snr(&m, 0) - 12.0 / 7.0).abs() < 1e-12);
        assert!((p.user_snr(&m, 1) - 12.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn single_user_takes_global_max() {
        let m = SnrMatrix::from_rows(&[vec![0.5, 9.0, 2.0]]).unwrap();
        let p = assign_subcarriers(&m, AssignmentMode::AmplitudeConsistent).unwrap();
        assert_eq!(p.assignment, vec![Some(1)]);
        assert_eq!(p.weights, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn ties_break_low() {
        let m = SnrMatrix::from_rows(&[vec![1.0, 5.0, 5.0], vec![5.0, 5.0, 1.0]]).unwrap();
        let p = assign_subcarriers(&m, AssignmentMode::Literal).unwrap();
        assert_eq!(p.steps[0].user, 0);
        assert_eq!(p.steps[0].subcarrier, 1);
        assert_eq!(p.assignment, vec![Some(1), Some(0)]);
    }

    #[test]
    fn errors_and_uncovered() {
        let m = SnrMatrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(
            assign_subcarriers(&m, AssignmentMode::Literal),
            Err(Error::Capacity { users: 2, subcarriers: 1 })
        );
        let z = SnrMatrix::from_rows(&[vec![0.0, 0.0]]).unwrap();
        assert_eq!(assign_subcarriers(&z, AssignmentMode::Literal), Err(Error::DegenerateAssignment));
        let shadow = SnrMatrix::from_rows(&[vec![3.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let p = assign_subcarriers(&shadow, AssignmentMode::AmplitudeConsistent).unwrap();
        assert_eq!(p.uncovered, vec![false, true]);
        assert_eq!(p.weights, vec![1.0, 0.0]);
        assert!(SnrMatrix::new(1, 2, vec![1.0, -1.0]).is_err());
        let empty = SnrMatrix::new(0, 4, vec![]).unwrap();
        assert!(assign_subcarriers(&empty, AssignmentMode::Literal).unwrap().steps.is_empty());
    }
}

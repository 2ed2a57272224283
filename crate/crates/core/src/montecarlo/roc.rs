use serde::{Deserialize, Serialize};

use super::{generate_trial, statistic, trial_rng, McSetup, TrialBatch};
use crate::detectors::{self, DetectorKind, Hypothesis};
use crate::error::{IsacError, Result};
use crate::parallel::try_map_indexed;

pub const MIN_TRIALS: usize = 100;

/// Z-scores use `se + Z_FLOOR`, so `|z| ≤ 4` means
/// `|p̂ - p| ≤ 4 se + 1e-4`.
pub const Z_FLOOR: f64 = 2.5e-5;
pub const Z_FLAG: f64 = 4.0;

/// Statistics of `batch` under `hypothesis`, sorted ascending.
pub fn simulate_statistics(batch: &TrialBatch, setup: &McSetup, hypothesis: Hypothesis) -> Result<Vec<f64>> {
    let mut stats = try_map_indexed(setup.exec, batch.n_trials, |i| {
        let mut rng = trial_rng(batch.seed, i as u64, hypothesis);
        let tr = generate_trial(&mut rng, &setup.model, &setup.link, &setup.split, setup.phase, hypothesis);
        statistic(batch.kind, &tr, setup, hypothesis)
    })?;
    if stats.iter().any(|x| x.is_nan()) {
        return Err(IsacError::numeric("simulate_statistics", "statistic evaluated to NaN"));
    }
    stats.sort_by(f64::total_cmp);
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRoc {
    pub kappa_grid: Vec<f64>,
    pub n_trials: usize,
    pub pfa_hat: Vec<f64>,
    pub pfa_se: Vec<f64>,
    pub pd_hat: Vec<f64>,
    pub pd_se: Vec<f64>,
}

fn exceedance(sorted: &[f64], kappa: f64) -> f64 {
    let below = sorted.partition_point(|&x| x < kappa);
    (sorted.len() - below) as f64 / sorted.len() as f64
}

fn std_error(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Fraction of trials with statistic `≥ κ`, for each `κ` and hypothesis.
pub fn empirical_roc(batch: &TrialBatch, setup: &McSetup, kappa_grid: &[f64]) -> Result<EmpiricalRoc> {
    if batch.n_trials < MIN_TRIALS {
        return Err(IsacError::domain(
            "empirical_roc",
            format!("n_trials must be >= {MIN_TRIALS}, got {}", batch.n_trials),
        ));
    }
    let h0 = simulate_statistics(batch, setup, Hypothesis::H0)?;
    let h1 = simulate_statistics(batch, setup, Hypothesis::H1)?;
    let n = batch.n_trials;
    let pfa_hat: Vec<f64> = kappa_grid.iter().map(|&k| exceedance(&h0, k)).collect();
    let pd_hat: Vec<f64> = kappa_grid.iter().map(|&k| exceedance(&h1, k)).collect();
    Ok(EmpiricalRoc {
        kappa_grid: kappa_grid.to_vec(),
        n_trials: n,
        pfa_se: pfa_hat.iter().map(|&p| std_error(p, n)).collect(),
        pd_se: pd_hat.iter().map(|&p| std_error(p, n)).collect(),
        pfa_hat,
        pd_hat,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub kappa: f64,
    pub pfa_theory: f64,
    pub pfa_hat: f64,
    pub pfa_z: f64,
    pub pd_theory: f64,
    pub pd_hat: f64,
    pub pd_z: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub kind: DetectorKind,
    pub n_trials: usize,
    pub seed: u64,
    /// The theory PD is a lower bound; only shortfalls below it are flagged.
    pub pd_is_lower_bound: bool,
    pub max_abs_dev_pfa: f64,
    pub max_abs_dev_pd: f64,
    pub max_abs_z: f64,
    /// Mean of `p̂_D - PD_theory` over the grid.
    pub mean_pd_gap: f64,
    pub n_flagged: usize,
    pub points: Vec<ValidationPoint>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.n_flagged == 0
    }
}

fn z_score(hat: f64, theory: f64, n: usize) -> f64 {
    (hat - theory) / (std_error(hat, n) + Z_FLOOR)
}

/// Compares [`empirical_roc`] against the closed forms, flagging points
/// with `|z| > 4`.
pub fn validate(kind: DetectorKind, setup: &McSetup, kappa_grid: &[f64], n_trials: usize, seed: u64) -> Result<ValidationReport> {
    let batch = TrialBatch { n_trials, seed, kind };
    let emp = empirical_roc(&batch, setup, kappa_grid)?;
    let base = setup.sensing_params(0.0)?;
    let theory = detectors::roc_curve_with(kind, &base, kappa_grid, setup.exec)?;
    let lower_bound = kind == DetectorKind::InterferedUnknownH;
    let mut points = Vec::with_capacity(kappa_grid.len());
    let (mut dev_fa, mut dev_d, mut max_z, mut gap) = (0.0f64, 0.0f64, 0.0f64, 0.0);
    for (i, op) in theory.iter().enumerate() {
        let pfa_z = z_score(emp.pfa_hat[i], op.pfa, n_trials);
        let pd_z = z_score(emp.pd_hat[i], op.pd, n_trials);
        let pd_bad = if lower_bound { pd_z < -Z_FLAG } else { pd_z.abs() > Z_FLAG };
        let flagged = pfa_z.abs() > Z_FLAG || pd_bad;
        dev_fa = dev_fa.max((emp.pfa_hat[i] - op.pfa).abs());
        dev_d = dev_d.max((emp.pd_hat[i] - op.pd).abs());
        max_z = max_z.max(pfa_z.abs()).max(if lower_bound { (-pd_z).max(0.0) } else { pd_z.abs() });
        gap += emp.pd_hat[i] - op.pd;
        points.push(ValidationPoint {
            kappa: op.kappa,
            pfa_theory: op.pfa,
            pfa_hat: emp.pfa_hat[i],
            pfa_z,
            pd_theory: op.pd,
            pd_hat: emp.pd_hat[i],
            pd_z,
            flagged,
        });
    }
    Ok(ValidationReport {
        kind,
        n_trials,
        seed,
        pd_is_lower_bound: lower_bound,
        max_abs_dev_pfa: dev_fa,
        max_abs_dev_pd: dev_d,
        max_abs_z: max_z,
        mean_pd_gap: gap / kappa_grid.len().max(1) as f64,
        n_flagged: points.iter().filter(|p| p.flagged).count(),
        points,
    })
}

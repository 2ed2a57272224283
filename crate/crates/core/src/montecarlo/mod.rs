//! Monte-Carlo oracle: draws waveforms and noise, evaluates each detector's
//! log-likelihood statistic directly, and estimates PFA/PD empirically.
//!
//! Trial `i` of a batch draws from `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `2i` (H0) or `2i + 1` (H1). Results therefore do not depend on
//! thread count or evaluation order.

mod roc;

pub use roc::{
    empirical_roc, simulate_statistics, validate, EmpiricalRoc, ValidationPoint, ValidationReport, MIN_TRIALS, Z_FLAG, Z_FLOOR,
};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::detectors::{estimate_xi, DetectorKind, H0Reading, Hypothesis, SensingParams};
use crate::error::{IsacError, Result};
use crate::parallel::Execution;
use crate::scenario::{LinkBudget, PowerSplit};
use crate::specfun::standard_complex_normal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensingWaveform {
    /// `e^{jφ_k}` with i.i.d. uniform phases, so `‖s_s‖² = T` exactly.
    UnitModulusRandomPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommWaveform {
    /// i.i.d. `CN(0, 1)` symbols.
    Gaussian,
    /// Gaussian draw projected orthogonal to `s_s` and rescaled to
    /// `‖s_c‖² = T`, so the composite waveform has `‖s‖² = T` exactly.
    OrthogonalConstantEnergy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformModel {
    pub sensing: SensingWaveform,
    pub comm: CommWaveform,
    pub t_symbols: u32,
}

impl WaveformModel {
    pub fn new(t_symbols: u32) -> Self {
        Self {
            sensing: SensingWaveform::UnitModulusRandomPhase,
            comm: CommWaveform::OrthogonalConstantEnergy,
            t_symbols,
        }
    }

    pub fn with_comm(mut self, comm: CommWaveform) -> Self {
        self.comm = comm;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ChannelPhase {
    #[default]
    Zero,
    Uniform,
}

/// Which `ξ̂` the unknown-channel interfered statistic uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UnknownHMode {
    /// Fixed `ξ̂` at the configured matched gain, with `|s_sᴴ r̃|²` replaced by
    /// its per-hypothesis mean. Reproduces the closed-form approximation.
    #[default]
    Bound,
    /// `ξ̂` from bisection on the stationarity equation, per trial.
    EstimatedXi,
    /// `ξ = |h_s| / |s_sᴴ r̃|`, the oracle scaling.
    TrueXi,
}

/// Everything a batch needs besides its seed and size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSetup {
    pub model: WaveformModel,
    pub link: LinkBudget,
    pub split: PowerSplit,
    pub phase: ChannelPhase,
    pub unknown_h: UnknownHMode,
    pub h0_reading: H0Reading,
    /// Matched gain `c` for [`UnknownHMode::Bound`].
    pub xi_gain: f64,
    #[serde(skip)]
    pub exec: Execution,
}

impl McSetup {
    pub fn new(t_symbols: u32, link: LinkBudget, split: PowerSplit) -> Self {
        Self {
            model: WaveformModel::new(t_symbols),
            link,
            split,
            phase: ChannelPhase::Zero,
            unknown_h: UnknownHMode::Bound,
            h0_reading: H0Reading::ThetaLimit,
            xi_gain: 1.0,
            exec: Execution::default(),
        }
    }

    /// Closed-form parameters for the same operating point.
    pub fn sensing_params(&self, kappa: f64) -> Result<SensingParams> {
        let snr = self.link.sensing_snr_total(self.model.t_symbols);
        Ok(SensingParams::new(snr, self.model.t_symbols, self.split.rho_c(), kappa)?
            .with_h0_reading(self.h0_reading)
            .with_xi_gain(self.xi_gain))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialBatch {
    pub n_trials: usize,
    pub seed: u64,
    pub kind: DetectorKind,
}

/// One realization at the sensing receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    /// Received vector after delay-Doppler compensation.
    pub r: Vec<Complex64>,
    pub s_s: Vec<Complex64>,
    pub s_c: Vec<Complex64>,
    pub h: Complex64,
}

impl Trial {
    /// `√ρ_s s_s + √ρ_c s_c`
    pub fn composite(&self, split: &PowerSplit) -> Vec<Complex64> {
        let (a, b) = (split.rho_s().sqrt(), split.rho_c().sqrt());
        self.s_s.iter().zip(&self.s_c).map(|(s, c)| s * a + c * b).collect()
    }
}

/// Random stream for trial `index` under `hypothesis`.
pub fn trial_rng(seed: u64, index: u64, hypothesis: Hypothesis) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lane = match hypothesis {
        Hypothesis::H0 => 0,
        Hypothesis::H1 => 1,
    };
    rng.set_stream(2 * index + lane);
    rng
}

fn sensing_waveform<R: Rng + ?Sized>(rng: &mut R, t: usize) -> Vec<Complex64> {
    (0..t)
        .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
        .collect()
}

fn comm_waveform<R: Rng + ?Sized>(rng: &mut R, model: &WaveformModel, s_s: &[Complex64]) -> Vec<Complex64> {
    let t = s_s.len();
    let mut g: Vec<Complex64> = (0..t).map(|_| standard_complex_normal(rng)).collect();
    if model.comm == CommWaveform::OrthogonalConstantEnergy && t > 1 {
        let s2: f64 = s_s.iter().map(|s| s.norm_sqr()).sum();
        let proj: Complex64 = s_s.iter().zip(&g).map(|(s, x)| s.conj() * x).sum::<Complex64>() / s2;
        for (x, s) in g.iter_mut().zip(s_s) {
            *x -= proj * s;
        }
        let norm2: f64 = g.iter().map(|x| x.norm_sqr()).sum();
        let k = (t as f64 / norm2).sqrt();
        for x in &mut g {
            *x *= k;
        }
    }
    g
}

/// Draws one received vector: noise only under H0, and under H1
/// `√(ρ_s P) h s_s + √(ρ_c P) h s_c + noise` with `|h|² = g_s`.
pub fn generate_trial<R: Rng + ?Sized>(
    rng: &mut R,
    model: &WaveformModel,
    link: &LinkBudget,
    split: &PowerSplit,
    phase: ChannelPhase,
    hypothesis: Hypothesis,
) -> Trial {
    let t = model.t_symbols as usize;
    let s_s = sensing_waveform(rng, t);
    let s_c = comm_waveform(rng, model, &s_s);
    let theta = match phase {
        ChannelPhase::Zero => 0.0,
        ChannelPhase::Uniform => rng.random::<f64>() * std::f64::consts::TAU,
    };
    let h = Complex64::from_polar(link.g_s.sqrt(), theta);
    let sigma = link.sigma_s2_w.sqrt();
    let mut r: Vec<Complex64> = (0..t).map(|_| standard_complex_normal(rng) * sigma).collect();
    if hypothesis == Hypothesis::H1 {
        let a = h * (split.rho_s() * link.p_total_w).sqrt();
        let b = h * (split.rho_c() * link.p_total_w).sqrt();
        for ((x, s), c) in r.iter_mut().zip(&s_s).zip(&s_c) {
            *x += a * s + b * c;
        }
    }
    Trial { r, s_s, s_c, h }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    // aᴴ b
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// `‖r‖²/σ² - ‖r - √(ρ_s P) ξ s_s s_sᴴ r‖² / D + T ln(σ² / D)` with
/// `D = ρ_c P ξ² m + σ²`, where `m` is either the observed `|s_sᴴ r|²`
/// or its de-randomized mean.
fn unknown_h_kernel(trial: &Trial, p_w: f64, split: &PowerSplit, sigma2: f64, xi: f64, m: f64) -> f64 {
    let t = trial.r.len() as f64;
    let proj = dot(&trial.s_s, &trial.r);
    let k = (split.rho_s() * p_w).sqrt() * xi * proj;
    let resid: f64 = trial.r.iter().zip(&trial.s_s).map(|(x, s)| (x - k * s).norm_sqr()).sum();
    let d = split.rho_c() * p_w * xi * xi * m + sigma2;
    norm2(&trial.r) / sigma2 - resid / d + t * (sigma2 / d).ln()
}

/// Log-likelihood statistic of `kind` on one trial.
///
/// `hypothesis` only matters for the [`UnknownHMode::Bound`] reading of the
/// unknown-channel interfered detector, whose de-randomized kernel differs
/// between hypotheses.
pub fn statistic(kind: DetectorKind, trial: &Trial, setup: &McSetup, hypothesis: Hypothesis) -> Result<f64> {
    const OP: &str = "statistic";
    let link = &setup.link;
    let split = &setup.split;
    let sigma2 = link.sigma_s2_w;
    let p = link.p_total_w;
    match kind {
        DetectorKind::CoherentKnownH => {
            let s = trial.composite(split);
            let cross = (trial.h * dot(&trial.r, &s)).re;
            Ok((2.0 * p.sqrt() * cross - p * trial.h.norm_sqr() * norm2(&s)) / sigma2)
        }
        DetectorKind::GlrtUnknownH => {
            let s = trial.composite(split);
            Ok(dot(&s, &trial.r).norm_sqr() / (sigma2 * norm2(&s)))
        }
        DetectorKind::EnergyEstimatedSc => Ok(norm2(&trial.r) / sigma2),
        DetectorKind::InterferedKnownH => {
            let zeta = split.rho_c() * p * trial.h.norm_sqr() / sigma2;
            if !(zeta > 0.0) {
                return Err(IsacError::singular(OP, "interfered statistic needs rho_c P |h|² > 0"));
            }
            let k = trial.h * ((split.rho_s() * p).sqrt() / zeta);
            let shifted: f64 = trial.r.iter().zip(&trial.s_s).map(|(x, s)| (x + k * s).norm_sqr()).sum();
            let t = trial.r.len() as f64;
            Ok(zeta / (sigma2 * (1.0 + zeta)) * shifted
                - split.rho_s() / split.rho_c() * norm2(&trial.s_s)
                - t * zeta.ln_1p())
        }
        DetectorKind::InterferedUnknownH => {
            let s2 = norm2(&trial.s_s);
            match setup.unknown_h {
                UnknownHMode::Bound => {
                    let sp = split.rho_s() * p;
                    if !(sp > 0.0) {
                        return Err(IsacError::singular(OP, "matched scaling needs rho_s P > 0"));
                    }
                    let xi = setup.xi_gain / (sp.sqrt() * s2);
                    let use_h1_mean = hypothesis == Hypothesis::H1 || setup.h0_reading == H0Reading::SharedKernel;
                    let theta = if use_h1_mean { sp * s2 * s2 * link.g_s } else { 0.0 };
                    Ok(unknown_h_kernel(trial, p, split, sigma2, xi, theta))
                }
                UnknownHMode::EstimatedXi => {
                    let xi = estimate_xi(&trial.r, &trial.s_s, p, split.rho_s(), split.rho_c(), sigma2)?;
                    let m = dot(&trial.s_s, &trial.r).norm_sqr();
                    Ok(unknown_h_kernel(trial, p, split, sigma2, xi, m))
                }
                UnknownHMode::TrueXi => {
                    let m = dot(&trial.s_s, &trial.r).norm_sqr();
                    let xi = if m > 0.0 { trial.h.norm() / m.sqrt() } else { 0.0 };
                    Ok(unknown_h_kernel(trial, p, split, sigma2, xi, m))
                }
            }
        }
    }
}

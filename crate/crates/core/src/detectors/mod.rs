//! Closed-form false-alarm and detection probabilities for the five sensing
//! scenarios, CFAR threshold inversion, and ROC sweeps.
//!
//! Everything here works in normalized units. The sufficient statistic is
//! `Λ = P T g_s / σ_s²` ([`SensingParams::snr_total`]). The per-symbol
//! communication SNR at the sensing receiver is `ζ = ρ_c Λ / T`. Thresholds
//! `κ` are in log-likelihood units.

mod assisted;
mod interfered;
mod unknown_h;

pub use assisted::{coherent_pd, coherent_pfa, energy_pd, energy_pfa, glrt_unknown_h_pd, glrt_unknown_h_pfa};
pub use interfered::{interfered_known_h_pd, interfered_known_h_pfa, known_h_noncentralities};
pub use unknown_h::{
    approx_coefficients, estimate_xi, interfered_unknown_h_pd, interfered_unknown_h_pd_two_chi2,
    interfered_unknown_h_pfa, two_chi2_exceedance, xi_residual, Approximation, ApproxCoefficients, H0Limit,
};

use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::parallel::{try_map_indexed, Execution};
use crate::specfun::{marcum_q_inv_b, q_inverse, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorKind {
    /// Communication waveform recovered, channel known: coherent LRT.
    CoherentKnownH,
    /// Communication waveform recovered, channel unknown: rank-one GLRT.
    GlrtUnknownH,
    /// Communication waveform estimated from the echo: energy detector.
    EnergyEstimatedSc,
    /// Communication signal treated as Gaussian interference, channel known.
    InterferedKnownH,
    /// Communication signal treated as Gaussian interference, channel unknown.
    InterferedUnknownH,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 5] = [
        DetectorKind::CoherentKnownH,
        DetectorKind::GlrtUnknownH,
        DetectorKind::EnergyEstimatedSc,
        DetectorKind::InterferedKnownH,
        DetectorKind::InterferedUnknownH,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DetectorKind::CoherentKnownH => "coherent-known-h",
            DetectorKind::GlrtUnknownH => "glrt-unknown-h",
            DetectorKind::EnergyEstimatedSc => "energy-estimated-sc",
            DetectorKind::InterferedKnownH => "interfered-known-h",
            DetectorKind::InterferedUnknownH => "interfered-unknown-h",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Whether the communication signal acts as interference at the SR.
    pub fn is_interfered(&self) -> bool {
        matches!(self, DetectorKind::InterferedKnownH | DetectorKind::InterferedUnknownH)
    }

    /// `(lo, hi)` of the default threshold sweep, in multiples of `λ`.
    pub fn sweep_range(&self) -> (f64, f64) {
        match self {
            DetectorKind::CoherentKnownH => (-2.5, 2.5),
            DetectorKind::GlrtUnknownH => (0.0, 5.0),
            DetectorKind::EnergyEstimatedSc => (10.0, 17.5),
            DetectorKind::InterferedKnownH | DetectorKind::InterferedUnknownH => (-0.25, 0.25),
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

/// How the unknown-channel interfered detector is evaluated under H0, where
/// the de-randomized matched-filter energy is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum H0Reading {
    /// Take the statistic's `ϑ → 0` limit: a scaled rank-one energy,
    /// giving `PFA = exp(-κ / (c (2 - c)))`.
    #[default]
    ThetaLimit,
    /// Reuse the H1 kernel `(α, β)` and evaluate the two-chi-square
    /// false-alarm sum with noise-only inputs.
    SharedKernel,
}

pub const DEFAULT_N_QUAD: usize = 1000;

/// Normalized inputs shared by every closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingParams {
    /// `Λ = P T g_s / σ_s²`
    pub snr_total: f64,
    pub t_symbols: u32,
    pub rho_c: f64,
    /// Log-threshold `κ`.
    pub kappa: f64,
    /// Chebyshev–Gauss order for the unknown-channel interfered PD.
    pub n_quad: usize,
    /// `c = √(ρ_s P) ξ̂ ‖s_s‖²`; 1 is the matched amplitude scaling.
    pub xi_gain: f64,
    pub h0_reading: H0Reading,
}

impl SensingParams {
    pub fn new(snr_total: f64, t_symbols: u32, rho_c: f64, kappa: f64) -> Result<Self> {
        let p = Self {
            snr_total,
            t_symbols,
            rho_c,
            kappa,
            n_quad: DEFAULT_N_QUAD,
            xi_gain: 1.0,
            h0_reading: H0Reading::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        const OP: &str = "SensingParams";
        if !(self.snr_total >= 0.0) || !self.snr_total.is_finite() {
            return Err(IsacError::domain(OP, format!("snr_total must be finite and >= 0, got {}", self.snr_total)));
        }
        if self.t_symbols < 1 {
            return Err(IsacError::domain(OP, "t_symbols must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.rho_c) {
            return Err(IsacError::domain(OP, format!("rho_c must lie in [0, 1], got {}", self.rho_c)));
        }
        if self.kappa.is_nan() {
            return Err(IsacError::domain(OP, "kappa is NaN"));
        }
        if self.n_quad < 1 {
            return Err(IsacError::domain(OP, "n_quad must be >= 1"));
        }
        if !self.xi_gain.is_finite() || self.xi_gain < 0.0 {
            return Err(IsacError::domain(OP, format!("xi_gain must be finite and >= 0, got {}", self.xi_gain)));
        }
        Ok(())
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_snr_total(mut self, snr_total: f64) -> Self {
        self.snr_total = snr_total;
        self
    }

    pub fn with_n_quad(mut self, n_quad: usize) -> Self {
        self.n_quad = n_quad;
        self
    }

    pub fn with_h0_reading(mut self, reading: H0Reading) -> Self {
        self.h0_reading = reading;
        self
    }

    pub fn with_xi_gain(mut self, c: f64) -> Self {
        self.xi_gain = c;
        self
    }

    pub fn rho_s(&self) -> f64 {
        1.0 - self.rho_c
    }

    /// `ζ = ρ_c P g_s / σ_s²`
    pub fn zeta(&self) -> f64 {
        self.rho_c * self.snr_total / self.t_symbols as f64
    }
}

/// Probabilities below this are reported as exactly zero.
pub const SATURATION_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub kappa: f64,
    pub pfa: f64,
    pub pd: f64,
    /// Set when either probability fell below [`SATURATION_FLOOR`].
    pub saturated: bool,
}

impl OperatingPoint {
    fn new(kappa: f64, pfa: f64, pd: f64) -> Self {
        let sat = |p: f64| if p < SATURATION_FLOOR { 0.0 } else { p };
        Self {
            kappa,
            pfa: sat(pfa),
            pd: sat(pd),
            saturated: pfa < SATURATION_FLOOR || pd < SATURATION_FLOOR,
        }
    }
}

/// False-alarm probability of `kind` at `params.kappa`.
pub fn pfa(kind: DetectorKind, params: &SensingParams) -> Result<f64> {
    params.validate()?;
    match kind {
        DetectorKind::CoherentKnownH => coherent_pfa(params),
        DetectorKind::GlrtUnknownH => glrt_unknown_h_pfa(params.kappa),
        DetectorKind::EnergyEstimatedSc => energy_pfa(params.t_symbols, params.kappa),
        DetectorKind::InterferedKnownH => interfered_known_h_pfa(params),
        DetectorKind::InterferedUnknownH => unknown_h::pfa_closed_form(params),
    }
}

/// Detection probability of `kind` at `params.kappa`.
pub fn pd(kind: DetectorKind, params: &SensingParams) -> Result<f64> {
    params.validate()?;
    match kind {
        DetectorKind::CoherentKnownH => coherent_pd(params),
        DetectorKind::GlrtUnknownH => glrt_unknown_h_pd(params),
        DetectorKind::EnergyEstimatedSc => energy_pd(params),
        DetectorKind::InterferedKnownH => interfered_known_h_pd(params),
        DetectorKind::InterferedUnknownH => unknown_h::pd_closed_form(params),
    }
}

pub fn operating_point(kind: DetectorKind, params: &SensingParams) -> Result<OperatingPoint> {
    Ok(OperatingPoint::new(params.kappa, pfa(kind, params)?, pd(kind, params)?))
}

fn threshold_tolerance() -> Tolerance {
    Tolerance {
        abs_tol: 1e-12,
        rel_tol: 1e-13,
        max_iter: 400,
    }
}

/// CFAR threshold: the `κ` at which `kind` has false-alarm rate `pfa_target`.
pub fn threshold_for_pfa(kind: DetectorKind, params: &SensingParams, pfa_target: f64) -> Result<f64> {
    const OP: &str = "threshold_for_pfa";
    params.validate()?;
    if !(pfa_target > 0.0 && pfa_target < 1.0) {
        return Err(IsacError::domain(OP, format!("pfa_target must lie in (0, 1), got {pfa_target}")));
    }
    let t = params.t_symbols;
    match kind {
        DetectorKind::CoherentKnownH => {
            let lam = params.snr_total;
            if lam <= 0.0 {
                return Err(IsacError::domain(OP, "coherent detector needs snr_total > 0"));
            }
            Ok((2.0 * lam).sqrt() * q_inverse(pfa_target)? - lam)
        }
        DetectorKind::GlrtUnknownH => Ok(-pfa_target.ln()),
        DetectorKind::EnergyEstimatedSc => {
            let b = marcum_q_inv_b(t, 0.0, pfa_target)?;
            Ok(0.5 * b * b)
        }
        DetectorKind::InterferedKnownH => {
            let (a0, _) = known_h_noncentralities(params)?;
            let b = marcum_q_inv_b(t, a0.sqrt(), pfa_target)?;
            let zeta = params.zeta();
            let tf = t as f64;
            Ok(0.5 * b * b * zeta / (1.0 + zeta) - tf * zeta.ln_1p() - params.rho_s() * tf / params.rho_c)
        }
        DetectorKind::InterferedUnknownH => match params.h0_reading {
            H0Reading::ThetaLimit => {
                let g = unknown_h::h0_limit(params.xi_gain).scale;
                if g <= 0.0 {
                    return Err(IsacError::singular(OP, "rank-one H0 gain c(2 - c) is not positive"));
                }
                Ok(-g * pfa_target.ln())
            }
            H0Reading::SharedKernel => bisect_kappa(|k| pfa(kind, &params.with_kappa(k)), pfa_target),
        },
    }
}

/// Bisection for `f(κ) = target` with `f` non-increasing.
fn bisect_kappa<F: Fn(f64) -> Result<f64>>(f: F, target: f64) -> Result<f64> {
    const OP: &str = "threshold_for_pfa";
    let tol = threshold_tolerance();
    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut n = 0;
    while f(lo)? < target {
        lo = 2.0 * lo - 1.0;
        n += 1;
        if n > 200 {
            return Err(IsacError::numeric(OP, "could not bracket from below"));
        }
    }
    while f(hi)? > target {
        hi = 2.0 * hi + 1.0;
        n += 1;
        if n > 400 {
            return Err(IsacError::numeric(OP, "could not bracket from above"));
        }
    }
    for _ in 0..tol.max_iter {
        if tol.converged(lo, hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Detection probability at the CFAR threshold for `pfa_target`.
pub fn pd_at_pfa(kind: DetectorKind, params: &SensingParams, pfa_target: f64) -> Result<f64> {
    let kappa = threshold_for_pfa(kind, params, pfa_target)?;
    pd(kind, &params.with_kappa(kappa))
}

/// `(PFA, PD)` at every `κ` of `kappa_grid`.
pub fn roc_curve(kind: DetectorKind, params: &SensingParams, kappa_grid: &[f64]) -> Result<Vec<OperatingPoint>> {
    roc_curve_with(kind, params, kappa_grid, Execution::default())
}

pub fn roc_curve_with(
    kind: DetectorKind,
    params: &SensingParams,
    kappa_grid: &[f64],
    exec: Execution,
) -> Result<Vec<OperatingPoint>> {
    if kappa_grid.is_empty() {
        return Err(IsacError::domain("roc_curve", "kappa grid is empty"));
    }
    try_map_indexed(exec, kappa_grid.len(), |i| operating_point(kind, &params.with_kappa(kappa_grid[i])))
}

pub const DEFAULT_GRID_POINTS: usize = 101;

/// `n` evenly spaced points over `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// The default sweep for `kind` with the given `λ`.
pub fn default_kappa_grid(kind: DetectorKind, lambda: f64, n_points: usize) -> Vec<f64> {
    let (lo, hi) = kind.sweep_range();
    linspace(lo * lambda, hi * lambda, n_points)
}

//! Communication-assisted sensing: the waveform is known (or estimated) at
//! the sensing receiver, so the whole transmit power illuminates the target.

use super::SensingParams;
use crate::error::{IsacError, Result};
use crate::specfun::marcum::marcum_q_unchecked;
use crate::specfun::normal::q_unchecked;
use crate::specfun::{clamp_probability, reg_upper_gamma};

const MARCUM_TOL: f64 = 1e-16;

fn need_positive_snr(op: &'static str, p: &SensingParams) -> Result<f64> {
    if p.snr_total > 0.0 {
        Ok(p.snr_total)
    } else {
        Err(IsacError::domain(op, "coherent statistic needs snr_total > 0"))
    }
}

fn need_nonneg_kappa(op: &'static str, kappa: f64) -> Result<()> {
    if kappa >= 0.0 {
        Ok(())
    } else {
        Err(IsacError::domain(op, format!("kappa must be >= 0, got {kappa}")))
    }
}

/// `Q((κ + Λ) / √(2Λ))`
pub fn coherent_pfa(p: &SensingParams) -> Result<f64> {
    let lam = need_positive_snr("coherent_pfa", p)?;
    clamp_probability("coherent_pfa", q_unchecked((p.kappa + lam) / (2.0 * lam).sqrt()))
}

/// `Q((κ - Λ) / √(2Λ))`
pub fn coherent_pd(p: &SensingParams) -> Result<f64> {
    let lam = need_positive_snr("coherent_pd", p)?;
    clamp_probability("coherent_pd", q_unchecked((p.kappa - lam) / (2.0 * lam).sqrt()))
}

/// `e^{-κ}`; does not depend on power.
pub fn glrt_unknown_h_pfa(kappa: f64) -> Result<f64> {
    need_nonneg_kappa("glrt_unknown_h_pfa", kappa)?;
    Ok((-kappa).exp())
}

/// `Q_1(√(2Λ), √(2κ))`
pub fn glrt_unknown_h_pd(p: &SensingParams) -> Result<f64> {
    need_nonneg_kappa("glrt_unknown_h_pd", p.kappa)?;
    let v = marcum_q_unchecked(1, (2.0 * p.snr_total).sqrt(), (2.0 * p.kappa).sqrt(), MARCUM_TOL);
    clamp_probability("glrt_unknown_h_pd", v)
}

/// `Q_T(0, √(2κ)) = 1 - P(T, κ)`
pub fn energy_pfa(t_symbols: u32, kappa: f64) -> Result<f64> {
    need_nonneg_kappa("energy_pfa", kappa)?;
    if t_symbols == 0 {
        return Err(IsacError::domain("energy_pfa", "t_symbols must be >= 1"));
    }
    if t_symbols == 1 {
        return Ok((-kappa).exp());
    }
    reg_upper_gamma(t_symbols as f64, kappa)
}

/// `Q_T(√(2Λ), √(2κ))`
pub fn energy_pd(p: &SensingParams) -> Result<f64> {
    need_nonneg_kappa("energy_pd", p.kappa)?;
    let v = marcum_q_unchecked(p.t_symbols, (2.0 * p.snr_total).sqrt(), (2.0 * p.kappa).sqrt(), MARCUM_TOL);
    clamp_probability("energy_pd", v)
}

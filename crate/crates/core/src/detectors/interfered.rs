//! Communication-interfered sensing with a known channel: the communication
//! signal is unknown at the SR and modelled as Gaussian interference.

use super::SensingParams;
use crate::error::{IsacError, Result};
use crate::specfun::clamp_probability;
use crate::specfun::marcum::marcum_q_unchecked;

const MARCUM_TOL: f64 = 1e-16;

/// Non-centrality parameters `(H0, H1)` of the 2T-degree chi-square that
/// drives the known-channel interfered statistic.
pub fn known_h_noncentralities(p: &SensingParams) -> Result<(f64, f64)> {
    let zeta = p.zeta();
    if !(p.rho_c > 0.0) || !(zeta > 0.0) {
        return Err(IsacError::singular(
            "interfered_known_h",
            format!("needs rho_c > 0 and snr_total > 0 (rho_c = {}, snr_total = {})", p.rho_c, p.snr_total),
        ));
    }
    let t = p.t_symbols as f64;
    let rho_s = p.rho_s();
    let h0 = 2.0 * rho_s * t / (p.rho_c * zeta);
    let h1 = 2.0 * t / (p.rho_c * zeta) * (p.rho_c * zeta * zeta + rho_s * (1.0 + zeta).powi(2));
    Ok((h0, h1))
}

/// Squared threshold of the chi-square form; negative means the threshold
/// is below the statistic's support.
fn threshold_radicand(p: &SensingParams) -> f64 {
    let zeta = p.zeta();
    let t = p.t_symbols as f64;
    2.0 * (1.0 + zeta) / zeta * (p.kappa + t * zeta.ln_1p() + p.rho_s() * t / p.rho_c)
}

fn exceedance(op: &'static str, p: &SensingParams, nc: f64) -> Result<f64> {
    let b2 = threshold_radicand(p);
    if b2 <= 0.0 {
        return Ok(1.0);
    }
    clamp_probability(op, marcum_q_unchecked(p.t_symbols, nc.sqrt(), b2.sqrt(), MARCUM_TOL))
}

pub fn interfered_known_h_pfa(p: &SensingParams) -> Result<f64> {
    let (h0, _) = known_h_noncentralities(p)?;
    exceedance("interfered_known_h_pfa", p, h0)
}

pub fn interfered_known_h_pd(p: &SensingParams) -> Result<f64> {
    let (_, h1) = known_h_noncentralities(p)?;
    exceedance("interfered_known_h_pd", p, h1)
}

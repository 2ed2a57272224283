//! Achievable rates at the communication user and their inversions.

use serde::{Deserialize, Serialize};

/// Whether the CU sees the sensing signal as interference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommMode {
    /// Sensing waveform known at the CU and cancelled before decoding.
    Free,
    /// Sensing waveform adds to the noise floor.
    Interfered,
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// `log2(1 + ρ_c P g_c / σ_c²)`.
pub fn rate_sensing_free(p_w: f64, rho_c: f64, g_c: f64, sigma_c2_w: f64) -> f64 {
    let sig = rho_c * p_w * g_c;
    if sig <= 0.0 {
        return 0.0;
    }
    log2_1p(sig / sigma_c2_w)
}

/// `log2(1 + ρ_c P g_c / (ρ_s P g_c + σ_c²))`.
pub fn rate_sensing_interfered(p_w: f64, rho_c: f64, g_c: f64, sigma_c2_w: f64) -> f64 {
    let sig = rho_c * p_w * g_c;
    if sig <= 0.0 {
        return 0.0;
    }
    let rho_s = 1.0 - rho_c;
    log2_1p(sig / (rho_s * p_w * g_c + sigma_c2_w))
}

pub fn rate(mode: CommMode, p_w: f64, rho_c: f64, g_c: f64, sigma_c2_w: f64) -> f64 {
    match mode {
        CommMode::Free => rate_sensing_free(p_w, rho_c, g_c, sigma_c2_w),
        CommMode::Interfered => rate_sensing_interfered(p_w, rho_c, g_c, sigma_c2_w),
    }
}

/// Communication power `ρ_c P` that meets `r_min` exactly, given the sensing
/// power `ρ_s P` already on air.
pub fn comm_power_for_rate(r_min: f64, mode: CommMode, rho_s_p_w: f64, g_c: f64, sigma_c2_w: f64) -> f64 {
    // 2^R - 1 through exp_m1 to keep small rates exact
    let snr = (r_min * std::f64::consts::LN_2).exp_m1();
    match mode {
        CommMode::Free => snr * sigma_c2_w / g_c,
        CommMode::Interfered => snr * (rho_s_p_w * g_c + sigma_c2_w) / g_c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_rate_examples() {
        assert_eq!(rate_sensing_free(1.0, 0.0, 1.0, 1.0), 0.0);
        assert!((rate_sensing_free(1.0, 1.0, 1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((rate_sensing_free(127.0, 1.0, 1.0, 1.0) - 7.0).abs() < 1e-14);
    }

    #[test]
    fn interfered_rate_examples() {
        assert_eq!(rate_sensing_interfered(3.0, 1.0, 2.0, 0.5), rate_sensing_free(3.0, 1.0, 2.0, 0.5));
        assert_eq!(rate_sensing_interfered(3.0, 0.0, 2.0, 0.5), 0.0);
        assert!((rate_sensing_interfered(1e12, 0.5, 1.0, 1.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inversion_round_trips() {
        assert_eq!(comm_power_for_rate(0.0, CommMode::Free, 0.0, 1.0, 1.0), 0.0);
        let pc = comm_power_for_rate(7.0, CommMode::Free, 0.0, 2e-11, 3e-15);
        let r = rate_sensing_free(pc, 1.0, 2e-11, 3e-15);
        assert!((r - 7.0).abs() < 1e-12 * 7.0);
        let a = comm_power_for_rate(3.0, CommMode::Interfered, 0.0, 2.0, 1.0);
        let b = comm_power_for_rate(3.0, CommMode::Free, 0.0, 2.0, 1.0);
        assert_eq!(a, b);
    }
}

//! Random draws used by the Monte-Carlo engine.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{IsacError, Result};

/// Circularly-symmetric complex Gaussian with `E|z|² = 1`.
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// One draw of `χ²_k(λ)`: `k` squared unit normals, the first with mean `√λ`.
pub fn noncentral_chi2_sample<R: Rng + ?Sized>(rng: &mut R, k: u32, lambda: f64) -> Result<f64> {
    if k == 0 {
        return Err(IsacError::domain("noncentral_chi2_sample", "degrees k must be >= 1"));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(IsacError::domain(
            "noncentral_chi2_sample",
            format!("noncentrality must be finite and >= 0, got {lambda}"),
        ));
    }
    let z0: f64 = rng.sample(StandardNormal);
    let first = z0 + lambda.sqrt();
    let mut acc = first * first;
    for _ in 1..k {
        let z: f64 = rng.sample(StandardNormal);
        acc += z * z;
    }
    Ok(acc)
}

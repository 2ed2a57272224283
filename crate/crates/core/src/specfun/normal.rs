//! Gaussian tail `Q(x)` and its inverse.

use super::gamma::incomplete_gamma_pq;
use crate::error::{IsacError, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Upper tail of the standard normal, `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(IsacError::domain("q_function", format!("x must be finite, got {x}")));
    }
    Ok(q_unchecked(x))
}

pub(crate) fn q_unchecked(x: f64) -> f64 {
    // Q(x) = Γ(1/2, x²/2) / 2 for x >= 0
    let upper = incomplete_gamma_pq(0.5, 0.5 * x * x).1;
    if x >= 0.0 {
        0.5 * upper
    } else {
        1.0 - 0.5 * upper
    }
}

fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

// Acklam's rational approximation of the normal quantile.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.02425;

fn tail_ratio(u: f64) -> f64 {
    let q = (-2.0 * u.ln()).sqrt();
    (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
        / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
}

/// Lower-tail normal quantile, rational seed only.
fn acklam(u: f64) -> f64 {
    if u < P_LOW {
        tail_ratio(u)
    } else if u <= 1.0 - P_LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail_ratio(1.0 - u)
    }
}

/// Inverse of [`q_function`] on `(0, 1)`.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(IsacError::domain("q_inverse", format!("p must lie in (0, 1), got {p}")));
    }
    // Q^{-1}(p) = -Φ^{-1}(p)
    let mut x = -acklam(p);
    for _ in 0..2 {
        let f = pdf(x);
        if f <= 0.0 {
            break;
        }
        x += (q_unchecked(x) - p) / f;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_at_zero_and_reflection() {
        assert!((q_function(0.0).unwrap() - 0.5).abs() < 1e-15);
        let s = q_function(1.7).unwrap() + q_function(-1.7).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn q_quantile_value() {
        assert!((q_function(2.326_347_874_0).unwrap() - 0.01).abs() < 1e-11);
    }

    #[test]
    fn q_rejects_non_finite() {
        assert!(q_function(f64::NAN).is_err());
        assert!(q_function(f64::INFINITY).is_err());
    }

    #[test]
    fn q_inverse_values() {
        assert!(q_inverse(0.5).unwrap().abs() < 1e-12);
        assert!((q_inverse(0.01).unwrap() - 2.326_347_874_0).abs() < 1e-9);
        assert!((q_inverse(0.6).unwrap() + 0.253_347_103_1).abs() < 1e-9);
        assert!(q_inverse(0.0).is_err());
        assert!(q_inverse(1.0).is_err());
    }
}

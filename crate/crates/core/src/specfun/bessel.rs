//! Modified Bessel function of the first kind, integer order.

use super::gamma::ln_gamma;
use crate::error::{IsacError, Result};

const RESCALE_AT: f64 = 1e200;

fn check(op: &'static str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 || x == f64::INFINITY {
        return Err(IsacError::domain(op, format!("x must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// Ascending series, rescaled on the fly so large `x` never overflows.
fn ln_series(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mf = m as f64;
    let mut scale_ln = mf * half.ln() - ln_gamma(mf + 1.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0f64;
    loop {
        k += 1.0;
        term *= q / (k * (k + mf));
        sum += term;
        if term > RESCALE_AT {
            scale_ln += term.ln();
            sum /= term;
            term = 1.0;
        }
        if k > half && term < sum * 1e-17 {
            break;
        }
    }
    scale_ln + sum.ln()
}

/// Hankel expansion for `x` large against `m²`.
fn ln_asymptotic(m: u32, x: f64) -> f64 {
    let mu = 4.0 * (m as f64) * (m as f64);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (kf * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln()
}

pub(crate) fn ln_bessel_i_unchecked(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if m == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let m2 = 2.0 * (m as f64) * (m as f64);
    if x > 50.0f64.max(m2) {
        ln_asymptotic(m, x)
    } else {
        ln_series(m, x)
    }
}

/// `ln I_m(x)`; finite for every finite `x > 0`.
pub fn ln_bessel_i(m: u32, x: f64) -> Result<f64> {
    check("ln_bessel_i", x)?;
    Ok(ln_bessel_i_unchecked(m, x))
}

/// `I_m(x)`.
pub fn bessel_i(m: u32, x: f64) -> Result<f64> {
    check("bessel_i", x)?;
    let v = ln_bessel_i_unchecked(m, x).exp();
    if v.is_infinite() {
        return Err(IsacError::numeric(
            "bessel_i",
            format!("I_{m}({x}) overflows; use ln_bessel_i or bessel_i_scaled"),
        ));
    }
    Ok(v)
}

/// `e^{-x} I_m(x)`.
pub fn bessel_i_scaled(m: u32, x: f64) -> Result<f64> {
    check("bessel_i_scaled", x)?;
    Ok((ln_bessel_i_unchecked(m, x) - x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_i(3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn i0_of_two() {
        assert!((bessel_i(0, 2.0).unwrap() - 2.279_585_302_3).abs() < 1e-10);
    }

    #[test]
    fn large_argument_stays_finite() {
        let v = bessel_i(0, 700.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(bessel_i_scaled(0, 1e5).unwrap() > 0.0);
    }

    #[test]
    fn branches_agree_at_the_switch() {
        for m in [0u32, 1, 3] {
            let a = ln_series(m, 60.0);
            let b = ln_asymptotic(m, 60.0);
            assert!((a - b).abs() < 1e-12, "m={m}: {a} vs {b}");
        }
    }

    #[test]
    fn recurrence_holds() {
        // I_{m-1}(x) - I_{m+1}(x) = (2m/x) I_m(x)
        let x = 7.3;
        for m in 1..6u32 {
            let l = bessel_i(m - 1, x).unwrap() - bessel_i(m + 1, x).unwrap();
            let r = 2.0 * m as f64 / x * bessel_i(m, x).unwrap();
            assert!((l - r).abs() < 1e-11 * r.abs());
        }
    }

    #[test]
    fn rejects_negative() {
        assert!(bessel_i(0, -1.0).is_err());
        assert!(ln_bessel_i(2, f64::NAN).is_err());
    }
}

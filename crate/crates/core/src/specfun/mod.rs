//! Special-function kernel shared by every analytic formula.
//!
//! Everything here is a pure function of its arguments; samplers take an
//! explicit random stream. No global state.

pub(crate) mod bessel;
pub(crate) mod gamma;
pub(crate) mod marcum;
pub(crate) mod normal;
pub(crate) mod quadrature;
mod sampling;

pub use bessel::{bessel_i, bessel_i_scaled, ln_bessel_i};
pub use gamma::{ln_gamma, ln_reg_lower_gamma, reg_lower_gamma, reg_upper_gamma};
pub use marcum::{marcum_q, marcum_q_inv_b, marcum_q_inv_b_with, marcum_q_with};
pub use normal::{q_function, q_inverse};
pub use quadrature::{chebyshev_gauss_nodes, integrate_adaptive};
pub use sampling::{noncentral_chi2_sample, standard_complex_normal};

use crate::error::{IsacError, Result};

/// Convergence controls for iterative kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_iter: 200,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || max_iter == 0 {
            return Err(IsacError::domain(
                "Tolerance::new",
                format!("abs_tol={abs_tol}, rel_tol={rel_tol}, max_iter={max_iter}"),
            ));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_iter,
        })
    }

    /// True once the bracket `[lo, hi]` is narrower than the tolerance.
    pub(crate) fn converged(&self, lo: f64, hi: f64) -> bool {
        (hi - lo).abs() <= self.abs_tol + self.rel_tol * hi.abs().max(lo.abs())
    }
}

/// Excursions this close to the unit interval are rounding and get clamped.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// Clamps a computed probability into `[0, 1]` when it overshoots by at most
/// [`PROBABILITY_SLACK`]; larger excursions are reported as numeric failures.
pub fn clamp_probability(op: &'static str, p: f64) -> Result<f64> {
    if p.is_nan() {
        return Err(IsacError::numeric(op, "probability evaluated to NaN"));
    }
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(IsacError::numeric(
            op,
            format!("probability {p:e} outside [0, 1]"),
        ));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_rejects_bad_fields() {
        assert!(Tolerance::new(0.0, 1e-8, 10).is_err());
        assert!(Tolerance::new(1e-10, -1.0, 10).is_err());
        assert!(Tolerance::new(1e-10, 1e-8, 0).is_err());
        assert_eq!(Tolerance::default().max_iter, 200);
    }

    #[test]
    fn clamp_only_absorbs_rounding() {
        assert_eq!(clamp_probability("t", 1.0 + 5e-13).unwrap(), 1.0);
        assert_eq!(clamp_probability("t", -5e-13).unwrap(), 0.0);
        assert!(clamp_probability("t", 1.0 + 1e-9).is_err());
        assert!(clamp_probability("t", f64::NAN).is_err());
    }

    #[test]
    fn log_add_matches_direct_sum() {
        let v = log_add(2.0f64.ln(), 3.0f64.ln());
        assert!((v.exp() - 5.0).abs() < 1e-12);
        assert_eq!(log_add(f64::NEG_INFINITY, 1.5), 1.5);
    }
}

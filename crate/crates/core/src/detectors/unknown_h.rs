//! Communication-interfered sensing with an unknown channel.
//!
//! The GLRT replaces `h_s` by `ξ̂ s_sᴴ r̃`. Replacing the random matched-filter
//! energy `|s_sᴴ r̃|²` by its mean `ϑ` turns the statistic into
//! `X + β Y` against a threshold `α`. Here `X` is a `2(T-1)`-degree
//! chi-square and `Y` a 2-degree chi-square. Everything below is expressed
//! through two dimensionless numbers:
//!
//! * `c = √(ρ_s P) ξ̂ ‖s_s‖²`: matched gain of the amplitude scaling,
//! * `ε = ρ_c P ξ̂² ϑ / σ_s²`: the interference-to-noise ratio seen by the
//!   kernel. Under H1 it equals `c² ζ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{H0Reading, Hypothesis, SensingParams};
use crate::error::{IsacError, Result};
use crate::specfun::bessel::ln_bessel_i_unchecked;
use crate::specfun::gamma::incomplete_gamma_pq;
use crate::specfun::marcum::marcum_q_unchecked;
use crate::specfun::{
    chebyshev_gauss_nodes, clamp_probability, integrate_adaptive, ln_reg_lower_gamma, log_add, Tolerance,
};

const MARCUM_TOL: f64 = 1e-16;
/// `|β - 1|` below this switches to the `β = 1` closed form.
const BETA_ONE_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxCoefficients {
    pub alpha: f64,
    pub beta: f64,
    /// `c = √(ρ_s P) ξ̂ ‖s_s‖²`
    pub xi_gain: f64,
    /// `ε = ρ_c P ξ̂² ϑ / σ_s²`
    pub epsilon: f64,
}

/// Under H0 (`ϑ = 0`) the kernel collapses to a rank-one energy
/// `scale · |s_sᴴ r̃|² / (‖s_s‖² σ_s²)` with `scale = c (2 - c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H0Limit {
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Approximation {
    Regular(ApproxCoefficients),
    H0Limit(H0Limit),
}

pub(crate) fn h0_limit(c: f64) -> H0Limit {
    H0Limit { scale: c * (2.0 - c) }
}

/// `(α, β)` from `κ`, `T`, `c`, and `ε > 0`.
fn coefficients(kappa: f64, t: u32, c: f64, epsilon: f64) -> ApproxCoefficients {
    let inv = 1.0 / epsilon;
    let alpha = 2.0 * (kappa + t as f64 * epsilon.ln_1p()) * (1.0 + inv);
    let beta = 1.0 + inv * (1.0 - (1.0 - c).powi(2));
    ApproxCoefficients {
        alpha,
        beta,
        xi_gain: c,
        epsilon,
    }
}

/// Statistical-value approximation for the given hypothesis.
///
/// The SR is assumed to know `E|h_s|²`, equal to the deterministic `g_s`.
pub fn approx_coefficients(p: &SensingParams, hypothesis: Hypothesis) -> Result<Approximation> {
    p.validate()?;
    let c = p.xi_gain;
    match hypothesis {
        Hypothesis::H0 => Ok(Approximation::H0Limit(h0_limit(c))),
        Hypothesis::H1 => {
            let epsilon = c * c * p.zeta();
            if !(epsilon > 0.0) {
                return Err(IsacError::singular(
                    "approx_coefficients",
                    "interference term ρ_c P ξ̂² ϑ is zero; the H1 kernel is undefined",
                ));
            }
            Ok(Approximation::Regular(coefficients(p.kappa, p.t_symbols, c, epsilon)))
        }
    }
}

fn regular_h1(p: &SensingParams) -> Result<ApproxCoefficients> {
    match approx_coefficients(p, Hypothesis::H1)? {
        Approximation::Regular(c) => Ok(c),
        Approximation::H0Limit(_) => unreachable!("H1 never takes the H0 limit"),
    }
}

/// `Pr{X + β Y ≥ α}` with `X ~ χ²_{2(T-1)}` and `Y ~ χ²_2`, both central.
pub fn two_chi2_exceedance(alpha: f64, beta: f64, t: u32) -> Result<f64> {
    const OP: &str = "two_chi2_exceedance";
    if alpha.is_nan() || !beta.is_finite() || t == 0 {
        return Err(IsacError::domain(OP, format!("alpha={alpha}, beta={beta}, t={t}")));
    }
    if alpha <= 0.0 {
        return Ok(1.0);
    }
    if alpha == f64::INFINITY {
        return Ok(0.0);
    }
    if t == 1 {
        // X vanishes
        return Ok(if beta > 0.0 { (-alpha / (2.0 * beta)).exp() } else { 0.0 });
    }
    let m = (t - 1) as f64;
    if (beta - 1.0).abs() < BETA_ONE_BAND {
        // X + Y ~ χ²_{2T}
        return clamp_probability(OP, incomplete_gamma_pq(t as f64, 0.5 * alpha).1);
    }
    if beta > 1.0 {
        // e^{-α/2β} (1 + (1/β) Σ_{l=1}^{T-1} (β/(β-1))^l P(l, z)), in logs
        let z = alpha * (beta - 1.0) / (2.0 * beta);
        let ln_ratio = (beta / (beta - 1.0)).ln();
        let mut ln_sum = f64::NEG_INFINITY;
        for l in 1..t {
            let lf = l as f64;
            ln_sum = log_add(ln_sum, lf * ln_ratio + ln_reg_lower_gamma(lf, z)?);
        }
        let ln_p = -alpha / (2.0 * beta) + log_add(0.0, ln_sum - beta.ln());
        return clamp_probability(OP, ln_p.exp());
    }
    let tol = Tolerance {
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        max_iter: 2000,
    };
    if beta > 0.0 {
        // 1 - ½ ∫_0^{α/β} P(T-1, (α - β y)/2) e^{-y/2} dy
        let f = |y: f64| incomplete_gamma_pq(m, 0.5 * (alpha - beta * y).max(0.0)).0 * (-0.5 * y).exp();
        let v = integrate_adaptive(f, 0.0, alpha / beta, &tol)?;
        clamp_probability(OP, 1.0 - 0.5 * v)
    } else {
        // β ≤ 0: ½ ∫_0^∞ Q(T-1, (α - β y)/2) e^{-y/2} dy, truncated where e^{-y/2} < 1e-30
        let f = |y: f64| incomplete_gamma_pq(m, 0.5 * (alpha - beta * y)).1 * (-0.5 * y).exp();
        let v = integrate_adaptive(f, 0.0, 140.0, &tol)?;
        clamp_probability(OP, 0.5 * v)
    }
}

/// False-alarm lower bound from the two-chi-square finite sum.
pub fn interfered_unknown_h_pfa(coeffs: &ApproxCoefficients, t_symbols: u32) -> Result<f64> {
    two_chi2_exceedance(coeffs.alpha, coeffs.beta, t_symbols)
}

/// Closed-form PFA under the configured H0 reading.
pub(crate) fn pfa_closed_form(p: &SensingParams) -> Result<f64> {
    match p.h0_reading {
        H0Reading::ThetaLimit => {
            let g = h0_limit(p.xi_gain).scale;
            if p.kappa <= 0.0 {
                return Ok(1.0);
            }
            if g <= 0.0 {
                return Ok(0.0);
            }
            Ok((-p.kappa / g).exp())
        }
        H0Reading::SharedKernel => interfered_unknown_h_pfa(&regular_h1(p)?, p.t_symbols),
    }
}

pub(crate) fn pd_closed_form(p: &SensingParams) -> Result<f64> {
    interfered_unknown_h_pd(&regular_h1(p)?, p)
}

/// Chebyshev–Gauss evaluation of `Pr{X₁ + β Y₁ ≥ α}` with
/// `X₁ ~ χ²_{2(T-1)}(μ (T-1))`, `Y₁ ~ χ²_2(μ)`, `μ = 2Λ/T`, using
/// `params.n_quad` nodes.
pub fn interfered_unknown_h_pd(coeffs: &ApproxCoefficients, params: &SensingParams) -> Result<f64> {
    const OP: &str = "interfered_unknown_h_pd";
    let (alpha, beta) = (coeffs.alpha, coeffs.beta);
    let t = params.t_symbols;
    let mu = 2.0 * params.snr_total / t as f64;
    if alpha.is_nan() || !beta.is_finite() {
        return Err(IsacError::numeric(OP, format!("alpha={alpha}, beta={beta}")));
    }
    if alpha <= 0.0 {
        return Ok(1.0);
    }
    if !(beta > 0.0) {
        return Err(IsacError::domain(OP, format!("quadrature form needs beta > 0, got {beta}")));
    }
    if t == 1 {
        let v = marcum_q_unchecked(1, mu.sqrt(), (alpha / beta).sqrt(), MARCUM_TOL);
        return clamp_probability(OP, v);
    }
    let nodes = chebyshev_gauss_nodes(params.n_quad)?;
    let a_x = (mu * (t - 1) as f64).sqrt();
    let q = alpha / (4.0 * beta);
    let integrand = |x: f64| {
        let i0_arg = (mu * alpha / (2.0 * beta) * (1.0 + x)).max(0.0).sqrt();
        // e^{-μ/2 - α/4β} e^{-(α/4β) cos θ} I_0(·) in one exponent
        let ln_w = -0.5 * mu - q * (1.0 + x) + ln_bessel_i_unchecked(0, i0_arg);
        let cdf_x = 1.0 - marcum_q_unchecked(t - 1, a_x, (0.5 * alpha * (1.0 - x)).max(0.0).sqrt(), MARCUM_TOL);
        ln_w.exp() * cdf_x
    };
    let acc: f64 = nodes.iter().map(|&(x, _)| (1.0 - x * x).max(0.0).sqrt() * integrand(x)).sum();
    let nq = params.n_quad as f64;
    let v = 1.0 - std::f64::consts::PI * q / nq * acc;
    // In θ this is the midpoint rule, whose leading error is
    // (π/N)²/24 · q (h(1) + h(-1)). Excursions past [0, 1] within twice that are clamped.
    let disc = std::f64::consts::PI.powi(2) / (24.0 * nq * nq) * q * (integrand(1.0) + integrand(-1.0));
    let slack = 2.0 * disc.abs();
    if v < -slack || v > 1.0 + slack {
        return clamp_probability(OP, v);
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Adaptive-quadrature reference for `Pr{X + β Y ≥ α}` with
/// `X ~ χ²_{2(T-1)}(nc_x)` and `Y ~ χ²_2(nc_y)`, `β > 0`.
pub fn interfered_unknown_h_pd_two_chi2(alpha: f64, beta: f64, t: u32, nc_x: f64, nc_y: f64) -> Result<f64> {
    const OP: &str = "interfered_unknown_h_pd_two_chi2";
    if t < 2 || !(beta > 0.0) || nc_x < 0.0 || nc_y < 0.0 {
        return Err(IsacError::domain(OP, format!("t={t}, beta={beta}, nc_x={nc_x}, nc_y={nc_y}")));
    }
    if alpha <= 0.0 {
        return Ok(1.0);
    }
    let tol = Tolerance {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        max_iter: 4000,
    };
    let a_x = nc_x.sqrt();
    let f = |y: f64| {
        let ln_pdf = -0.5 * (y + nc_y) + ln_bessel_i_unchecked(0, (nc_y * y).max(0.0).sqrt()) - std::f64::consts::LN_2;
        let cdf_x = 1.0 - marcum_q_unchecked(t - 1, a_x, (alpha - beta * y).max(0.0).sqrt(), MARCUM_TOL);
        ln_pdf.exp() * cdf_x
    };
    let v = integrate_adaptive(f, 0.0, alpha / beta, &tol)?;
    clamp_probability(OP, 1.0 - v)
}

fn check_vectors(op: &'static str, r: &[Complex64], s_s: &[Complex64]) -> Result<()> {
    if r.len() != s_s.len() || r.is_empty() {
        return Err(IsacError::domain(op, format!("length mismatch: r={}, s_s={}", r.len(), s_s.len())));
    }
    Ok(())
}

/// `(|s_sᴴ r|², ‖r‖², ‖s_s‖²)`
fn xi_parts(r: &[Complex64], s_s: &[Complex64]) -> (f64, f64, f64) {
    let proj: Complex64 = s_s.iter().zip(r).map(|(s, x)| s.conj() * x).sum();
    let e: f64 = r.iter().map(|x| x.norm_sqr()).sum();
    let s2: f64 = s_s.iter().map(|s| s.norm_sqr()).sum();
    (proj.norm_sqr(), e, s2)
}

#[derive(Debug, Clone, Copy)]
struct XiProblem {
    a: f64,
    e: f64,
    s2: f64,
    t: f64,
    sp: f64,
    cp: f64,
    sigma2: f64,
}

impl XiProblem {
    fn residual(&self, xi: f64) -> f64 {
        let XiProblem { a, e, s2, t, sp, cp, sigma2 } = *self;
        let rsp = sp.sqrt();
        let d = cp * xi * xi * a + sigma2;
        // ‖r - √(ρ_s P) ξ s_s s_sᴴ r‖²
        let resid = e - 2.0 * rsp * xi * a + sp * xi * xi * s2 * a;
        2.0 * t * cp * a * xi / d - 2.0 * cp * a * xi * resid / (d * d) + (2.0 * xi * sp * s2 * a - 2.0 * rsp * a) / d
    }
}

/// Derivative of the unknown-channel log-likelihood with respect to the
/// amplitude scaling `ξ`; its positive root is the ML estimate.
pub fn xi_residual(
    xi: f64,
    r_tilde: &[Complex64],
    s_s: &[Complex64],
    p_w: f64,
    rho_s: f64,
    rho_c: f64,
    sigma_s2_w: f64,
) -> f64 {
    let (a, e, s2) = xi_parts(r_tilde, s_s);
    XiProblem {
        a,
        e,
        s2,
        t: r_tilde.len() as f64,
        sp: rho_s * p_w,
        cp: rho_c * p_w,
        sigma2: sigma_s2_w,
    }
    .residual(xi)
}

/// Bisection for the ML amplitude scaling `ξ̂ ≥ 0`.
///
/// The bracket `[0, b]` starts at the noise-free value `1 / (√(ρ_s P) ‖s_s‖²)`
/// and doubles until the residual turns positive. Returns 0 when no sign
/// change shows up within 60 doublings.
pub fn estimate_xi(
    r_tilde: &[Complex64],
    s_s: &[Complex64],
    p_w: f64,
    rho_s: f64,
    rho_c: f64,
    sigma_s2_w: f64,
) -> Result<f64> {
    const OP: &str = "estimate_xi";
    check_vectors(OP, r_tilde, s_s)?;
    let (a, e, s2) = xi_parts(r_tilde, s_s);
    if !(s2 > 0.0) {
        return Err(IsacError::domain(OP, "sensing waveform has zero energy"));
    }
    let prob = XiProblem {
        a,
        e,
        s2,
        t: r_tilde.len() as f64,
        sp: rho_s * p_w,
        cp: rho_c * p_w,
        sigma2: sigma_s2_w,
    };
    if a == 0.0 || (prob.sp <= 0.0 && prob.cp <= 0.0) {
        return Ok(0.0);
    }
    let f = |xi: f64| -> Result<f64> {
        let v = prob.residual(xi);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(IsacError::numeric(OP, format!("residual not finite at xi = {xi}")))
        }
    };
    let mut hi = if prob.sp > 0.0 {
        1.0 / (prob.sp.sqrt() * s2)
    } else {
        (sigma_s2_w / (prob.cp * a)).sqrt()
    };
    let mut lo = 0.0;
    let mut found = false;
    for _ in 0..=60 {
        if f(hi)? > 0.0 {
            found = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !found {
        return Ok(0.0);
    }
    let tol = Tolerance {
        abs_tol: 0.0f64.max(hi * 1e-15),
        rel_tol: 1e-12,
        max_iter: 200,
    };
    for _ in 0..tol.max_iter {
        if tol.converged(lo, hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

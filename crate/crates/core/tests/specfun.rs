use isac_core::specfun::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;
use statrs::function::gamma as sg;

/// I_m(x) from the plain power series, 80 terms.
fn bessel_series(m: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = h.powi(m as i32) / (1..=m).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..80 {
        term *= h * h / (k as f64 * (k + m) as f64);
        sum += term;
    }
    sum
}

/// `Q_m(a, b)` from its defining integral, composite Simpson on [b, b + 40].
fn marcum_by_integral(m: u32, a: f64, b: f64) -> f64 {
    let f = |x: f64| {
        if a == 0.0 {
            x.powi(2 * m as i32 - 1) * (-x * x / 2.0).exp() / (2f64.powi(m as i32 - 1) * sg::gamma(m as f64))
        } else {
            x.powi(m as i32) / a.powi(m as i32 - 1) * (-(x * x + a * a) / 2.0).exp() * bessel_series(m - 1, a * x)
        }
    };
    let n = 40_000;
    let h = 40.0 / n as f64;
    let mut s = f(b) + f(b + 40.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(b + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn q_function_against_statrs() {
    for &x in &[-6.0f64, -2.5, -1.0, 0.0, 0.3, 1.7, 2.326_347_874, 4.0, 8.0, 12.0] {
        let upper = 0.5 * erfc(x.abs() / std::f64::consts::SQRT_2);
        let want = if x < 0.0 { 1.0 - upper } else { upper };
        let got = q_function(x).unwrap();
        assert!((got - want).abs() <= 1e-10 * want, "x = {x}: {got} vs {want}");
    }
    assert!((q_function(-1.0).unwrap() - 0.841_344_746_068_542_9).abs() < 1e-15);
    assert!((q_function(3.0).unwrap() - 1.349_898_031_630_094_5e-3).abs() < 1e-17);
    assert!((q_function(2.326_347_874_0).unwrap() - 0.01).abs() < 1e-11);
    assert!((q_function(-1.7).unwrap() - (1.0 - q_function(1.7).unwrap())).abs() < 1e-15);
}

#[test]
fn q_inverse_reference_values() {
    assert_eq!(q_inverse(0.5).unwrap(), 0.0);
    assert!((q_inverse(0.01).unwrap() - 2.326_347_874_0).abs() < 1e-9);
    assert!((q_inverse(0.6).unwrap() + 0.253_347_103_1).abs() < 1e-9);
    assert!(q_inverse(0.0).is_err());
    assert!(q_inverse(1.0).is_err());
}

#[test]
fn q_inverse_round_trip_on_log_grid() {
    for i in 0..=120 {
        let lp = -6.0 + 6.0 * i as f64 / 120.0;
        for p in [10f64.powf(lp), 1.0 - 10f64.powf(lp)] {
            if !(p > 0.0 && p < 1.0) {
                continue;
            }
            let back = q_function(q_inverse(p).unwrap()).unwrap();
            assert!((back - p).abs() < 1e-9, "p = {p}: {back}");
        }
    }
}

#[test]
fn incomplete_gamma_against_statrs() {
    assert!((reg_lower_gamma(5.0, 5.0).unwrap() - 0.559_506_714_9).abs() < 1e-10);
    assert!((reg_lower_gamma(1.0, 0.7).unwrap() - (1.0 - (-0.7f64).exp())).abs() < 1e-15);
    assert_eq!(reg_lower_gamma(3.0, 0.0).unwrap(), 0.0);
    for &s in &[0.5, 1.0, 2.0, 7.0, 20.0, 50.0, 100.0] {
        for &x in &[0.01, 0.5, 1.0, 5.0, 19.0, 50.0, 99.0, 130.0] {
            let want = sg::gamma_lr(s, x);
            let got = reg_lower_gamma(s, x).unwrap();
            assert!((got - want).abs() < 1e-12, "P({s}, {x}): {got} vs {want}");
            let uw = sg::gamma_ur(s, x);
            let ug = reg_upper_gamma(s, x).unwrap();
            assert!((ug - uw).abs() < 1e-12 + 1e-9 * uw, "Q({s}, {x}): {ug} vs {uw}");
        }
    }
    for &x in &[0.3, 4.5, 17.0, 120.5] {
        assert!((ln_gamma(x) - sg::ln_gamma(x)).abs() < 1e-12 * sg::ln_gamma(x).abs().max(1.0));
    }
}

#[test]
fn bessel_against_series() {
    assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
    assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
    assert!((bessel_i(0, 2.0).unwrap() - 2.279_585_302_3).abs() < 1e-10);
    for m in [0, 1, 3, 10, 25] {
        for &x in &[0.1, 1.0, 4.0, 15.0, 30.0] {
            let want = bessel_series(m, x);
            let got = bessel_i(m, x).unwrap();
            assert!((got / want - 1.0).abs() < 1e-11, "I_{m}({x}): {got} vs {want}");
        }
    }
    // no overflow below 700
    assert!(bessel_i(0, 700.0).unwrap().is_finite());
    let x = 700.0f64;
    let asym = (1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x)) / (2.0 * std::f64::consts::PI * x).sqrt();
    assert!((bessel_i_scaled(0, x).unwrap() / asym - 1.0).abs() < 1e-8);
}

#[test]
fn marcum_against_defining_integral() {
    let cases = [(1, 2.0, 2.0), (1, 0.5, 1.5), (1, 3.0, 1.0), (2, 1.0, 2.5), (5, 2.0, 3.0), (3, 0.0, 2.0)];
    for (m, a, b) in cases {
        let want = marcum_by_integral(m, a, b);
        let got = marcum_q(m, a, b).unwrap();
        assert!((got - want).abs() < 1e-9, "Q_{m}({a}, {b}): {got} vs {want}");
    }
    assert!((marcum_q(1, 2.0, 2.0).unwrap() - 0.603_500_960_6).abs() < 1e-9);
    assert_eq!(marcum_q(1, 0.0, 0.0).unwrap(), 1.0);
}

#[test]
fn marcum_reduces_to_gamma_survival() {
    assert!((marcum_q(7, 0.0, 6f64.sqrt()).unwrap() - (1.0 - reg_lower_gamma(7.0, 3.0).unwrap())).abs() < 1e-12);
    for m in [1u32, 5, 20, 50] {
        for kappa in [0.1f64, 1.0, 10.0, 40.0] {
            let q = marcum_q(m, 0.0, (2.0 * kappa).sqrt()).unwrap();
            let want = 1.0 - reg_lower_gamma(m as f64, kappa).unwrap();
            assert!((q - want).abs() < 1e-9, "m = {m}, kappa = {kappa}");
        }
    }
}

#[test]
fn marcum_inverse_examples() {
    let b = marcum_q_inv_b(1, 0.0, (-2.0f64).exp()).unwrap();
    assert!((b - 2.0).abs() < 1e-9);
    let b = marcum_q_inv_b(7, 0.0, 0.5).unwrap();
    assert!((reg_lower_gamma(7.0, b * b / 2.0).unwrap() - 0.5).abs() < 1e-10);
    let b = marcum_q_inv_b(1, 3.0, 0.9).unwrap();
    assert!((marcum_q(1, 3.0, b).unwrap() - 0.9).abs() < 1e-10);
}

fn sample_stats(k: u32, lambda: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| noncentral_chi2_sample(&mut rng, k, lambda).unwrap()).collect()
}

#[test]
fn sampler_moments() {
    let xs = sample_stats(4, 3.0, 1_000_000, 11);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 7.0).abs() < 0.03, "mean {mean}");
    assert!((var - 20.0).abs() < 0.5, "var {var}");
}

#[test]
fn sampler_cdf_matches_marcum() {
    let xs = sample_stats(2, 1.0, 200_000, 12);
    let ecdf = xs.iter().filter(|&&x| x <= 5.0).count() as f64 / xs.len() as f64;
    let want = 1.0 - marcum_q(1, 1.0, 5f64.sqrt()).unwrap();
    assert!((ecdf - want).abs() < 0.005);

    // survival at 20 points, chi-square with 2m degrees: Q_m(√λ, √x)
    let (m, lambda) = (3u32, 4.0);
    let n = 100_000;
    let mut xs = sample_stats(2 * m, lambda, n, 13);
    xs.sort_by(f64::total_cmp);
    for i in 1..=20 {
        let x = i as f64 * 1.0;
        let emp = (n - xs.partition_point(|&v| v < x)) as f64 / n as f64;
        let th = marcum_q(m, lambda.sqrt(), x.sqrt()).unwrap();
        let se = (th * (1.0 - th) / n as f64).sqrt();
        assert!((emp - th).abs() <= 3.0 * se + 1e-4, "x = {x}: {emp} vs {th}");
    }
}

#[test]
fn chebyshev_nodes_and_convergence() {
    let one = chebyshev_gauss_nodes(1).unwrap();
    assert!(one[0].0.abs() < 1e-15 && (one[0].1 - std::f64::consts::PI).abs() < 1e-15);
    let two = chebyshev_gauss_nodes(2).unwrap();
    assert!((two[0].0 - 0.5f64.sqrt()).abs() < 1e-15 && (two[1].0 + 0.5f64.sqrt()).abs() < 1e-15);

    // ∫ √(1-x²) dx = π/2 with the Jacobian √(1-x²) applied twice
    let semi = |n: usize| -> f64 {
        chebyshev_gauss_nodes(n).unwrap().iter().map(|&(x, w)| w * (1.0 - x * x)).sum()
    };
    assert!((semi(64) - std::f64::consts::FRAC_PI_2).abs() < 1e-3);

    // smooth test integrand: ∫ e^x √(1-x²) dx = π I_1(1)
    let want = std::f64::consts::PI * bessel_series(1, 1.0);
    let err = |n: usize| -> f64 {
        let s: f64 = chebyshev_gauss_nodes(n).unwrap().iter().map(|&(x, w)| w * x.exp() * (1.0 - x * x)).sum();
        (s - want).abs()
    };
    let mut n = 8;
    while n < 1024 {
        let (e1, e2) = (err(n), err(2 * n));
        assert!(e2 < e1 || e2 < 1e-14, "N = {n}: {e1} -> {e2}");
        n *= 2;
    }
    assert!(chebyshev_gauss_nodes(0).is_err());
}

proptest! {
    #[test]
    fn marcum_monotone_in_b(m in 1u32..40, a in 0.0f64..30.0, b1 in 0.0f64..40.0, db in 0.0f64..5.0) {
        let q1 = marcum_q(m, a, b1).unwrap();
        let q2 = marcum_q(m, a, b1 + db).unwrap();
        prop_assert!(q2 <= q1 + 1e-12);
        prop_assert!((0.0..=1.0).contains(&q1));
    }

    #[test]
    fn marcum_monotone_in_a(m in 1u32..40, a1 in 0.0f64..30.0, da in 0.0f64..5.0, b in 0.0f64..40.0) {
        let q1 = marcum_q(m, a1, b).unwrap();
        let q2 = marcum_q(m, a1 + da, b).unwrap();
        prop_assert!(q2 >= q1 - 1e-12);
    }

    #[test]
    fn marcum_at_zero_threshold_is_one(m in 1u32..60, a in 0.0f64..50.0) {
        prop_assert_eq!(marcum_q(m, a, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn reg_gamma_monotone(s in 0.1f64..80.0, x in 0.0f64..150.0, dx in 0.0f64..10.0) {
        let p1 = reg_lower_gamma(s, x).unwrap();
        let p2 = reg_lower_gamma(s, x + dx).unwrap();
        prop_assert!(p2 >= p1 - 1e-15);
        prop_assert!((p1 + reg_upper_gamma(s, x).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn q_inverse_is_decreasing(p in 1e-8f64..0.5, dp in 1e-6f64..0.4) {
        prop_assert!(q_inverse(p + dp).unwrap() < q_inverse(p).unwrap());
    }
}

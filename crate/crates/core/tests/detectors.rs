use isac_core::detectors::*;
use isac_core::specfun::{marcum_q, q_function, reg_lower_gamma, reg_upper_gamma};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn params(lam: f64, t: u32, rho_c: f64, kappa: f64) -> SensingParams {
    SensingParams::new(lam, t, rho_c, kappa).unwrap()
}

fn n(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Sum of `dof` squared standard normals, with the first one shifted by `√nc`.
fn chi2(rng: &mut ChaCha8Rng, dof: u32, nc: f64) -> f64 {
    (0..dof)
        .map(|i| {
            let x = n(rng) + if i == 0 { nc.sqrt() } else { 0.0 };
            x * x
        })
        .sum()
}

fn within_sigma(hat: f64, p: f64, n_draws: usize, k: f64) -> bool {
    let se = (p * (1.0 - p) / n_draws as f64).sqrt();
    (hat - p).abs() <= k * se + 1e-12
}

#[test]
fn coherent_reference_values() {
    let pfa = coherent_pfa(&params(10.0, 20, 0.0, 10.0)).unwrap();
    assert!((pfa - q_function(20.0 / 20f64.sqrt()).unwrap()).abs() < 1e-18);
    assert!((pfa - 3.87e-6).abs() < 0.01e-6);
    let pd = coherent_pd(&params(10.0, 20, 0.0, 0.0)).unwrap();
    assert!((pd - 0.987_326_340_661).abs() < 1e-11);
}

#[test]
fn glrt_pd_against_sampler() {
    let (lam, kappa) = (10.0, 5.0);
    let pd = glrt_unknown_h_pd(&params(lam, 20, 0.0, kappa)).unwrap();
    assert!((pd - marcum_q(1, (2.0 * lam).sqrt(), 10f64.sqrt()).unwrap()).abs() < 1e-15);
    // 2·stat ~ χ²_2(2Λ)
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let draws = 1_000_000;
    let hits = (0..draws).filter(|_| chi2(&mut rng, 2, 2.0 * lam) >= 2.0 * kappa).count();
    assert!(within_sigma(hits as f64 / draws as f64, pd, draws, 3.0));
    assert_eq!(glrt_unknown_h_pfa(5.0).unwrap(), (-5.0f64).exp());
}

#[test]
fn energy_pd_against_sampler() {
    let (t, lam, kappa) = (50u32, 20.0, 65.0);
    let pd = energy_pd(&params(lam, t, 0.0, kappa)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let draws = 1_000_000;
    let hits = (0..draws).filter(|_| chi2(&mut rng, 2 * t, 2.0 * lam) >= 2.0 * kappa).count();
    assert!(within_sigma(hits as f64 / draws as f64, pd, draws, 3.0), "{pd}");
}

#[test]
fn energy_threshold_matches_gamma() {
    let kappa = threshold_for_pfa(DetectorKind::EnergyEstimatedSc, &params(5.0, 50, 0.0, 0.0), 0.1).unwrap();
    assert!((reg_upper_gamma(50.0, kappa).unwrap() - 0.1).abs() < 1e-10);
    assert!((energy_pfa(7, 3.0).unwrap() - (1.0 - reg_lower_gamma(7.0, 3.0).unwrap())).abs() < 1e-13);
}

#[test]
fn energy_at_one_symbol_is_glrt() {
    for &k in &[0.0, 0.1, 1.0, 3.7, 12.0, 40.0] {
        assert_eq!(energy_pfa(1, k).unwrap(), glrt_unknown_h_pfa(k).unwrap());
        let a = energy_pd(&params(6.0, 1, 0.0, k)).unwrap();
        let b = glrt_unknown_h_pd(&params(6.0, 1, 0.0, k)).unwrap();
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn glrt_pfa_ignores_snr() {
    for &k in &[0.0, 0.5, 2.0, 9.0] {
        let base = pfa(DetectorKind::GlrtUnknownH, &params(1.0, 20, 0.3, k)).unwrap();
        for &lam in &[0.0, 1e-3, 7.0, 1e4] {
            let v = pfa(DetectorKind::GlrtUnknownH, &params(lam, 20, 0.3, k)).unwrap();
            assert_eq!(v.to_bits(), base.to_bits());
        }
    }
}

#[test]
fn interfered_known_h_large_zeta_limit() {
    // ρ_s = 0 and ζ → ∞: the statistic becomes the energy detector with κ' = κ + T ln(1 + ζ)
    let t = 50;
    let lam = 1e6 * t as f64;
    let p = params(lam, t, 1.0, 20.0);
    let zeta = p.zeta();
    let kappa_e = 0.5 * (1.0 + zeta) / zeta * 2.0 * (20.0 + t as f64 * zeta.ln_1p());
    let want = energy_pfa(t, kappa_e).unwrap();
    let got = interfered_known_h_pfa(&p).unwrap();
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn interfered_known_h_against_statistic_sampler() {
    // T = 50, ζ = 5, ρ_s = 0.8, κ = 0
    let t = 50u32;
    let rho_c = 0.2;
    let lam = 5.0 * t as f64 / rho_c;
    let p = params(lam, t, rho_c, 0.0);
    let (nc0, nc1) = known_h_noncentralities(&p).unwrap();
    let zeta = p.zeta();
    let b2 = 2.0 * (1.0 + zeta) / zeta * (t as f64 * zeta.ln_1p() + 0.8 * t as f64 / rho_c);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let draws = 100_000;
    let h0 = (0..draws).filter(|_| chi2(&mut rng, 2 * t, nc0) >= b2).count() as f64 / draws as f64;
    let h1 = (0..draws).filter(|_| chi2(&mut rng, 2 * t, nc1) >= b2).count() as f64 / draws as f64;
    let (pfa, pd) = (interfered_known_h_pfa(&p).unwrap(), interfered_known_h_pd(&p).unwrap());
    assert!(within_sigma(h0, pfa, draws, 4.0), "{h0} vs {pfa}");
    assert!(within_sigma(h1, pd, draws, 4.0), "{h1} vs {pd}");
    assert!(pd >= pfa);
}

#[test]
fn two_chi2_hand_value() {
    let want = (-1.0f64).exp() * (1.0 + (1.0 - (-1.0f64).exp()));
    assert!((two_chi2_exceedance(4.0, 2.0, 2).unwrap() - want).abs() < 1e-13);
    assert!((want - 0.6004).abs() < 1e-4);
}

#[test]
fn two_chi2_against_sampler() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let draws = 200_000;
    for case in 0..10 {
        let t: u32 = rng.random_range(2..40);
        let beta: f64 = rng.random_range(-1.5..4.0);
        let alpha: f64 = rng.random_range(0.5..3.0) * 2.0 * t as f64;
        let p = two_chi2_exceedance(alpha, beta, t).unwrap();
        let hits = (0..draws)
            .filter(|_| chi2(&mut rng, 2 * (t - 1), 0.0) + beta * chi2(&mut rng, 2, 0.0) >= alpha)
            .count();
        let hat = hits as f64 / draws as f64;
        assert!(within_sigma(hat, p, draws, 4.0), "case {case}: T={t}, α={alpha}, β={beta}: {hat} vs {p}");
    }
}

#[test]
fn two_chi2_branches_meet_at_beta_one() {
    for &t in &[2u32, 5, 20] {
        let alpha = 2.0 * t as f64;
        let mid = two_chi2_exceedance(alpha, 1.0, t).unwrap();
        for &d in &[1e-6, 1e-4] {
            let lo = two_chi2_exceedance(alpha, 1.0 - d, t).unwrap();
            let hi = two_chi2_exceedance(alpha, 1.0 + d, t).unwrap();
            assert!(lo <= mid + 1e-9 && mid <= hi + 1e-9);
            assert!((hi - lo).abs() < 100.0 * d);
        }
    }
}

fn unknown_h_point(lam: f64, t: u32, rho_c: f64, kappa: f64) -> (SensingParams, ApproxCoefficients) {
    let p = params(lam, t, rho_c, kappa);
    match approx_coefficients(&p, Hypothesis::H1).unwrap() {
        Approximation::Regular(c) => (p, c),
        Approximation::H0Limit(_) => unreachable!(),
    }
}

#[test]
fn unknown_h_pd_against_sampler_and_reference() {
    let (t, lam) = (20u32, 30.0);
    let mu = 2.0 * lam / t as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let draws = 100_000;
    for &(rho_c, kappa) in &[(0.5, -3.0), (0.3, 0.0), (0.7, 2.0)] {
        let (p, c) = unknown_h_point(lam, t, rho_c, kappa);
        let pd = interfered_unknown_h_pd(&c, &p).unwrap();
        let reference = interfered_unknown_h_pd_two_chi2(c.alpha, c.beta, t, mu * (t - 1) as f64, mu).unwrap();
        assert!((pd - reference).abs() < 1e-6, "quadrature {pd} vs adaptive {reference}");
        let hits = (0..draws)
            .filter(|_| chi2(&mut rng, 2 * (t - 1), mu * (t - 1) as f64) + c.beta * chi2(&mut rng, 2, mu) >= c.alpha)
            .count();
        let hat = hits as f64 / draws as f64;
        assert!(within_sigma(hat, pd, draws, 3.0), "ρ_c={rho_c}, κ={kappa}: {hat} vs {pd}");
    }
}

#[test]
fn unknown_h_pd_zero_signal() {
    // Λ → 0 leaves two central chi-squares
    let (p, c) = unknown_h_point(1e-9, 10, 0.5, -1e-8);
    let pd = interfered_unknown_h_pd(&c, &p).unwrap();
    let central = two_chi2_exceedance(c.alpha, c.beta, 10).unwrap();
    assert!((pd - central).abs() < 1e-6, "{pd} vs {central}");
}

#[test]
fn quadrature_self_convergence() {
    let points = [(30.0, 20, 0.5, -3.0), (100.0, 20, 0.3, 1.0), (10.0, 50, 0.8, -0.5), (400.0, 20, 0.2, 5.0), (60.0, 8, 0.6, 0.0)];
    for (lam, t, rho_c, kappa) in points {
        let (p, c) = unknown_h_point(lam, t, rho_c, kappa);
        let at = |nq: usize| interfered_unknown_h_pd(&c, &p.with_n_quad(nq)).unwrap();
        let mut prev = f64::INFINITY;
        let mut nq = 8;
        while nq <= 1024 {
            let d = (at(nq) - at(2 * nq)).abs();
            assert!(d <= prev || d < 1e-13, "Λ={lam}: N={nq}: {d} after {prev}");
            prev = d;
            nq *= 2;
        }
        assert!((at(1000) - at(2000)).abs() < 1e-6);
    }
}

#[test]
fn theta_limit_pfa() {
    let p = params(30.0, 20, 0.5, 2.0).with_xi_gain(0.8);
    let want = (-2.0 / (0.8 * 1.2f64)).exp();
    assert!((pfa(DetectorKind::InterferedUnknownH, &p).unwrap() - want).abs() < 1e-15);
    let shared = p.with_h0_reading(H0Reading::SharedKernel);
    let v = pfa(DetectorKind::InterferedUnknownH, &shared).unwrap();
    assert!((0.0..=1.0).contains(&v));
}

#[test]
fn thresholds_round_trip() {
    for kind in DetectorKind::ALL {
        for readings in [H0Reading::ThetaLimit, H0Reading::SharedKernel] {
            let p = params(40.0, 20, 0.4, 0.0).with_h0_reading(readings);
            for &target in &[1e-6, 1e-3, 0.01, 0.1, 0.5, 0.9] {
                let k = threshold_for_pfa(kind, &p, target).unwrap();
                let back = pfa(kind, &p.with_kappa(k)).unwrap();
                assert!((back - target).abs() < 1e-9 * target.max(1e-3), "{kind} {readings:?} {target}: {back}");
            }
        }
    }
}

#[test]
fn default_grids() {
    let g = default_kappa_grid(DetectorKind::CoherentKnownH, 4.0, DEFAULT_GRID_POINTS);
    assert_eq!(g.len(), 101);
    assert_eq!(g[0], -10.0);
    assert_eq!(g[100], 10.0);
    let g = default_kappa_grid(DetectorKind::EnergyEstimatedSc, 2.0, 4);
    assert_eq!(g, vec![20.0, 25.0, 30.0, 35.0]);
}

#[test]
fn probabilities_on_sweep_ranges() {
    for kind in DetectorKind::ALL {
        for &lam in &[0.5, 10.0, 200.0] {
            let p = params(lam, 20, 0.5, 0.0);
            let grid = default_kappa_grid(kind, lam, 41);
            let roc = roc_curve(kind, &p, &grid).unwrap();
            for w in roc.windows(2) {
                assert!(w[1].pfa <= w[0].pfa + 1e-12, "{kind}");
                assert!(w[1].pd <= w[0].pd + 1e-9, "{kind}");
            }
            for op in &roc {
                assert!((0.0..=1.0).contains(&op.pfa) && (0.0..=1.0).contains(&op.pd));
            }
        }
    }
}

#[test]
fn singular_inputs() {
    let p = params(10.0, 20, 0.0, 0.0);
    assert!(matches!(pd(DetectorKind::InterferedUnknownH, &p), Err(isac_core::IsacError::Singular { .. })));
    assert!(matches!(pd(DetectorKind::InterferedKnownH, &p), Err(isac_core::IsacError::Singular { .. })));
    assert!(SensingParams::new(-1.0, 20, 0.5, 0.0).is_err());
    assert!(SensingParams::new(1.0, 0, 0.5, 0.0).is_err());
    assert!(SensingParams::new(1.0, 2, 1.5, 0.0).is_err());
    assert!(glrt_unknown_h_pfa(-0.1).is_err());
    assert!(coherent_pfa(&params(0.0, 20, 0.5, 1.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_forms_are_probabilities_and_monotone(
        kind_ix in 0usize..5,
        lam in 0.01f64..500.0,
        t in 1u32..80,
        rho_c in 0.01f64..0.99,
        k1 in -100.0f64..200.0,
        dk in 0.0f64..20.0,
    ) {
        let kind = DetectorKind::ALL[kind_ix];
        let t = if kind == DetectorKind::InterferedUnknownH { t.max(2) } else { t };
        // chi-square detectors reject κ < 0
        let k1 = if matches!(kind, DetectorKind::GlrtUnknownH | DetectorKind::EnergyEstimatedSc) { k1.abs() } else { k1 };
        let p = params(lam, t, rho_c, k1).with_n_quad(256);
        let q = p.with_kappa(k1 + dk);
        let (a, b) = (operating_point(kind, &p).unwrap(), operating_point(kind, &q).unwrap());
        for v in [a.pfa, a.pd, b.pfa, b.pd] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(b.pfa <= a.pfa + 1e-12);
        prop_assert!(b.pd <= a.pd + 1e-9);
    }

    #[test]
    fn coherent_pd_dominates_pfa(lam in 1e-4f64..1e4, kappa in -1e4f64..1e4) {
        let p = params(lam, 20, 0.0, kappa);
        prop_assert!(coherent_pd(&p).unwrap() >= coherent_pfa(&p).unwrap());
    }

    #[test]
    fn known_h_noncentralities_ordered(rho_s in 1e-4f64..0.9999, lam in 1e-3f64..1e4, t in 1u32..200) {
        let p = params(lam, t, 1.0 - rho_s, 0.0);
        let (h0, h1) = known_h_noncentralities(&p).unwrap();
        prop_assert!(h1 > h0);
        prop_assert!(interfered_known_h_pd(&p).unwrap() >= interfered_known_h_pfa(&p).unwrap());
    }

    #[test]
    fn glrt_threshold_inverse(p in 1e-12f64..0.999) {
        let k = threshold_for_pfa(DetectorKind::GlrtUnknownH, &params(1.0, 4, 0.5, 0.0), p).unwrap();
        prop_assert!((glrt_unknown_h_pfa(k).unwrap() - p).abs() <= 1e-14 * p.max(1e-300) + 1e-300);
    }
}

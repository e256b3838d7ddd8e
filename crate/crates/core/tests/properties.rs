//! Cross-module invariants: closed forms against brute-force oracles,
//! physicality and monotonicity on scenario grids, and statistical sign
//! structure of the simulated protocol.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use cvmdi_core::channel::{
    equivalent_channel, equivalent_excess_noise, optimal_gain, transmittance_from_distance,
    DetectorModel, LinkBudget,
};
use cvmdi_core::keyrate::{
    conditional_eigenvalue, entropy_g, generic_symplectic_oracle, holevo_bound,
    mutual_information, plob_bound, secret_key_rate, symplectic_pair, JointCM,
};
use cvmdi_core::mcsim::{estimate_joint_cm, run_protocol, McConfig};
use cvmdi_core::modulation::fock::fock_source_oracle;
use cvmdi_core::modulation::{
    four_state_correlation, gaussian_correlation, lambda_weights, source_covariance,
    ModulationScheme, SourceCM,
};

fn alpha_grid() -> Vec<f64> {
    (0..60).map(|i| 1e-6 + i as f64 * 0.03).collect()
}

#[test]
fn schmidt_weights_sum_to_one_and_positive() {
    for alpha_sq in alpha_grid() {
        let lam = lambda_weights(alpha_sq).unwrap().lambda;
        let sum: f64 = lam.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12, "alpha_sq={alpha_sq}: sum {sum}");
        assert!(lam.iter().all(|&l| l > 0.0));
    }
}

#[test]
fn four_state_correlation_bounded_by_gaussian() {
    for alpha_sq in alpha_grid() {
        let v = 1.0 + 2.0 * alpha_sq;
        let z4 = four_state_correlation(alpha_sq).unwrap();
        let zg = gaussian_correlation(v).unwrap();
        assert!(z4 > 0.0, "alpha_sq={alpha_sq}");
        assert!(z4 < zg, "alpha_sq={alpha_sq}: {z4} !< {zg}");
    }
}

#[test]
fn correlation_ratio_decreases_on_working_range() {
    // Z₄/Z_G falls monotonically over the modulation depths in use
    // (the ratio turns back up far beyond them)
    let mut prev = f64::INFINITY;
    let mut alpha_sq = 1e-6;
    while alpha_sq <= 1.8 {
        let v = 1.0 + 2.0 * alpha_sq;
        let ratio =
            four_state_correlation(alpha_sq).unwrap() / gaussian_correlation(v).unwrap();
        assert!(ratio < prev, "alpha_sq={alpha_sq}: {ratio} !< {prev}");
        prev = ratio;
        alpha_sq += 0.05;
    }
}

#[test]
fn closed_form_source_matches_fock_oracle() {
    // the acceptance grid: modest cutoff below α² = 1, larger above
    for (alpha_sq, cutoff) in [(0.05, 40), (0.2, 40), (0.5, 50), (1.0, 60)] {
        let (x, y, z) = fock_source_oracle(f64::sqrt(alpha_sq), cutoff).unwrap();
        let want_v = 1.0 + 2.0 * alpha_sq;
        let want_z = four_state_correlation(alpha_sq).unwrap();
        assert!((x - want_v).abs() < 1e-8, "X at {alpha_sq}: {x}");
        assert!((y - want_v).abs() < 1e-8, "Y at {alpha_sq}: {y}");
        assert!((z - want_z).abs() < 1e-8, "Z at {alpha_sq}: {z}");
    }
}

#[test]
fn source_cm_is_physical_for_both_schemes() {
    for v_mod in [0.05, 0.1, 0.4, 1.0, 1.5, 10.0, 40.0] {
        let gm = source_covariance(&ModulationScheme::gaussian(v_mod).unwrap()).unwrap();
        assert!(gm.x_var >= 1.0);
        if v_mod <= 3.0 {
            let dm =
                source_covariance(&ModulationScheme::four_state_from_vmod(v_mod).unwrap())
                    .unwrap();
            assert!(dm.z_corr < gm.z_corr);
        }
    }
}

#[test]
fn excess_noise_forms_agree_at_optimal_gain_randomized() {
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    for i in 0..200 {
        let l_ac = rng.random::<f64>() * 50.0;
        // keep the effective transmittance η_A·g²/2 below 1: large variances
        // only with the relay at Bob's side, longer Bob links only with
        // source variances near vacuum
        let (l_bc, v_b) = if i % 2 == 0 {
            (0.0, 1.0 + rng.random::<f64>() * 40.0)
        } else {
            (rng.random::<f64>() * 10.0, 1.0 + rng.random::<f64>())
        };
        let eps_a = rng.random::<f64>() * 0.01;
        let eps_b = rng.random::<f64>() * 0.01;
        let link = LinkBudget::new(l_ac, l_bc, 0.2, eps_a, eps_b).unwrap();
        let g2 = optimal_gain(v_b, link.eta_b()).unwrap();
        if g2 == 0.0 {
            continue;
        }
        let general = equivalent_excess_noise(&link, g2, v_b).unwrap();
        let closed = equivalent_channel(&link, v_b, &DetectorModel::ideal())
            .unwrap()
            .eps;
        assert!(
            (general - closed).abs() < 1e-12 * general.abs().max(1.0),
            "({l_ac},{l_bc},{eps_a},{eps_b},{v_b}): {general} vs {closed}"
        );
    }
}

/// Physicality of the block CM (a, b, c): both modes above vacuum and
/// κ₂ ≥ 1, the latter equivalent to A ≤ B² + 1.
fn random_physical_triple(rng: &mut ChaCha12Rng) -> (f64, f64, f64) {
    loop {
        let a = 1.0 + rng.random::<f64>() * 19.0;
        let b = 1.0 + rng.random::<f64>() * 19.0;
        let c = rng.random::<f64>() * (a * b - 1.0).sqrt();
        let big_a = a * a + b * b - 2.0 * c * c;
        let big_b = a * b - c * c;
        if big_a <= big_b * big_b + 1.0 {
            return (a, b, c);
        }
    }
}

#[test]
fn symplectic_pair_matches_generic_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for i in 0..1000 {
        let (a, b, c) = random_physical_triple(&mut rng);
        let cm = JointCM::new(a, b, c).unwrap();
        let (k1, k2) = symplectic_pair(&cm).unwrap();
        let (n1, n2) = generic_symplectic_oracle(&cm.matrix()).unwrap();
        assert!(
            (k1 - n1).abs() < 1e-10 && (k2 - n2).abs() < 1e-10,
            "sample {i} ({a},{b},{c}): ({k1},{k2}) vs ({n1},{n2})"
        );
    }
}

#[test]
fn pure_states_have_unit_spectrum_and_zero_entropy() {
    for v in [1.1, 1.4, 7.0, 40.0] {
        let cm = JointCM::new(v, v, (v * v - 1.0f64).sqrt()).unwrap();
        let (k1, k2) = symplectic_pair(&cm).unwrap();
        assert!((k1 - 1.0).abs() < 1e-9, "V={v}: κ₁={k1}");
        assert!((k2 - 1.0).abs() < 1e-9, "V={v}: κ₂={k2}");
        let s = entropy_g(((k1 - 1.0) / 2.0).max(0.0)).unwrap()
            + entropy_g(((k2 - 1.0) / 2.0).max(0.0)).unwrap();
        assert!(s < 1e-9, "V={v}: entropy {s}");
    }
}

#[test]
fn heterodyne_forms_agree() {
    let mut rng = ChaCha12Rng::seed_from_u64(13);
    for _ in 0..500 {
        let (a, b, c) = random_physical_triple(&mut rng);
        let cm = JointCM::new(a, b, c).unwrap();
        let closed = mutual_information(&cm).unwrap();
        let v_am = (a + 1.0) / 2.0;
        let v_bm = (b + 1.0) / 2.0;
        let two_quadrature = (v_am / (v_am - c * c / (4.0 * v_bm))).log2();
        assert!(
            (closed - two_quadrature).abs() < 1e-12 * closed.abs().max(1.0),
            "({a},{b},{c}): {closed} vs {two_quadrature}"
        );
    }
}

#[test]
fn key_rate_monotone_in_distance_noise_and_beta() {
    let det = DetectorModel::ideal();
    let dm = ModulationScheme::four_state_from_vmod(0.4).unwrap();

    let mut prev = f64::INFINITY;
    for d in [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0] {
        let link = LinkBudget::extreme_asymmetric(d, 0.002, 0.002).unwrap();
        let k = secret_key_rate(&dm, &link, &det, 0.9).unwrap().key_rate;
        assert!(k < prev, "D={d}: {k} !< {prev}");
        prev = k;
    }

    let mut prev = f64::INFINITY;
    for i in 0..=10 {
        let eps_a = i as f64 * 0.001;
        let link = LinkBudget::extreme_asymmetric(10.0, eps_a, 0.002).unwrap();
        let k = secret_key_rate(&dm, &link, &det, 0.9).unwrap().key_rate;
        assert!(k < prev, "eps_a={eps_a}: {k} !< {prev}");
        prev = k;
    }

    let link = LinkBudget::extreme_asymmetric(20.0, 0.002, 0.002).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=10 {
        let beta = i as f64 / 10.0;
        let k = secret_key_rate(&dm, &link, &det, beta).unwrap().key_rate;
        assert!(k > prev, "beta={beta}: {k} !> {prev}");
        prev = k;
    }
}

#[test]
fn rates_stay_below_repeaterless_bound_and_nonnegative_parts() {
    let det = DetectorModel::ideal();
    for scheme in [
        ModulationScheme::four_state_from_vmod(0.4).unwrap(),
        ModulationScheme::gaussian(40.0).unwrap(),
    ] {
        for d in 1..=40 {
            let link = LinkBudget::extreme_asymmetric(d as f64, 0.002, 0.002).unwrap();
            let report = secret_key_rate(&scheme, &link, &det, 0.9).unwrap();
            assert!(report.i_ab >= 0.0);
            assert!(report.chi_be >= 0.0);
            let eta_a = transmittance_from_distance(d as f64, 0.2).unwrap();
            let cap = plob_bound(eta_a).unwrap();
            assert!(
                report.key_rate <= cap,
                "D={d}: K={} exceeds PLOB={cap}",
                report.key_rate
            );
            assert_eq!(report.plob, cap);
        }
    }
}

#[test]
fn beta_threshold_closed_form() {
    let det = DetectorModel::ideal();
    let link = LinkBudget::extreme_asymmetric(20.0, 0.002, 0.002).unwrap();

    let dm = ModulationScheme::four_state_from_vmod(0.4).unwrap();
    let r = secret_key_rate(&dm, &link, &det, 0.9).unwrap();
    let beta_min_dm = r.chi_be / r.i_ab;
    assert!((beta_min_dm - 0.7633165585).abs() < 1e-9);
    let at_threshold = secret_key_rate(&dm, &link, &det, beta_min_dm).unwrap();
    assert!(at_threshold.key_rate.abs() < 1e-12);

    let gm = ModulationScheme::gaussian(40.0).unwrap();
    let r = secret_key_rate(&gm, &link, &det, 0.9).unwrap();
    let beta_min_gm = r.chi_be / r.i_ab;
    assert!((beta_min_gm - 0.8921492148).abs() < 1e-9);
    assert!(beta_min_dm < beta_min_gm);
}

#[test]
fn holevo_consistent_with_component_eigenvalues() {
    let mut rng = ChaCha12Rng::seed_from_u64(29);
    for _ in 0..200 {
        let (a, b, c) = random_physical_triple(&mut rng);
        let cm = JointCM::new(a, b, c).unwrap();
        let (k1, k2) = symplectic_pair(&cm).unwrap();
        let k3 = conditional_eigenvalue(&cm).unwrap();
        let direct = entropy_g(((k1 - 1.0) / 2.0).max(0.0)).unwrap()
            + entropy_g(((k2 - 1.0) / 2.0).max(0.0)).unwrap()
            - entropy_g(((k3 - 1.0) / 2.0).max(0.0)).unwrap();
        let chi = holevo_bound(&cm).unwrap();
        assert!((chi - direct).abs() < 1e-12 * direct.abs().max(1.0));
    }
}

#[test]
fn simulated_correlations_have_sigma_z_sign_structure() {
    let v = 1.4;
    let link = LinkBudget::extreme_asymmetric(10.0, 0.002, 0.002).unwrap();
    let g = optimal_gain(v, link.eta_b()).unwrap().sqrt();
    let z4 = four_state_correlation(0.2).unwrap();
    let source = SourceCM::new(v, v, z4).unwrap();
    let config = McConfig::new(source, source, link, g, 100_000, 51).unwrap();
    let (a1, b1p, _, _) = run_protocol(&config).unwrap();

    let n = a1.x.len() as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let cov = |u: &[f64], w: &[f64]| {
        let (mu, mw) = (mean(u), mean(w));
        u.iter()
            .zip(w)
            .map(|(x, y)| (x - mu) * (y - mw))
            .sum::<f64>()
            / (n - 1.0)
    };
    let cov_x = cov(&a1.x, &b1p.x);
    let cov_p = cov(&a1.p, &b1p.p);
    let est = estimate_joint_cm(&a1, &b1p).unwrap();
    assert!(cov_x > 0.0 && cov_p < 0.0, "cov_x={cov_x}, cov_p={cov_p}");
    // opposite signs of equal magnitude: the sum is zero-mean noise
    let se_sum = std::f64::consts::SQRT_2 * est.se_c * std::f64::consts::SQRT_2;
    assert!(
        (cov_x + cov_p).abs() < 3.0 * se_sum,
        "cov_x + cov_p = {}",
        cov_x + cov_p
    );
}

#[test]
fn empirical_alice_variance_ignores_channel() {
    let v = 1.4;
    let z4 = four_state_correlation(0.2).unwrap();
    let source = SourceCM::new(v, v, z4).unwrap();
    for (l_ac, eps) in [(5.0, 0.0), (30.0, 0.01)] {
        let link = LinkBudget::extreme_asymmetric(l_ac, eps, eps).unwrap();
        let g = optimal_gain(v, link.eta_b()).unwrap().sqrt();
        let config = McConfig::new(source, source, link, g, 100_000, 52).unwrap();
        let (a1, b1p, _, _) = run_protocol(&config).unwrap();
        let est = estimate_joint_cm(&a1, &b1p).unwrap();
        let z = (est.a - v) / est.se_a;
        assert!(z.abs() < 3.0, "({l_ac},{eps}): z = {z}");
    }
}

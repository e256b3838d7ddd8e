//! Acceptance gate: one test per headline claim, each printing a PASS line
//! and holding to its runtime budget. Reference points are frozen values
//! cross-checked against the independent oracles in `cvmdi-core`.

use std::time::{Duration, Instant};

use cvmdi::find::{
    find_beta_threshold, find_crossing, find_max_distance, find_optimal_vm, CrossingVariable,
};
use cvmdi::mc::build_config;
use cvmdi::scenario::Scenario;
use cvmdi_core::decoy::{decoy_feasibility, decoy_feasibility_closed};
use cvmdi_core::modulation::fock::fock_source_oracle;
use cvmdi_core::{
    entropy_g, equivalent_channel, equivalent_excess_noise, four_state_correlation,
    gaussian_correlation, lambda_weights, mc_validate, optimal_gain, plob_bound,
    generic_symplectic_oracle, symplectic_pair, DetectorModel, JointCM, LinkBudget,
    ModulationScheme,
};

/// splitmix64 stream; deterministic draws without pulling an RNG dependency
/// into the test.
struct Splitmix(u64);

impl Splitmix {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

fn budget(t0: Instant, limit_s: u64, what: &str) {
    let dt = t0.elapsed();
    assert!(
        dt < Duration::from_secs(limit_s),
        "{what} took {dt:?}, budget {limit_s}s"
    );
}

/// Four-state key rate against V_M peaks inside [0.3, 0.5] at every studied
/// distance, the curve is single-peaked on the study grid, and the located
/// optima match the frozen reference points.
#[test]
fn criterion_1_optimal_modulation_variance() {
    let t0 = Instant::now();
    // (distance, frozen V_M*, frozen K at the optimum)
    let cases = [
        (15.0, 0.43635373, 4.0138786e-3),
        (20.0, 0.41750817, 2.5350608e-3),
        (25.0, 0.39745464, 1.4372171e-3),
        (30.0, 0.37459379, 6.2208081e-4),
    ];
    for (d, vm_ref, k_ref) in cases {
        let base = Scenario::dm_default().with_distance(d).unwrap();
        let found = find_optimal_vm(&base, 0.05, 1.5).unwrap();
        assert!(
            (0.3..=0.5).contains(&found.value),
            "D={d}: V_M* = {} outside [0.3, 0.5]",
            found.value
        );
        assert!(
            (found.value - vm_ref).abs() < 1e-3,
            "D={d}: V_M* = {} vs reference {vm_ref}",
            found.value
        );
        let k_at_found = base.with_v_mod(found.value).unwrap().run().unwrap().key_rate;
        assert!(
            (k_at_found - k_ref).abs() < 1e-7,
            "D={d}: K(V_M*) = {k_at_found} vs reference {k_ref}"
        );

        // single interior peak on the 146-point study grid: exactly one
        // rising-to-falling transition after merging flat steps
        let rates: Vec<f64> = (5..=150)
            .map(|i| base.with_v_mod(i as f64 / 100.0).unwrap().run().unwrap().key_rate)
            .collect();
        let mut last_sign = 0i8;
        let mut peaks = 0;
        for w in rates.windows(2) {
            let diff = w[1] - w[0];
            let sign = if diff.abs() <= 1e-12 { 0 } else { diff.signum() as i8 };
            if sign == 0 {
                continue;
            }
            if last_sign > 0 && sign < 0 {
                peaks += 1;
            }
            last_sign = sign;
        }
        assert!(peaks <= 1, "D={d}: {peaks} interior peaks on the V_M grid");
        let argmax = rates
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .unwrap()
            .0;
        let vm_grid = (argmax + 5) as f64 / 100.0;
        assert!((0.3..=0.5).contains(&vm_grid), "D={d}: grid argmax at {vm_grid}");
    }
    budget(t0, 10, "criterion 1");
    println!("PASS criterion 1: optimal V_M in [0.3, 0.5] and single-peaked for D = 15/20/25/30 km");
}

/// Reconciliation-efficiency thresholds sit at the frozen reference points,
/// in the stated windows, and in the stated order: the four-state scheme
/// tolerates much worse reconciliation than the Gaussian baseline.
#[test]
fn criterion_2_beta_thresholds() {
    let t0 = Instant::now();
    let dm = Scenario::dm_default();
    let gm = Scenario::gm_baseline();

    let beta_dm = find_beta_threshold(&dm).unwrap().value;
    let beta_gm = find_beta_threshold(&gm).unwrap().value;
    let crossing = find_crossing(&dm, 40.0, CrossingVariable::Beta).unwrap().value;

    assert!((beta_dm - 0.761).abs() < 0.005, "four-state threshold {beta_dm}");
    assert!((beta_gm - 0.889).abs() < 0.005, "gaussian threshold {beta_gm}");
    assert!((crossing - 0.892).abs() < 0.005, "crossing {crossing}");
    assert!((beta_dm - 0.7633165585).abs() < 1e-6, "four-state pin {beta_dm}");
    assert!((beta_gm - 0.8921492148).abs() < 1e-6, "gaussian pin {beta_gm}");
    assert!((crossing - 0.8929200402).abs() < 1e-5, "crossing pin {crossing}");
    assert!(beta_dm < beta_gm && beta_gm < crossing, "ordering violated");

    // the bisected threshold is the closed-form ratio chi_BE / I_AB
    for (scenario, found) in [(&dm, beta_dm), (&gm, beta_gm)] {
        let r = scenario.run().unwrap();
        let closed = r.chi_be / r.i_ab;
        assert!(
            (found - closed).abs() < 1e-6,
            "threshold {found} vs closed form {closed}"
        );
    }
    budget(t0, 5, "criterion 2");
    println!("PASS criterion 2: beta thresholds 0.763 (four-state) < 0.892 (gaussian) < 0.893 (crossing)");
}

/// The four-state rate overtakes the Gaussian rate near 21 km at both noise
/// levels and stays ahead through 40 km.
#[test]
fn criterion_3_rate_crossing_distance() {
    let t0 = Instant::now();
    let cases = [(0.002, 21.7, 21.533872), (0.003, 21.1, 20.99985)];
    for (eps, window_center, pin) in cases {
        let dm = Scenario::dm_default().with_excess_noise(eps).unwrap();
        let crossing = find_crossing(&dm, 40.0, CrossingVariable::Distance).unwrap().value;
        assert!(
            (crossing - window_center).abs() < 0.5,
            "eps={eps}: crossing {crossing} vs {window_center} +- 0.5"
        );
        assert!((crossing - pin).abs() < 2e-3, "eps={eps}: pin {crossing} vs {pin}");

        let gm = dm.as_gaussian(40.0).unwrap();
        let mut d = crossing + 0.5;
        while d <= 40.0 {
            let k_dm = dm.with_distance(d).unwrap().run().unwrap().key_rate;
            let k_gm = gm.with_distance(d).unwrap().run().unwrap().key_rate;
            assert!(
                k_dm > k_gm,
                "eps={eps}, D={d}: four-state {k_dm} not above gaussian {k_gm}"
            );
            d += 0.25;
        }
    }
    budget(t0, 10, "criterion 3");
    println!("PASS criterion 3: scheme crossing at 21.5 km (eps 0.002) / 21.0 km (eps 0.003), four-state ahead to 40 km");
}

/// Maximum distances order as expected: the four-state scheme reaches
/// farther at beta = 0.9, while the Gaussian baseline wins at short range.
#[test]
fn criterion_4_max_distance_ordering() {
    let t0 = Instant::now();
    let mut found = [[0.0f64; 2]; 2];
    let pins = [[34.642719, 21.69754], [26.446384, 21.0765]];
    for (i, eps) in [0.002, 0.003].into_iter().enumerate() {
        let dm = Scenario::dm_default().with_excess_noise(eps).unwrap();
        let gm = dm.as_gaussian(40.0).unwrap();
        for (j, s) in [&dm, &gm].into_iter().enumerate() {
            let r = find_max_distance(s).unwrap();
            assert!(
                (r.value - pins[i][j]).abs() <= 0.05,
                "eps={eps}, scheme {j}: D_max {} vs pin {}",
                r.value,
                pins[i][j]
            );
            found[i][j] = r.value;
        }
        assert!(
            found[i][0] > found[i][1],
            "eps={eps}: four-state D_max {} not beyond gaussian {}",
            found[i][0],
            found[i][1]
        );
    }
    // more noise, shorter reach, for both schemes
    assert!(found[0][0] > found[1][0] && found[0][1] > found[1][1]);

    // below 10 km the Gaussian baseline is the better scheme
    let dm = Scenario::dm_default();
    let gm = Scenario::gm_baseline();
    for i in 0..=20 {
        let d = 0.5 * i as f64;
        let k_dm = dm.with_distance(d).unwrap().run().unwrap().key_rate;
        let k_gm = gm.with_distance(d).unwrap().run().unwrap().key_rate;
        assert!(k_gm > k_dm, "D={d}: gaussian {k_gm} not above four-state {k_dm}");
    }
    budget(t0, 10, "criterion 4");
    println!("PASS criterion 4: D_max 34.6/21.7 km (eps 0.002) and 26.4/21.1 km (eps 0.003), gaussian ahead below 10 km");
}

/// The closed-form source covariance triple matches the truncated-Fock
/// expectations of the explicitly constructed four-state source to 1e-8.
#[test]
fn criterion_5_fock_oracle_agreement() {
    let t0 = Instant::now();
    let cases = [(0.05, 40), (0.2, 40), (0.5, 50), (1.0, 60)];
    for (alpha_sq, cutoff) in cases {
        let (x, y, z) = fock_source_oracle(f64::sqrt(alpha_sq), cutoff).unwrap();
        let v = 1.0 + 2.0 * alpha_sq;
        let z4 = four_state_correlation(alpha_sq).unwrap();
        assert!((x - v).abs() < 1e-8, "alpha_sq={alpha_sq}: X {x} vs {v}");
        assert!((y - v).abs() < 1e-8, "alpha_sq={alpha_sq}: Y {y} vs {v}");
        assert!((z - z4).abs() < 1e-8, "alpha_sq={alpha_sq}: Z {z} vs {z4}");
    }
    budget(t0, 5, "criterion 5");
    println!("PASS criterion 5: truncated-Fock source oracle matches closed forms to 1e-8");
}

/// Monte-Carlo protocol runs reproduce the analytic covariance within 3
/// standard errors across a transmittance-noise grid, and the four-state
/// source leaves its predicted signature in the b entry.
#[test]
fn criterion_6_monte_carlo_validation() {
    let t0 = Instant::now();
    let n = 1_000_000;
    let mut seed = 1000;
    for d in [5.0, 15.0, 25.0] {
        for eps in [0.0, 0.002, 0.005] {
            seed += 1;
            let link = LinkBudget::extreme_asymmetric(d, eps, eps).unwrap();
            let config = build_config(0.4, link, n, seed, false).unwrap();
            let report = mc_validate(&config).unwrap();
            assert_eq!(report.b_gap_pred, 0.0);
            assert!(
                report.pass,
                "D={d}, eps={eps}: z-scores {:?}",
                report.z_scores
            );
        }
    }

    // four-state Bob: the measured b exceeds the Gaussian-source value by
    // the predicted gap, and the gap is far outside statistical noise
    let link = LinkBudget::extreme_asymmetric(15.0, 0.002, 0.002).unwrap();
    let config = build_config(0.4, link, n, 42, true).unwrap();
    let report = mc_validate(&config).unwrap();
    assert!(
        (report.b_gap_pred - 0.01218291916).abs() < 2e-4,
        "predicted gap {}",
        report.b_gap_pred
    );
    assert!(report.pass, "discrepancy run z-scores {:?}", report.z_scores);
    assert!(
        report.b_gap > 5.0 * report.empirical.se_b,
        "gap {} not significant against se {}",
        report.b_gap,
        report.empirical.se_b
    );
    budget(t0, 60, "criterion 6");
    println!("PASS criterion 6: 3x3 Monte-Carlo grid within 3 sigma; four-state b-gap 0.0122 reproduced");
}

/// The closed-form symplectic spectrum matches a generic eigenvalue solver
/// on 1000 random physical covariance matrices to 1e-10.
#[test]
fn criterion_7_symplectic_oracle() {
    let t0 = Instant::now();
    let mut rng = Splitmix(20_240_817);
    let mut checked = 0;
    while checked < 1000 {
        let a = rng.in_range(1.0, 41.0);
        let b = rng.in_range(1.0, 41.0);
        let c_max = ((a * b - 1.0).max(0.0)).sqrt();
        let c = rng.in_range(-c_max, c_max);
        let Ok(cm) = JointCM::new(a, b, c) else {
            continue;
        };
        let (k1, k2) = symplectic_pair(&cm).unwrap();
        let m = cm.matrix();
        let (o1, o2) = generic_symplectic_oracle(&m).unwrap();
        assert!(
            (k1 - o1).abs() <= 1e-10 * o1.max(1.0),
            "kappa1 {k1} vs oracle {o1} at ({a}, {b}, {c})"
        );
        assert!(
            (k2 - o2).abs() <= 1e-10 * o2.max(1.0),
            "kappa2 {k2} vs oracle {o2} at ({a}, {b}, {c})"
        );
        checked += 1;
    }
    budget(t0, 2, "criterion 7");
    println!("PASS criterion 7: symplectic spectrum matches generic eigensolver on 1000 random states");
}

/// Cross-cutting invariants: weights, correlations, channel reductions,
/// entropy, the repeaterless cap, and decoy feasibility all hold together.
#[test]
fn criterion_8_invariant_suite() {
    let t0 = Instant::now();

    // Schmidt weights are a probability vector; Z4 sits strictly below the
    // Gaussian correlation
    for alpha_sq in [0.01, 0.05, 0.2, 0.5, 1.0, 2.0, 4.0] {
        let lam = lambda_weights(alpha_sq).unwrap().lambda;
        assert!(lam.iter().all(|&l| l >= 0.0));
        assert!((lam.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let z4 = four_state_correlation(alpha_sq).unwrap();
        let zg = gaussian_correlation(1.0 + 2.0 * alpha_sq).unwrap();
        assert!(z4 > 0.0 && z4 < zg);
    }

    // the general-gain excess noise minimizes to the closed form at the
    // optimal gain
    let mut rng = Splitmix(7);
    let det = DetectorModel::ideal();
    for _ in 0..200 {
        let l_ac = rng.in_range(0.0, 40.0);
        let eps = rng.in_range(0.0, 0.05);
        let v_b = rng.in_range(1.0 + 1e-6, 41.0);
        let link = LinkBudget::extreme_asymmetric(l_ac, eps, eps).unwrap();
        let chan = equivalent_channel(&link, v_b, &det).unwrap();
        let g2 = optimal_gain(v_b, link.eta_b()).unwrap();
        let direct = equivalent_excess_noise(&link, g2, v_b).unwrap();
        assert!(
            (chan.eps - direct).abs() <= 1e-9 * direct.max(1.0),
            "closed form {} vs direct {direct}",
            chan.eps
        );
        // nearby gains do not beat the optimum
        for factor in [0.9, 1.1] {
            let other = equivalent_excess_noise(&link, g2 * factor, v_b).unwrap();
            assert!(other >= direct - 1e-12);
        }
    }

    // entropy endpoints and monotonicity
    assert_eq!(entropy_g(0.0).unwrap(), 0.0);
    assert_eq!(entropy_g(1.0).unwrap(), 2.0);
    let mut prev = 0.0;
    for i in 1..=50 {
        let g = entropy_g(i as f64 * 0.1).unwrap();
        assert!(g > prev);
        prev = g;
    }

    // no scenario beats the repeaterless cap
    for d in 1..=40 {
        for s in [Scenario::dm_default(), Scenario::gm_baseline()] {
            let r = s.with_distance(d as f64).unwrap().run().unwrap();
            let eta = 10f64.powf(-0.02 * d as f64);
            assert!((r.plob - plob_bound(eta).unwrap()).abs() < 1e-12);
            assert!(r.key_rate < r.plob, "D={d}: rate {} above cap {}", r.key_rate, r.plob);
            assert!(r.i_ab >= 0.0 && r.chi_be >= 0.0);
        }
    }

    // decoy feasibility: bisection agrees with the closed form, and more
    // source energy leaves less decoy room
    let closed_weak = decoy_feasibility_closed(0.5, 0.01, 40).unwrap();
    let bisect_weak = decoy_feasibility(0.5, 0.01, 40).unwrap();
    assert!((closed_weak - bisect_weak).abs() < 1e-4);
    let p_small = decoy_feasibility_closed(0.1, 0.1, 40).unwrap();
    let p_mid = decoy_feasibility_closed(0.2, 0.2, 40).unwrap();
    let p_large = decoy_feasibility_closed(0.5, 0.5, 40).unwrap();
    assert!(p_small > p_mid && p_mid > p_large, "{p_small} > {p_mid} > {p_large}");
    assert!((p_mid - 0.833778782).abs() < 2e-6);

    // the four-state source is never more correlated than physicality allows
    let scheme = ModulationScheme::four_state(0.2).unwrap();
    let s = cvmdi_core::source_covariance(&scheme).unwrap();
    assert!(JointCM::new(s.x_var, s.y_var, s.z_corr).is_ok());

    budget(t0, 10, "criterion 8");
    println!("PASS criterion 8: invariant suite (weights, channel reduction, entropy, cap, decoy) holds");
}

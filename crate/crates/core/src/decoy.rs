//! Decoy-state construction: mixture weights, positivity feasibility of the
//! decoy decomposition in truncated Fock space, and reproducible pulse
//! labeling.
//!
//! Feasibility is read at the density-operator level: the Gaussian reference
//! σ_G is the thermal state τ(n̄) matching the average photon number, the key
//! state is the four-state mixture ρ₄, and a decoy decomposition with key
//! weight p exists iff τ(n̄) − p·ρ₄ is positive semidefinite.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulation::fock::{required_cutoff, TAIL_TOL};
use crate::modulation::lambda_weights;

/// Bisection tolerance on the feasible key weight.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Eigenvalue slack treated as zero when testing positivity.
const EIG_SLACK: f64 = 1e-12;

/// Chi-square critical value at significance 0.01 with 2 degrees of freedom,
/// for three-category label frequency tests.
pub const CHI2_CRIT_2DOF_P01: f64 = 9.21034;

/// Pulse-type assignment for one transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseLabel {
    Key,
    Decoy,
    Estimate,
}

impl PulseLabel {
    /// One-byte encoding for binary export.
    pub fn as_byte(self) -> u8 {
        match self {
            PulseLabel::Key => b'k',
            PulseLabel::Decoy => b'd',
            PulseLabel::Estimate => b'e',
        }
    }
}

/// Weights and source parameters of the key/decoy/estimation mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoyPlan {
    /// Key-state weight within the non-estimation pulses.
    pub p: f64,
    /// Estimation fraction.
    pub p_est: f64,
    pub alpha_sq: f64,
    /// Mean photon number of the Gaussian reference state.
    pub nbar: f64,
    pub seed: u64,
}

impl DecoyPlan {
    pub fn new(p: f64, p_est: f64, alpha_sq: f64, nbar: f64, seed: u64) -> Result<Self> {
        for (name, v) in [("p", p), ("p_est", p_est)] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        for (name, v) in [("alpha_sq", alpha_sq), ("nbar", nbar)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            p,
            p_est,
            alpha_sq,
            nbar,
            seed,
        })
    }

    /// Plan with the reference state's photon number matched to the key
    /// states (n̄ = α²), making the average intensities indistinguishable.
    pub fn matched(p: f64, p_est: f64, alpha_sq: f64, seed: u64) -> Result<Self> {
        Self::new(p, p_est, alpha_sq, alpha_sq, seed)
    }

    pub fn weights(&self) -> (f64, f64, f64) {
        mixture_weights(self.p, self.p_est).expect("validated on construction")
    }
}

/// Label probabilities (key, decoy, estimate) = (p(1−p_est), (1−p)(1−p_est),
/// p_est). The key weight is recomputed as 1 minus the combined remainder,
/// so w_key + (w_decoy + w_est) returns exactly 1.
pub fn mixture_weights(p: f64, p_est: f64) -> Result<(f64, f64, f64)> {
    for (name, v) in [("p", p), ("p_est", p_est)] {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} must be in [0, 1], got {v}")));
        }
    }
    let w_decoy = (1.0 - p) * (1.0 - p_est);
    let w_est = p_est;
    Ok((1.0 - (w_decoy + w_est), w_decoy, w_est))
}

/// Diagonal of the thermal state τ(n̄): p_n = n̄ⁿ/(1+n̄)^{n+1}.
fn thermal_diag(nbar: f64, cutoff: usize) -> Vec<f64> {
    let ratio = nbar / (1.0 + nbar);
    let mut diag = vec![0.0; cutoff + 1];
    let mut term = 1.0 / (1.0 + nbar);
    for d in diag.iter_mut() {
        *d = term;
        term *= ratio;
    }
    diag
}

fn check_decoy_inputs(alpha_sq: f64, nbar: f64, cutoff: usize) -> Result<()> {
    for (name, v) in [("alpha_sq", alpha_sq), ("nbar", nbar)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    // thermal tail mass beyond the cutoff is (n̄/(1+n̄))^(cutoff+1)
    let thermal_tail = (nbar / (1.0 + nbar)).powi(cutoff as i32 + 1);
    if thermal_tail >= TAIL_TOL {
        let needed = (TAIL_TOL.ln() / (nbar / (1.0 + nbar)).ln()).ceil() as usize;
        return Err(Error::Truncation {
            cutoff,
            required: needed.max(required_cutoff(alpha_sq, TAIL_TOL)),
        });
    }
    Ok(())
}

/// Minimum eigenvalue of τ(n̄) − p·ρ₄ over the truncated space. Both states
/// are block-diagonal in photon number mod 4, so each block is diagonalized
/// separately.
fn residual_min_eigenvalue(p: f64, alpha_sq: f64, nbar: f64, cutoff: usize) -> Result<f64> {
    let tau = thermal_diag(nbar, cutoff);
    let rho = crate::modulation::fock::four_state_density(alpha_sq.sqrt(), cutoff)?;
    let mut min_eig = f64::INFINITY;
    for r in 0..4 {
        let idx: Vec<usize> = (r..=cutoff).step_by(4).collect();
        let m = idx.len();
        let mut block = DMatrix::<f64>::zeros(m, m);
        for (bi, &i) in idx.iter().enumerate() {
            for (bj, &j) in idx.iter().enumerate() {
                block[(bi, bj)] = -p * rho[(i, j)];
            }
            block[(bi, bi)] += tau[i];
        }
        let eig = SymmetricEigen::new(block).eigenvalues;
        min_eig = eig.iter().copied().fold(min_eig, f64::min);
    }
    Ok(min_eig)
}

/// Largest key weight p such that τ(n̄) − p·ρ₄(α) stays positive
/// semidefinite, found by bisection to [`FEASIBILITY_TOL`] on p.
///
/// When no weight above the nominal tolerance is feasible the bracket is
/// tightened three more decades before declaring infeasibility, so a genuine
/// sub-1e−6 feasible region is still reported rather than rounded to zero.
pub fn decoy_feasibility(alpha_sq: f64, nbar: f64, cutoff: usize) -> Result<f64> {
    check_decoy_inputs(alpha_sq, nbar, cutoff)?;
    let feasible = |p: f64| -> Result<bool> {
        Ok(residual_min_eigenvalue(p, alpha_sq, nbar, cutoff)? >= -EIG_SLACK)
    };
    if feasible(1.0)? {
        return Ok(1.0);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut tol = FEASIBILITY_TOL;
    loop {
        while hi - lo > tol {
            let mid = (lo + hi) / 2.0;
            if feasible(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo > 0.0 || tol <= 1e-9 {
            break;
        }
        tol /= 1000.0;
    }
    if lo == 0.0 {
        return Err(Error::Infeasible(format!(
            "no decoy decomposition exists for alpha_sq={alpha_sq}, nbar={nbar}"
        )));
    }
    Ok(lo)
}

/// Closed-form feasibility bound: within each photon-number block the
/// residual is a diagonal state minus a rank-one term, so positivity reduces
/// to p·λ_k·⟨φ_k|τ⁻¹|φ_k⟩ ≤ 1, and p_max = min_k over the four blocks.
///
/// Independent cross-check for [`decoy_feasibility`].
pub fn decoy_feasibility_closed(alpha_sq: f64, nbar: f64, cutoff: usize) -> Result<f64> {
    check_decoy_inputs(alpha_sq, nbar, cutoff)?;
    let tau = thermal_diag(nbar, cutoff);
    let lam = lambda_weights(alpha_sq)?.lambda;
    let mut p_max = f64::INFINITY;
    for k in 0..4 {
        let phi = crate::modulation::fock::fock_phi_state(k, alpha_sq.sqrt(), cutoff)?;
        let quad: f64 = (k..=cutoff)
            .step_by(4)
            .map(|n| phi.amplitudes[n].re.powi(2) / tau[n])
            .sum();
        p_max = p_max.min(1.0 / (lam[k] * quad));
    }
    Ok(p_max.min(1.0))
}

/// Deterministic key/decoy/estimate label stream for `n` pulses.
pub fn sample_labels(plan: &DecoyPlan, n: usize) -> Result<Vec<PulseLabel>> {
    if n == 0 {
        return Err(Error::Domain("label count must be at least 1".into()));
    }
    let (w_key, _, w_est) = plan.weights();
    let mut rng = ChaCha12Rng::seed_from_u64(plan.seed);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        labels.push(if u < w_est {
            PulseLabel::Estimate
        } else if u < w_est + w_key {
            PulseLabel::Key
        } else {
            PulseLabel::Decoy
        });
    }
    Ok(labels)
}

/// Pearson statistic of observed label counts against the plan's weights.
/// Compare against [`CHI2_CRIT_2DOF_P01`].
pub fn chi2_statistic(counts: &[usize; 3], weights: (f64, f64, f64)) -> f64 {
    let n: usize = counts.iter().sum();
    let expected = [
        weights.0 * n as f64,
        weights.1 * n as f64,
        weights.2 * n as f64,
    ];
    counts
        .iter()
        .zip(expected.iter())
        .filter(|(_, &e)| e > 0.0)
        .map(|(&o, &e)| (o as f64 - e) * (o as f64 - e) / e)
        .sum()
}

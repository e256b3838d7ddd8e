//! Truncated-Fock construction of the four-state source.
//!
//! Everything here is deliberately brute force: states are explicit
//! coefficient vectors, operators are explicit matrix elements, and
//! expectation values are plain contractions. The closed forms in the parent
//! module are validated against these.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::lambda_weights;
use crate::error::{Error, Result};

/// Truncation-tail budget: the Poisson weight allowed beyond the cutoff.
pub const TAIL_TOL: f64 = 1e-12;

/// Default photon-number cutoff, adequate for α² ≤ 1 under [`TAIL_TOL`].
pub const DEFAULT_CUTOFF: usize = 40;

/// State vector over photon numbers 0..=cutoff, exactly normalized after
/// truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub amplitudes: DVector<Complex64>,
    pub cutoff: usize,
}

impl FockVector {
    /// Inner product ⟨self|other⟩ (conjugating self).
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Poisson(mean) weight strictly above `cutoff`.
fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut pmf = (-mean).exp();
    let mut cum = pmf;
    for n in 1..=cutoff {
        pmf *= mean / n as f64;
        cum += pmf;
    }
    (1.0 - cum).max(0.0)
}

/// Smallest cutoff (at least 4) whose Poisson tail at this mean photon number
/// is below `tol`.
pub fn required_cutoff(mean: f64, tol: f64) -> usize {
    let mut m = 4;
    while poisson_tail(mean, m) >= tol {
        m += 1;
        if m > 100_000 {
            break; // unreachable for finite mean; cap defensively
        }
    }
    m
}

/// Smallest adequate cutoff under [`TAIL_TOL`], never below [`DEFAULT_CUTOFF`].
pub fn auto_cutoff(mean: f64) -> usize {
    required_cutoff(mean, TAIL_TOL).max(DEFAULT_CUTOFF)
}

fn check_cutoff(mean: f64, cutoff: usize) -> Result<()> {
    if cutoff < 4 {
        return Err(Error::Domain(format!("cutoff must be >= 4, got {cutoff}")));
    }
    if poisson_tail(mean, cutoff) >= TAIL_TOL {
        return Err(Error::Truncation {
            cutoff,
            required: required_cutoff(mean, TAIL_TOL),
        });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    Ok(())
}

/// Normalized coefficients of |φ_k⟩: support on n ≡ k (mod 4) with
/// coefficients ∝ (−1)^j α^{4j+k}/√((4j+k)!).
pub(crate) fn phi_coeffs(k: usize, alpha: f64, cutoff: usize) -> Result<Vec<f64>> {
    if k > 3 {
        return Err(Error::Domain(format!("k must be in 0..=3, got {k}")));
    }
    check_alpha(alpha)?;
    check_cutoff(alpha * alpha, cutoff)?;
    let mut coeffs = vec![0.0; cutoff + 1];
    // term for n = k: α^k/√(k!)
    let mut term = alpha.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>().sqrt();
    let alpha4 = alpha.powi(4);
    let mut n = k;
    while n <= cutoff {
        coeffs[n] = term;
        let nf = n as f64;
        term *= -alpha4 / ((nf + 1.0) * (nf + 2.0) * (nf + 3.0) * (nf + 4.0)).sqrt();
        n += 4;
    }
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Truncation {
            cutoff,
            required: required_cutoff(alpha * alpha, TAIL_TOL),
        });
    }
    for c in &mut coeffs {
        *c /= norm;
    }
    Ok(coeffs)
}

/// Schmidt-basis state |φ_k⟩ in the truncated Fock space.
pub fn fock_phi_state(k: usize, alpha: f64, cutoff: usize) -> Result<FockVector> {
    let coeffs = phi_coeffs(k, alpha, cutoff)?;
    Ok(FockVector {
        amplitudes: DVector::from_iterator(
            cutoff + 1,
            coeffs.into_iter().map(|c| Complex64::new(c, 0.0)),
        ),
        cutoff,
    })
}

/// Non-Gaussian signal state |ψ_k⟩ = (1/2) Σ_m e^{i(1+2k)mπ/4} |φ_m⟩.
///
/// The 4×4 coefficient matrix is unitary, so the |ψ_k⟩ are orthonormal like
/// the |φ_m⟩.
pub fn fock_psi_state(k: usize, alpha: f64, cutoff: usize) -> Result<FockVector> {
    if k > 3 {
        return Err(Error::Domain(format!("k must be in 0..=3, got {k}")));
    }
    let mut amplitudes = DVector::from_element(cutoff + 1, Complex64::new(0.0, 0.0));
    for m in 0..4 {
        let phase = Complex64::from_polar(
            0.5,
            (1 + 2 * k) as f64 * m as f64 * std::f64::consts::FRAC_PI_4,
        );
        let phi = phi_coeffs(m, alpha, cutoff)?;
        for (n, c) in phi.iter().enumerate() {
            amplitudes[n] += phase * c;
        }
    }
    Ok(FockVector { amplitudes, cutoff })
}

/// Coherent state |γ⟩, normalized after truncation.
pub fn coherent_state(gamma: Complex64, cutoff: usize) -> Result<FockVector> {
    check_cutoff(gamma.norm_sqr(), cutoff)?;
    let mut amplitudes = DVector::from_element(cutoff + 1, Complex64::new(0.0, 0.0));
    let mut term = Complex64::new(1.0, 0.0);
    amplitudes[0] = term;
    for n in 1..=cutoff {
        term *= gamma / (n as f64).sqrt();
        amplitudes[n] = term;
    }
    let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in amplitudes.iter_mut() {
        *c /= norm;
    }
    Ok(FockVector { amplitudes, cutoff })
}

/// Brute-force covariance triple of the two-mode source state
/// |Ψ₄⟩ = Σ_k √λ_k |φ_k⟩|φ_k⟩, via explicit ladder-operator contractions.
///
/// Returns (X, Y, Z) with X = ⟨x₁²⟩, Y = ⟨x₂²⟩, Z = ⟨x₁x₂⟩, keeping the
/// ⟨a²⟩ and ⟨a₁†a₂⟩ terms that the closed forms drop for structural reasons,
/// so agreement is a genuine check rather than a restatement.
pub fn fock_source_oracle(alpha: f64, cutoff: usize) -> Result<(f64, f64, f64)> {
    check_alpha(alpha)?;
    let lam = lambda_weights(alpha * alpha)?.lambda;
    let d = cutoff + 1;
    // two-mode coefficients M[n, m] = Σ_k √λ_k φ_k[n] φ_k[m]
    let mut m_mat = DMatrix::<f64>::zeros(d, d);
    for k in 0..4 {
        let phi = phi_coeffs(k, alpha, cutoff)?;
        let w = lam[k].sqrt();
        for n in (k..d).step_by(4) {
            for m in (k..d).step_by(4) {
                m_mat[(n, m)] += w * phi[n] * phi[m];
            }
        }
    }
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    let mut a1_sq = 0.0;
    let mut a2_sq = 0.0;
    let mut a1a2 = 0.0;
    let mut a1dag_a2 = 0.0;
    for n in 0..d {
        for m in 0..d {
            let c = m_mat[(n, m)];
            if c == 0.0 {
                continue;
            }
            n1 += n as f64 * c * c;
            n2 += m as f64 * c * c;
            if n + 1 < d && m + 1 < d {
                a1a2 += c * (((n + 1) * (m + 1)) as f64).sqrt() * m_mat[(n + 1, m + 1)];
            }
            if n + 2 < d {
                a1_sq += c * (((n + 1) * (n + 2)) as f64).sqrt() * m_mat[(n + 2, m)];
            }
            if m + 2 < d {
                a2_sq += c * (((m + 1) * (m + 2)) as f64).sqrt() * m_mat[(n, m + 2)];
            }
            if n > 0 && m + 1 < d {
                a1dag_a2 += c * ((n * (m + 1)) as f64).sqrt() * m_mat[(n - 1, m + 1)];
            }
        }
    }
    let x = 1.0 + 2.0 * n1 + 2.0 * a1_sq;
    let y = 1.0 + 2.0 * n2 + 2.0 * a2_sq;
    let z = 2.0 * a1a2 + 2.0 * a1dag_a2;
    Ok((x, y, z))
}

/// Density matrix ρ₄ = Σ_k λ_k |φ_k⟩⟨φ_k| in the truncated Fock basis.
///
/// Real symmetric, positive semidefinite, unit trace; equal to the uniform
/// mixture of the four coherent states α·e^{i(2k+1)π/4}.
pub fn four_state_density(alpha: f64, cutoff: usize) -> Result<DMatrix<f64>> {
    check_alpha(alpha)?;
    let lam = lambda_weights(alpha * alpha)?.lambda;
    let d = cutoff + 1;
    let mut rho = DMatrix::<f64>::zeros(d, d);
    for k in 0..4 {
        let phi = phi_coeffs(k, alpha, cutoff)?;
        for n in (k..d).step_by(4) {
            for m in (k..d).step_by(4) {
                rho[(n, m)] += lam[k] * phi[n] * phi[m];
            }
        }
    }
    Ok(rho)
}

/// Uniform mixture (1/4) Σ_k |α_k⟩⟨α_k| of the four coherent states,
/// α_k = α·e^{i(2k+1)π/4}: the preparation-side route to ρ₄.
pub fn coherent_mixture_density(alpha: f64, cutoff: usize) -> Result<DMatrix<Complex64>> {
    check_alpha(alpha)?;
    let d = cutoff + 1;
    let mut rho = DMatrix::<Complex64>::zeros(d, d);
    for k in 0..4 {
        let gamma = Complex64::from_polar(alpha, (2 * k + 1) as f64 * std::f64::consts::FRAC_PI_4);
        let v = coherent_state(gamma, cutoff)?;
        for n in 0..d {
            for m in 0..d {
                rho[(n, m)] += 0.25 * v.amplitudes[n] * v.amplitudes[m].conj();
            }
        }
    }
    Ok(rho)
}

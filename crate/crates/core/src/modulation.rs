//! Source models for the two modulation schemes.
//!
//! The four-state source is the uniform mixture of the coherent states
//! `α·exp(i(2k+1)π/4)`, k = 0..3. Its entanglement-based form is a two-mode
//! pure state with Schmidt weights `λ_k` and quadrature correlation `Z₄`; the
//! Gaussian source is the two-mode squeezed state with correlation
//! `Z_G = √(V²−1)`. Both yield a covariance triple (X, Y, Z) with
//! X = Y = V = 1 + V_M.
//!
//! Quadrature convention throughout the crate: `x = a + a†`, `p = i(a† − a)`,
//! so the vacuum has unit variance and a coherent state `|γ⟩` has mean
//! `(2·Re γ, 2·Im γ)`.
//!
//! The closed forms here are cross-checked by the truncated-Fock machinery in
//! [`fock`], which builds the states explicitly and evaluates the same
//! quantities as operator expectations.

pub mod fock;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which source the protocol runs: four coherent states or Gaussian modulation.
///
/// For the four-state scheme the modulation variance is `V_M = 2α²`; for the
/// Gaussian scheme `V_M` is free. Both sources have quadrature variance
/// `V = 1 + V_M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModulationScheme {
    /// Four coherent states of amplitude α; stores α².
    FourState { alpha_sq: f64 },
    /// Gaussian modulation of variance V_M.
    Gaussian { v_mod: f64 },
}

impl ModulationScheme {
    /// Four-state scheme from the coherent amplitude squared.
    pub fn four_state(alpha_sq: f64) -> Result<Self> {
        if !alpha_sq.is_finite() || alpha_sq < 0.0 {
            return Err(Error::Domain(format!(
                "alpha_sq must be finite and >= 0, got {alpha_sq}"
            )));
        }
        Ok(ModulationScheme::FourState { alpha_sq })
    }

    /// Four-state scheme from the modulation variance, using V_M = 2α².
    pub fn four_state_from_vmod(v_mod: f64) -> Result<Self> {
        Self::four_state(v_mod / 2.0)
    }

    /// Gaussian scheme of modulation variance V_M.
    pub fn gaussian(v_mod: f64) -> Result<Self> {
        if !v_mod.is_finite() || v_mod < 0.0 {
            return Err(Error::Domain(format!(
                "v_mod must be finite and >= 0, got {v_mod}"
            )));
        }
        Ok(ModulationScheme::Gaussian { v_mod })
    }

    /// Modulation variance V_M (2α² for the four-state scheme).
    pub fn v_mod(&self) -> f64 {
        match *self {
            ModulationScheme::FourState { alpha_sq } => 2.0 * alpha_sq,
            ModulationScheme::Gaussian { v_mod } => v_mod,
        }
    }

    /// Quadrature variance V = 1 + V_M.
    pub fn v(&self) -> f64 {
        1.0 + self.v_mod()
    }

    /// α² when this is a four-state scheme.
    pub fn alpha_sq(&self) -> Option<f64> {
        match *self {
            ModulationScheme::FourState { alpha_sq } => Some(alpha_sq),
            ModulationScheme::Gaussian { .. } => None,
        }
    }

    /// Same scheme with a different modulation variance.
    pub fn with_v_mod(&self, v_mod: f64) -> Result<Self> {
        match self {
            ModulationScheme::FourState { .. } => Self::four_state_from_vmod(v_mod),
            ModulationScheme::Gaussian { .. } => Self::gaussian(v_mod),
        }
    }
}

/// Schmidt weights of the four-state average state; the eigenvalues of ρ₄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchmidtWeights {
    pub lambda: [f64; 4],
}

/// cosh x − cos x without cancellation: series 2·Σ x^{4j+2}/(4j+2)! for small x.
fn cosh_minus_cos(x: f64) -> f64 {
    if x >= 1.0 {
        return x.cosh() - x.cos();
    }
    let x2 = x * x;
    let x4 = x2 * x2;
    // 2·(x²/2! + x⁶/6! + x¹⁰/10! + x¹⁴/14!); next term < 1e-19 relative for x < 1
    2.0 * x2 * (0.5 + x4 * (1.0 / 720.0 + x4 * (1.0 / 3_628_800.0 + x4 / 87_178_291_200.0)))
}

/// sinh x − sin x without cancellation: series 2·Σ x^{4j+3}/(4j+3)! for small x.
fn sinh_minus_sin(x: f64) -> f64 {
    if x >= 1.0 {
        return x.sinh() - x.sin();
    }
    let x2 = x * x;
    let x4 = x2 * x2;
    2.0 * x2
        * x
        * (1.0 / 6.0 + x4 * (1.0 / 5040.0 + x4 * (1.0 / 39_916_800.0 + x4 / 1_307_674_368_000.0)))
}

/// Schmidt weights of the four-state source at a given α².
///
/// λ_{0,2} = e^{−α²}/2 · (cosh α² ± cos α²), λ_{1,3} = e^{−α²}/2 · (sinh α² ± sin α²).
/// The weights are a probability vector: non-negative and summing to 1. They
/// are not sorted; λ₁ overtakes λ₀ once α² grows past about 1.03.
pub fn lambda_weights(alpha_sq: f64) -> Result<SchmidtWeights> {
    if !alpha_sq.is_finite() || alpha_sq < 0.0 {
        return Err(Error::Domain(format!(
            "alpha_sq must be finite and >= 0, got {alpha_sq}"
        )));
    }
    let x = alpha_sq;
    let pre = 0.5 * (-x).exp();
    Ok(SchmidtWeights {
        lambda: [
            pre * (x.cosh() + x.cos()),
            pre * (x.sinh() + x.sin()),
            pre * cosh_minus_cos(x),
            pre * sinh_minus_sin(x),
        ],
    })
}

/// Quadrature correlation Z₄ of the four-state source.
///
/// Z₄ = 2α² Σ_k λ_{k−1}^{3/2} λ_k^{−1/2} with the index cyclic (λ_{−1} ≡ λ₃).
/// Satisfies 0 < Z₄ < Z_G = √((1+2α²)² − 1) for every α² > 0, approaching
/// Z_G (and 2α) as α² → 0.
pub fn four_state_correlation(alpha_sq: f64) -> Result<f64> {
    if !(alpha_sq > 0.0) || !alpha_sq.is_finite() {
        return Err(Error::Domain(format!(
            "alpha_sq must be positive (lambda weights vanish at alpha_sq = 0), got {alpha_sq}"
        )));
    }
    let lam = lambda_weights(alpha_sq)?.lambda;
    let mut sum = 0.0;
    for k in 0..4 {
        let prev = lam[(k + 3) % 4];
        sum += prev.powf(1.5) / lam[k].sqrt();
    }
    Ok(2.0 * alpha_sq * sum)
}

/// Correlation √(V²−1) of a two-mode squeezed state of variance V.
pub fn gaussian_correlation(v: f64) -> Result<f64> {
    if !v.is_finite() || v < 1.0 {
        return Err(Error::Domain(format!("variance must be >= 1, got {v}")));
    }
    Ok((v * v - 1.0).sqrt())
}

/// Covariance triple of a two-mode source: blocks X·I, Y·I, and Z·σ_z.
///
/// The x-quadratures correlate with +Z and the p-quadratures with −Z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceCM {
    pub x_var: f64,
    pub y_var: f64,
    pub z_corr: f64,
}

impl SourceCM {
    /// Validated constructor: both variances at least 1 and the smaller
    /// symplectic eigenvalue at least 1 − 1e−9.
    pub fn new(x_var: f64, y_var: f64, z_corr: f64) -> Result<Self> {
        let cm = SourceCM {
            x_var,
            y_var,
            z_corr,
        };
        if !(x_var.is_finite() && y_var.is_finite() && z_corr.is_finite()) {
            return Err(Error::Domain("source CM entries must be finite".into()));
        }
        if x_var < 1.0 - 1e-9 || y_var < 1.0 - 1e-9 {
            return Err(Error::Unphysical(format!(
                "mode variance below vacuum: X={x_var}, Y={y_var}"
            )));
        }
        let a = x_var * x_var + y_var * y_var - 2.0 * z_corr * z_corr;
        let b = x_var * y_var - z_corr * z_corr;
        let disc = a * a - 4.0 * b * b;
        if disc < -1e-9 * a.max(1.0).powi(2) || b <= 0.0 {
            return Err(Error::Unphysical(format!(
                "no real symplectic spectrum for (X, Y, Z) = ({x_var}, {y_var}, {z_corr})"
            )));
        }
        let nu_large = ((a + disc.max(0.0).sqrt()) / 2.0).sqrt();
        let nu_small = b / nu_large;
        if nu_small < 1.0 - 1e-9 {
            return Err(Error::Unphysical(format!(
                "symplectic eigenvalue {nu_small} below 1 for (X, Y, Z) = ({x_var}, {y_var}, {z_corr})"
            )));
        }
        Ok(cm)
    }
}

/// Source covariance triple of a modulation scheme.
///
/// Four-state: (1+2α², 1+2α², Z₄); Gaussian: (V, V, √(V²−1)).
pub fn source_covariance(scheme: &ModulationScheme) -> Result<SourceCM> {
    match *scheme {
        ModulationScheme::FourState { alpha_sq } => {
            let v = 1.0 + 2.0 * alpha_sq;
            let z = if alpha_sq == 0.0 {
                0.0
            } else {
                four_state_correlation(alpha_sq)?
            };
            SourceCM::new(v, v, z)
        }
        ModulationScheme::Gaussian { v_mod } => {
            let v = 1.0 + v_mod;
            SourceCM::new(v, v, gaussian_correlation(v)?)
        }
    }
}

//! Secret key rate of the reduced one-way channel under reverse
//! reconciliation, plus the repeaterless capacity benchmark.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::{equivalent_channel, DetectorModel, EquivalentChannel, LinkBudget};
use crate::error::{Error, Result};
use crate::modulation::{source_covariance, ModulationScheme, SourceCM};

/// Two-mode covariance matrix in block form
/// [[a·I₂, c·σ_z], [c·σ_z, b·I₂]], stored by its three parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointCM {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl JointCM {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        if a < 1.0 - 1e-9 || b < 1.0 - 1e-9 {
            return Err(Error::Unphysical(format!(
                "mode variances below the vacuum bound: a={a}, b={b}"
            )));
        }
        let (_, k2) = kappa_pair_raw(a, b, c)?;
        if k2 < 1.0 - 1e-9 {
            return Err(Error::Unphysical(format!(
                "symplectic eigenvalue {k2} below 1 for (a={a}, b={b}, c={c})"
            )));
        }
        Ok(Self { a, b, c })
    }

    /// Explicit 4×4 matrix in (x₁, p₁, x₂, p₂) ordering.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            4,
            4,
            &[
                self.a, 0.0, self.c, 0.0, //
                0.0, self.a, 0.0, -self.c, //
                self.c, 0.0, self.b, 0.0, //
                0.0, -self.c, 0.0, self.b, //
            ],
        )
    }
}

/// κ₁ ≥ κ₂ from A = a²+b²−2c², B = ab−c². κ₂ comes from B/κ₁ rather than the
/// cancellation-prone (A−√·)/2 branch.
pub(crate) fn kappa_pair_raw(a: f64, b: f64, c: f64) -> Result<(f64, f64)> {
    let big_a = a * a + b * b - 2.0 * c * c;
    let big_b = a * b - c * c;
    if big_b <= 0.0 {
        return Err(Error::Unphysical(format!(
            "ab - c^2 = {big_b} must be positive"
        )));
    }
    let disc = big_a * big_a - 4.0 * big_b * big_b;
    let scale = big_a.abs().max(1.0);
    if disc < -1e-9 * scale * scale {
        return Err(Error::Unphysical(format!(
            "negative symplectic discriminant {disc}"
        )));
    }
    let k1 = ((big_a + disc.max(0.0).sqrt()) / 2.0).sqrt();
    Ok((k1, big_b / k1))
}

/// Everything the protocol analysis produces for one scenario, in bits per
/// pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub i_ab: f64,
    /// (κ₁, κ₂, κ₃): joint pair and heterodyne-conditioned eigenvalue.
    pub kappa: [f64; 3],
    pub chi_be: f64,
    /// β·i_ab − chi_be; negative means no key.
    pub key_rate: f64,
    /// Repeaterless bound over the same total line; infinite at zero length.
    pub plob: f64,
}

/// Post-measurement joint covariance: (a, b, c) = (X, η(Y+χ), √η·Z) with
/// χ = χ'_t when detector noise is included, else χ_t.
pub fn assemble_joint_cm(
    source: &SourceCM,
    chan: &EquivalentChannel,
    use_detector_noise: bool,
) -> Result<JointCM> {
    let chi = if use_detector_noise {
        chan.chi_t_prime
    } else {
        chan.chi_t
    };
    JointCM::new(
        source.x_var,
        chan.eta * (source.y_var + chi),
        chan.eta.sqrt() * source.z_corr,
    )
}

/// Heterodyne-heterodyne mutual information
/// I = log₂[(a+1) / (a+1 − c²/(b+1))] in bits.
pub fn mutual_information(cm: &JointCM) -> Result<f64> {
    let denom = cm.a + 1.0 - cm.c * cm.c / (cm.b + 1.0);
    if denom <= 0.0 {
        return Err(Error::Unphysical(format!(
            "c^2 >= (a+1)(b+1) for (a={}, b={}, c={})",
            cm.a, cm.b, cm.c
        )));
    }
    Ok(((cm.a + 1.0) / denom).log2())
}

/// Symplectic eigenvalues (κ₁, κ₂) of the joint state, κ₁ ≥ κ₂.
pub fn symplectic_pair(cm: &JointCM) -> Result<(f64, f64)> {
    kappa_pair_raw(cm.a, cm.b, cm.c)
}

/// Symplectic eigenvalue κ₃ = a − c²/(b+1) of Alice's mode conditioned on a
/// heterodyne outcome on the other mode.
pub fn conditional_eigenvalue(cm: &JointCM) -> Result<f64> {
    let k3 = cm.a - cm.c * cm.c / (cm.b + 1.0);
    if k3 < 1.0 - 1e-9 {
        return Err(Error::Unphysical(format!(
            "conditional eigenvalue {k3} below 1"
        )));
    }
    Ok(k3)
}

/// Bosonic entropy kernel G(x) = (x+1)log₂(x+1) − x·log₂x, in bits.
///
/// Evaluated via ln_1p so the frequent κ−1 ~ 1e−3 regime keeps full
/// precision; tiny negatives from eigenvalue round-off are clamped to 0.
pub fn entropy_g(x: f64) -> Result<f64> {
    if !x.is_finite() || x < -1e-12 {
        return Err(Error::Domain(format!("entropy argument must be >= 0, got {x}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(((x + 1.0) * x.ln_1p() - x * x.ln()) / std::f64::consts::LN_2)
}

/// Holevo bound χ_BE = G[(κ₁−1)/2] + G[(κ₂−1)/2] − G[(κ₃−1)/2] for reverse
/// reconciliation.
pub fn holevo_bound(cm: &JointCM) -> Result<f64> {
    let (k1, k2) = symplectic_pair(cm)?;
    let k3 = conditional_eigenvalue(cm)?;
    // eigenvalues are validated to ≥ 1−1e−9; half-gaps clamp at 0
    let g = |k: f64| entropy_g(((k - 1.0) / 2.0).max(0.0));
    let chi = g(k1)? + g(k2)? - g(k3)?;
    // pure-state cancellation can leave round-off dust below zero
    if chi < 0.0 && chi > -1e-9 {
        return Ok(0.0);
    }
    Ok(chi)
}

/// Repeaterless secret-key capacity −log₂(1−η) of a lossy line.
pub fn plob_bound(eta_channel: f64) -> Result<f64> {
    if !eta_channel.is_finite() || eta_channel <= 0.0 {
        return Err(Error::Domain(format!(
            "transmittance must be in (0, 1), got {eta_channel}"
        )));
    }
    if eta_channel >= 1.0 {
        return Err(Error::Domain(
            "transmittance 1 has unbounded capacity".into(),
        ));
    }
    Ok(-(-eta_channel).ln_1p() / std::f64::consts::LN_2)
}

/// Full pipeline: source, equivalent channel (detector noise included),
/// joint state, and rate K = β·I_AB − χ_BE.
pub fn secret_key_rate(
    scheme: &ModulationScheme,
    link: &LinkBudget,
    det: &DetectorModel,
    beta: f64,
) -> Result<KeyRateReport> {
    if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!("beta must be in [0, 1], got {beta}")));
    }
    let source = source_covariance(scheme)?;
    let chan = equivalent_channel(link, source.y_var, det)?;
    let cm = assemble_joint_cm(&source, &chan, true)?;
    let i_ab = mutual_information(&cm)?;
    let (k1, k2) = symplectic_pair(&cm)?;
    let k3 = conditional_eigenvalue(&cm)?;
    let chi_be = holevo_bound(&cm)?;
    let eta_line =
        crate::channel::transmittance_from_distance(link.l_ac + link.l_bc, link.loss_db_per_km)?;
    let plob = if eta_line >= 1.0 {
        f64::INFINITY
    } else {
        plob_bound(eta_line)?
    };
    Ok(KeyRateReport {
        i_ab,
        kappa: [k1, k2, k3],
        chi_be,
        key_rate: beta * i_ab - chi_be,
        plob,
    })
}

/// Independent symplectic spectrum of any 4×4 covariance matrix: moduli of
/// the eigenvalues of Ωγ, returned as (larger, smaller).
///
/// Brute-force check for [`symplectic_pair`]; makes no use of the block
/// structure.
pub fn generic_symplectic_oracle(cm4: &DMatrix<f64>) -> Result<(f64, f64)> {
    if cm4.nrows() != 4 || cm4.ncols() != 4 {
        return Err(Error::Domain(format!(
            "expected a 4x4 matrix, got {}x{}",
            cm4.nrows(),
            cm4.ncols()
        )));
    }
    let asym = (cm4 - cm4.transpose()).abs().max();
    if asym > 1e-9 {
        return Err(Error::Domain(format!(
            "matrix must be symmetric, max asymmetry {asym}"
        )));
    }
    // Ω for (x₁, p₁, x₂, p₂): block-diag of [[0, 1], [-1, 0]]
    let mut omega = DMatrix::<f64>::zeros(4, 4);
    for m in 0..2 {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    let eig = (omega * cm4).complex_eigenvalues();
    let mut moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // spectrum is {±iν₁, ±iν₂}; average the duplicated moduli
    Ok((
        (moduli[2] + moduli[3]) / 2.0,
        (moduli[0] + moduli[1]) / 2.0,
    ))
}

//! Reduction of the two-link relay topology to an equivalent one-way channel.
//!
//! Alice and Bob each send one mode to an intermediate relay; the relay's
//! Bell measurement plus Bob's displacement collapse the pair of fiber links
//! into a single thermal-loss channel with transmittance η and excess noise
//! ε, both functions of the link budget and Bob's displacement gain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard telecom fiber attenuation in dB/km.
pub const DEFAULT_LOSS_DB_PER_KM: f64 = 0.2;

/// Fiber lengths and excess noise of the two links into the relay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Alice-relay fiber length in km.
    pub l_ac: f64,
    /// Bob-relay fiber length in km.
    pub l_bc: f64,
    /// Fiber attenuation in dB/km.
    pub loss_db_per_km: f64,
    /// Excess noise on Alice's link, shot-noise units.
    pub eps_a: f64,
    /// Excess noise on Bob's link, shot-noise units.
    pub eps_b: f64,
}

impl LinkBudget {
    pub fn new(
        l_ac: f64,
        l_bc: f64,
        loss_db_per_km: f64,
        eps_a: f64,
        eps_b: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("l_ac", l_ac),
            ("l_bc", l_bc),
            ("loss_db_per_km", loss_db_per_km),
            ("eps_a", eps_a),
            ("eps_b", eps_b),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(Self {
            l_ac,
            l_bc,
            loss_db_per_km,
            eps_a,
            eps_b,
        })
    }

    /// Best-case placement: the relay sits at Bob's side (zero-length Bob
    /// link) with standard fiber loss on Alice's link.
    pub fn extreme_asymmetric(l_ac: f64, eps_a: f64, eps_b: f64) -> Result<Self> {
        Self::new(l_ac, 0.0, DEFAULT_LOSS_DB_PER_KM, eps_a, eps_b)
    }

    /// Transmittance of Alice's link.
    pub fn eta_a(&self) -> f64 {
        transmittance_from_distance(self.l_ac, self.loss_db_per_km)
            .expect("validated on construction")
    }

    /// Transmittance of Bob's link.
    pub fn eta_b(&self) -> f64 {
        transmittance_from_distance(self.l_bc, self.loss_db_per_km)
            .expect("validated on construction")
    }
}

/// Homodyne detector imperfections at the relay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Quantum efficiency, in (0, 1].
    pub eta_hom: f64,
    /// Electronic noise variance, shot-noise units.
    pub v_el: f64,
}

impl DetectorModel {
    pub fn new(eta_hom: f64, v_el: f64) -> Result<Self> {
        if !eta_hom.is_finite() || eta_hom <= 0.0 || eta_hom > 1.0 {
            return Err(Error::Domain(format!(
                "eta_hom must be in (0, 1], got {eta_hom}"
            )));
        }
        if !v_el.is_finite() || v_el < 0.0 {
            return Err(Error::Domain(format!(
                "v_el must be finite and non-negative, got {v_el}"
            )));
        }
        Ok(Self { eta_hom, v_el })
    }

    pub fn ideal() -> Self {
        Self {
            eta_hom: 1.0,
            v_el: 0.0,
        }
    }

    /// Detection-added noise χ_hom = (v_el + 1 − η_hom)/η_hom. Zero for an
    /// ideal detector.
    pub fn chi_hom(&self) -> f64 {
        (self.v_el + 1.0 - self.eta_hom) / self.eta_hom
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Parameters of the equivalent one-way channel at the optimal displacement
/// gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalentChannel {
    /// Squared displacement gain g².
    pub gain_sq: f64,
    /// Equivalent transmittance η = η_A g²/2.
    pub eta: f64,
    /// Equivalent excess noise ε.
    pub eps: f64,
    /// Channel-added noise χ_t = (1−η)/η + ε with ideal detectors.
    pub chi_t: f64,
    /// Total noise χ'_t = χ_t + 2χ_hom/η_A including detector imperfections.
    pub chi_t_prime: f64,
}

/// Fiber transmittance 10^(−loss·L/10) for a length in km.
pub fn transmittance_from_distance(l_km: f64, loss_db_per_km: f64) -> Result<f64> {
    if !l_km.is_finite() || l_km < 0.0 {
        return Err(Error::Domain(format!(
            "distance must be finite and non-negative, got {l_km}"
        )));
    }
    if !loss_db_per_km.is_finite() || loss_db_per_km < 0.0 {
        return Err(Error::Domain(format!(
            "loss must be finite and non-negative, got {loss_db_per_km}"
        )));
    }
    Ok(10f64.powf(-loss_db_per_km * l_km / 10.0))
}

/// Channel-added noise referred to the input: χ = (1−η)/η + ε.
pub fn line_noise(eta: f64, eps: f64) -> Result<f64> {
    if !eta.is_finite() || eta <= 0.0 || eta > 1.0 {
        return Err(Error::Domain(format!("eta must be in (0, 1], got {eta}")));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::Domain(format!(
            "eps must be finite and non-negative, got {eps}"
        )));
    }
    Ok((1.0 - eta) / eta + eps)
}

/// Gain g² = 2(V_B−1)/(η_B(V_B+1)) minimizing the equivalent excess noise
/// over Bob's displacement.
pub fn optimal_gain(v_b: f64, eta_b: f64) -> Result<f64> {
    if !v_b.is_finite() || v_b < 1.0 {
        return Err(Error::Domain(format!("v_b must be >= 1, got {v_b}")));
    }
    if !eta_b.is_finite() || eta_b <= 0.0 || eta_b > 1.0 {
        return Err(Error::Domain(format!(
            "eta_b must be in (0, 1], got {eta_b}"
        )));
    }
    Ok(2.0 * (v_b - 1.0) / (eta_b * (v_b + 1.0)))
}

/// Equivalent excess noise at an arbitrary displacement gain:
///
/// ε = 1 + χ_A + (η_B/η_A)(χ_B − 1)
///       + (η_B/η_A)·(√(2/(η_B g²))·√(V_B−1) − √(V_B+1))²
///
/// with χ_A, χ_B the per-link line noises.
pub fn equivalent_excess_noise(link: &LinkBudget, gain_sq: f64, v_b: f64) -> Result<f64> {
    if !gain_sq.is_finite() || gain_sq <= 0.0 {
        return Err(Error::Domain(format!(
            "gain_sq must be positive, got {gain_sq}"
        )));
    }
    if !v_b.is_finite() || v_b < 1.0 {
        return Err(Error::Domain(format!("v_b must be >= 1, got {v_b}")));
    }
    let eta_a = link.eta_a();
    let eta_b = link.eta_b();
    let chi_a = line_noise(eta_a, link.eps_a)?;
    let chi_b = line_noise(eta_b, link.eps_b)?;
    let mismatch = (2.0 / (eta_b * gain_sq)).sqrt() * (v_b - 1.0).sqrt() - (v_b + 1.0).sqrt();
    Ok(1.0 + chi_a + (eta_b / eta_a) * (chi_b - 1.0 + mismatch * mismatch))
}

/// Equivalent one-way channel at the optimal gain. `v_b` is Bob's mode
/// variance and must exceed 1, else the optimal gain degenerates to zero
/// transmittance.
pub fn equivalent_channel(
    link: &LinkBudget,
    v_b: f64,
    det: &DetectorModel,
) -> Result<EquivalentChannel> {
    if !v_b.is_finite() || v_b <= 1.0 {
        return Err(Error::Domain(format!("v_b must exceed 1, got {v_b}")));
    }
    let eta_a = link.eta_a();
    let eta_b = link.eta_b();
    let gain_sq = optimal_gain(v_b, eta_b)?;
    let eta = eta_a * gain_sq / 2.0;
    // closed form of the excess noise at the optimal gain
    let eps = (eta_b / eta_a) * (link.eps_b - 2.0) + link.eps_a + 2.0 / eta_a;
    let chi_t = line_noise(eta, eps)?;
    let chi_t_prime = chi_t + 2.0 * det.chi_hom() / eta_a;
    Ok(EquivalentChannel {
        gain_sq,
        eta,
        eps,
        chi_t,
        chi_t_prime,
    })
}

//! One named protocol configuration and the single-point evaluation.

use cvmdi_core::{
    secret_key_rate, DetectorModel, KeyRateReport, LinkBudget, ModulationScheme,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Modulation family selector for command-line flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    FourState,
    Gaussian,
}

/// Complete input set for one key-rate evaluation.
///
/// Fields are public for serde, so a value deserialized from a config file
/// may violate component invariants; [`Scenario::validate`] re-runs every
/// constructor check and must pass before the scenario is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub scheme: ModulationScheme,
    pub link: LinkBudget,
    pub detector: DetectorModel,
    /// Reconciliation efficiency in [0, 1].
    pub beta: f64,
    #[serde(default)]
    pub label: String,
}

impl Scenario {
    pub fn new(
        scheme: ModulationScheme,
        link: LinkBudget,
        detector: DetectorModel,
        beta: f64,
    ) -> Result<Self, CliError> {
        let s = Scenario { scheme, link, detector, beta, label: String::new() };
        s.validate()?;
        Ok(s)
    }

    /// Four-state defaults: V_M = 0.4 at 20 km, 0.2% excess noise per link,
    /// ideal detector, beta = 0.9.
    pub fn dm_default() -> Self {
        Scenario {
            scheme: ModulationScheme::four_state_from_vmod(0.4).expect("valid v_mod"),
            link: LinkBudget::extreme_asymmetric(20.0, 0.002, 0.002).expect("valid link"),
            detector: DetectorModel::ideal(),
            beta: 0.9,
            label: String::new(),
        }
    }

    /// Gaussian baseline: V_M = 40 with the same link and detector defaults.
    pub fn gm_baseline() -> Self {
        Scenario {
            scheme: ModulationScheme::gaussian(40.0).expect("valid v_mod"),
            ..Scenario::dm_default()
        }
    }

    /// Re-checks every component invariant. Required after deserializing,
    /// since serde fills public fields without running constructors.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.scheme {
            ModulationScheme::FourState { alpha_sq } => {
                ModulationScheme::four_state(alpha_sq)?;
            }
            ModulationScheme::Gaussian { v_mod } => {
                ModulationScheme::gaussian(v_mod)?;
            }
        }
        LinkBudget::new(
            self.link.l_ac,
            self.link.l_bc,
            self.link.loss_db_per_km,
            self.link.eps_a,
            self.link.eps_b,
        )?;
        DetectorModel::new(self.detector.eta_hom, self.detector.v_el)?;
        if !self.beta.is_finite() || !(0.0..=1.0).contains(&self.beta) {
            return Err(CliError::Config(format!(
                "beta must be in [0, 1], got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// Same scenario at a different Alice-relay distance.
    pub fn with_distance(&self, l_ac: f64) -> Result<Self, CliError> {
        let mut s = self.clone();
        s.link = LinkBudget::new(
            l_ac,
            self.link.l_bc,
            self.link.loss_db_per_km,
            self.link.eps_a,
            self.link.eps_b,
        )?;
        Ok(s)
    }

    /// Same scenario at a different modulation variance.
    pub fn with_v_mod(&self, v_mod: f64) -> Result<Self, CliError> {
        let mut s = self.clone();
        s.scheme = self.scheme.with_v_mod(v_mod)?;
        Ok(s)
    }

    /// Same scenario at a different reconciliation efficiency.
    pub fn with_beta(&self, beta: f64) -> Result<Self, CliError> {
        if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
            return Err(CliError::Config(format!("beta must be in [0, 1], got {beta}")));
        }
        let mut s = self.clone();
        s.beta = beta;
        Ok(s)
    }

    /// Same scenario with both links set to the given excess noise.
    pub fn with_excess_noise(&self, eps: f64) -> Result<Self, CliError> {
        let mut s = self.clone();
        s.link = LinkBudget::new(
            self.link.l_ac,
            self.link.l_bc,
            self.link.loss_db_per_km,
            eps,
            eps,
        )?;
        Ok(s)
    }

    /// Swaps in a Gaussian scheme, keeping link, detector, and beta.
    pub fn as_gaussian(&self, v_mod: f64) -> Result<Self, CliError> {
        let mut s = self.clone();
        s.scheme = ModulationScheme::gaussian(v_mod)?;
        Ok(s)
    }

    pub fn run(&self) -> Result<KeyRateReport, CliError> {
        run_scenario(self)
    }
}

/// Evaluates one scenario end to end.
pub fn run_scenario(scenario: &Scenario) -> Result<KeyRateReport, CliError> {
    scenario.validate()?;
    Ok(secret_key_rate(
        &scenario.scheme,
        &scenario.link,
        &scenario.detector,
        scenario.beta,
    )?)
}

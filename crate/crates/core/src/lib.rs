//! Asymptotic secret key rates for relay-based CV-QKD with four-state or
//! Gaussian modulation.
//!
//! The pipeline runs source → channel reduction → joint covariance → rates:
//!
//! - [`modulation`]: source statistics of the two schemes, with a truncated
//!   Fock-space oracle validating every closed form.
//! - [`channel`]: reduction of the two fiber links plus relay to an
//!   equivalent one-way thermal-loss channel at the optimal displacement
//!   gain.
//! - [`keyrate`]: mutual information, Holevo bound, secret key rate, and the
//!   repeaterless capacity benchmark.
//! - [`decoy`]: decoy-state mixture weights, operator-positivity feasibility,
//!   and reproducible pulse labeling.
//! - [`mcsim`]: Monte-Carlo validation of the analytic covariance reduction.
//!
//! All variances are in shot-noise units (vacuum quadrature variance = 1,
//! quadrature convention x = a + a†).

pub mod channel;
pub mod decoy;
pub mod error;
pub mod keyrate;
pub mod mcsim;
pub mod modulation;

pub use channel::{
    equivalent_channel, equivalent_excess_noise, line_noise, optimal_gain,
    transmittance_from_distance, DetectorModel, EquivalentChannel, LinkBudget,
    DEFAULT_LOSS_DB_PER_KM,
};
pub use decoy::{decoy_feasibility, mixture_weights, sample_labels, DecoyPlan, PulseLabel};
pub use error::{Error, Result};
pub use keyrate::{
    assemble_joint_cm, conditional_eigenvalue, entropy_g, generic_symplectic_oracle, holevo_bound,
    mutual_information, plob_bound, secret_key_rate, symplectic_pair, JointCM, KeyRateReport,
};
pub use mcsim::{mc_validate, run_protocol, McConfig, McReport};
pub use modulation::{
    four_state_correlation, gaussian_correlation, lambda_weights, source_covariance,
    ModulationScheme, SchmidtWeights, SourceCM,
};

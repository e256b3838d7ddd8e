//! Scenario layer and output formatting on top of `cvmdi-core`.
//!
//! A [`Scenario`] bundles one complete protocol configuration (modulation,
//! link budget, detector, reconciliation efficiency). Everything else in this
//! crate derives from it: single evaluations, parameter sweeps, root/optimum
//! finders, and the canned figure tables.

pub mod emit;
pub mod figures;
pub mod find;
pub mod mc;
pub mod scenario;
pub mod sweep;

pub use emit::{format_sig9, round_sig9};
pub use find::{FindTarget, FinderResult};
pub use scenario::{run_scenario, Scenario, SchemeKind};
pub use sweep::{run_sweep, SweepRow, SweepSpec, SweepVariable};

/// Error type for the scenario layer. Core errors pass through unchanged so
/// exit-code mapping can see them.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cvmdi_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Config(String),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    /// Process exit code: 3 for infeasible searches, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_infeasible() => 3,
            _ => 2,
        }
    }
}

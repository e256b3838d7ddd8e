use thiserror::Error;

/// Error type shared by every stage of the pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Fock-space cutoff too small to hold the truncation tail below tolerance.
    #[error("cutoff {cutoff} leaves a truncation tail above tolerance; need at least {required}")]
    Truncation { cutoff: usize, required: usize },
    /// A state or covariance matrix violates a physicality bound.
    #[error("unphysical state: {0}")]
    Unphysical(String),
    /// A search or feasibility problem has no solution in the given range.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// Paired sample streams differ in length.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that mean "no solution exists", as opposed to bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_))
    }
}

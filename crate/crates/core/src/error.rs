//! Error type shared by the numeric and optimizer layers.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// Input outside the range an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector/matrix shapes disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The eigensolver did not reach its off-diagonal tolerance within the
    /// sweep budget.
    #[error("eigendecomposition did not converge for dim {dim} within {sweeps} sweeps")]
    EigenConvergence { dim: usize, sweeps: usize },

    /// A fractional step was requested before any step populated the
    /// previous iterate.
    #[error("previous iterate is uninitialized; run a bootstrap step first")]
    UninitializedPrevious,

    /// Configuration failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A statistical check was asked to run on fewer seeds than it needs.
    #[error("insufficient seeds: needed {needed}, got {got}")]
    InsufficientSeeds { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, CoreError>;

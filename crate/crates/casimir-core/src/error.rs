//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by numerical kernels and model constructors.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Argument lies on the branch cut of the exponential integral.
    #[error("argument on the branch cut (negative real axis): {0}")]
    BranchCut(String),

    /// A special-function evaluation could not reach its internal tolerance.
    #[error("accuracy not reached: {0}")]
    AccuracyNotReached(String),

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    /// Monte Carlo region descriptor is invalid or degenerate.
    #[error("invalid integration region: {0}")]
    InvalidRegion(String),

    /// A model specification violates its invariants.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// A tabulated distribution is unusable (negative bins, no normalization,
    /// or effectively delta-like so that the averaged noise density diverges).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Nonlinear least-squares fit failed to converge or produced an
    /// unphysical parameter set.
    #[error("fit failed: {0}")]
    FitFailure(String),

    /// Malformed input file (CSV/JSON interchange formats).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

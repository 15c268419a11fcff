//! Error types shared across the library.

use thiserror::Error;

/// Errors raised by model evaluation, estimation, and input design.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A model or oracle evaluation produced a non-finite entry.
    #[error("non-finite {what} at coordinate {coord}: {value}")]
    NonFiniteEval {
        /// What was being evaluated ("model output", "jacobian", "oracle output").
        what: &'static str,
        /// Index of the offending output/entry (row-major for matrices).
        coord: usize,
        /// The offending value.
        value: f64,
    },

    /// A vector or matrix had an unexpected dimension.
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A covariance that must be positive definite failed its Cholesky
    /// factorization even after jitter.
    #[error("calibration error: {what} is not positive definite")]
    NotPositiveDefinite { what: &'static str },

    /// The secular-equation solve for the trust-region step did not converge.
    #[error("trust-region solver did not converge after {iters} bisection steps")]
    SecularNonConvergence { iters: usize },

    /// Input design diverged: an ascent iterate left any reasonable domain.
    #[error("input design did not converge: iterate norm {norm:.3e} exceeds 1e6")]
    DesignDiverged { norm: f64 },

    /// No multi-start ascent produced a finite objective value.
    #[error("input design failed: no start produced a finite objective")]
    DesignFailed,
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

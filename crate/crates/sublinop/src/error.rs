//! Crate-wide error type.

/// Errors produced by library operations.
///
/// The CLI maps `DimensionMismatch`, `Validation`, and `Parse` to exit code 2
/// (bad input) and `Convergence` / `Inconsistency` to exit code 3 (numerical
/// failure).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two operands live in different matrix or vector dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A precondition on the input data is violated.
    #[error("invalid input: {0}")]
    Validation(String),

    /// Malformed external data (JSON spec, CSV grid, matrix string).
    #[error("parse error: {0}")]
    Parse(String),

    /// An iteration cap was exceeded before reaching its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A self-verification that must hold by construction failed.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

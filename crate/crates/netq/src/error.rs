//! Crate-wide error type.
//!
//! Variants are grouped by how a caller should react: `InvalidParameter`
//! for rejectable user input, `ContractViolation` for API misuse such as
//! mismatched shapes, `Domain` for evaluation at points where an operation
//! is undefined (for example boundary strategies), and `Numerical` for
//! failures that arise mid-computation and carry the step at which they
//! occurred.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A user-supplied parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Structured input violates a documented precondition (shape,
    /// symmetry, missing entries).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// An operation was evaluated at a point outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation produced non-finite values; `step` is the iteration
    /// at which the failure was detected.
    #[error("numerical failure at step {step}: {message}")]
    Numerical { message: String, step: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

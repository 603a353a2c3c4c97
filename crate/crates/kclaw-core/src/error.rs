//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by exact-arithmetic kernels, builders and verifiers.
#[derive(Debug, Error)]
pub enum Error {
    /// A polynomial argument was identically zero where a nonzero one is required.
    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    /// A real root was requested but the polynomial has none.
    #[error("polynomial has no real roots")]
    NoRealRoots,

    /// Exact division left a nonzero remainder.
    #[error("{0} is not an exact root (nonzero remainder after division)")]
    InexactRoot(String),

    /// Matrix or polynomial dimensions do not match the operation's contract.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter is outside the domain an operation is defined on.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// An enumeration or expansion would exceed the configured term cap.
    #[error("term cap exceeded: {needed} terms needed, cap is {cap}")]
    CapExceeded { needed: u128, cap: u128 },

    /// Text input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// An internal consistency check failed; this indicates a bug, not bad input.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

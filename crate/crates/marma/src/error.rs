//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by construction, filtering, estimation and forecasting.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector or matrix dimensions are inconsistent with the model layout.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A recursion or likelihood term became non-finite at the given
    /// (zero-based) time index.
    #[error("non-finite {quantity} at index {index}")]
    NonFinite {
        quantity: &'static str,
        index: usize,
    },

    /// The data admit no meaningful fit (e.g. a constant series).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// The conditional information matrix is numerically singular; no
    /// standard errors can be reported.
    #[error("singular conditional information matrix")]
    SingularInformation,

    /// A configuration value or option is invalid.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by solvers and constructors.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An integrand or observable evaluated to a non-finite value.
    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    /// A branch-following solver lost the root it was tracking,
    /// usually a sign of quadrature under-resolution.
    #[error("root lost at beta = {beta}: {context}")]
    RootLost { beta: f64, context: String },

    /// Failed to parse or validate an externally supplied specification.
    #[error("bad specification: {0}")]
    BadSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

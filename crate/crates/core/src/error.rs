//! Error type shared by all library modules.

use thiserror::Error;

/// Errors produced by scene construction, region selection and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Operand shapes do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix that must be (numerically) Hermitian is not.
    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),

    /// A direct factorization failed; the system is singular or indefinite.
    #[error("singular or indefinite system: {0}")]
    Singular(String),

    /// An iterative solver could not produce a usable result.
    #[error("solver failure: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the operation's domain (bad parameters, violated preconditions).
    #[error("domain error: {0}")]
    Domain(String),

    /// Iterative method failed to converge; carries whatever was computed.
    #[error("no convergence after {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        partial: Vec<Complex64>,
    },

    /// Non-finite or otherwise unusable numerical result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Requested problem exceeds a configured size limit.
    #[error("resource limit: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

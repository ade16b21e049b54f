use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Parameter outside the documented domain.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Value not representable in f64.
    #[error("range error: {0}")]
    Range(String),

    /// A numerical routine failed to produce a trustworthy value.
    #[error("numerical error: {message} ({diagnostics})")]
    Numerical { message: String, diagnostics: String },

    /// Iterative refinement hit its resolution cap.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Caller violated a documented precondition.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Moment system has no acceptable nonnegative solution.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("io error: {0}")]
    Io(String),

    /// Internal invariant broken.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn numerical(msg: impl Into<String>, diag: impl Into<String>) -> Self {
        Error::Numerical { message: msg.into(), diagnostics: diag.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The variants map one-to-one onto the CLI exit codes: usage and domain
/// problems are caller mistakes, capacity errors mean a size guard tripped,
/// and the numerical variants mean a computation could not be trusted.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("branch error: {0}")]
    Branch(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e}): {context}")]
    Convergence {
        iterations: usize,
        residual: f64,
        context: String,
        trajectory: Vec<[f64; 3]>,
    },

    #[error("numerical integrity: {0}")]
    NumericalIntegrity(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Domain(_) | Error::Parse(_) => 2,
            Error::Capacity(_) => 3,
            Error::Branch(_) | Error::Convergence { .. } | Error::NumericalIntegrity(_) => 4,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

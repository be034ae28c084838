use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: fields live on different grids")]
    GridMismatch,

    #[error("{context}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        context: String,
        iterations: usize,
        residual: f64,
    },

    #[error("{context}: operator is not symmetric positive definite (curvature {curvature:.3e})")]
    NotSpd { context: String, curvature: f64 },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("malformed field file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Prefix the context of an iterative-solver failure, e.g. "S_b solve".
    pub fn context(self, label: &str) -> Self {
        match self {
            Error::NotConverged {
                context,
                iterations,
                residual,
            } => Error::NotConverged {
                context: format!("{label}: {context}"),
                iterations,
                residual,
            },
            Error::NotSpd { context, curvature } => Error::NotSpd {
                context: format!("{label}: {context}"),
                curvature,
            },
            other => other,
        }
    }
}

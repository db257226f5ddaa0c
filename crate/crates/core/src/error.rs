use std::fmt;

/// Errors raised by graph construction, controllers, and the simulation harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("no gain configured for edge ({0}, {1})")]
    MissingEdgeGain(usize, usize),

    #[error("singular Hessian in {context}: {requirement}")]
    SingularHessian {
        context: &'static str,
        requirement: &'static str,
    },

    #[error("matrix is not positive definite ({what}, smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite {
        what: &'static str,
        min_eigenvalue: f64,
    },

    #[error("identical Hessians required: agents {0} and {1} differ")]
    NonIdenticalHessians(usize, usize),

    #[error("collision between agents {i} and {j} at t = {t:.6}")]
    Collision { i: usize, j: usize, t: f64 },

    #[error("non-finite state at step {step} (t = {t:.6})")]
    NonFinite { step: usize, t: f64 },

    #[error("invalid scenario at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(path: impl fmt::Display, message: impl fmt::Display) -> Self {
        Error::Validation {
            path: path.to_string(),
            message: message.to_string(),
        }
    }

    /// True for errors that come from a bad scenario rather than from a run that
    /// went wrong at runtime.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. } | Error::Json(_) | Error::TooFewNodes(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

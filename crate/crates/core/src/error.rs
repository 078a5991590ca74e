use thiserror::Error;

/// Errors raised across the solver, sampler and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("custom noise table has no entry for mode {0}")]
    MissingMode(i64),

    #[error("cannot project resolution {from} onto larger resolution {to}")]
    InvalidResolution { from: usize, to: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("resolution mismatch: expected N={expected}, dt={expected_dt}, got N={got}, dt={got_dt}")]
    ResolutionMismatch {
        expected: usize,
        expected_dt: f64,
        got: usize,
        got_dt: f64,
    },

    #[error("L2 norm {norm:e} exceeded blowup threshold at step {step}")]
    DiagnosticBlowup { step: usize, norm: f64 },

    #[error("convergence ladder needs at least 2 levels, got {0}")]
    InsufficientLevels(usize),

    #[error("degenerate points for slope fit: {0}")]
    DegeneratePoints(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

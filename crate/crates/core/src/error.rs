use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("x = {x} exceeds the admissible maximum {max_x} for this (eps, delta, D, r, t)")]
    XOutOfRange { x: u64, max_x: u64 },

    #[error("theorem-mode column budget evaluates to {value:.6} < 1 at this t; use explicit mode")]
    InfeasibleScale { value: f64 },

    #[error("theorem-mode column budget exp({ln_value:.3}) does not fit an exact integer count")]
    ScaleTooLarge { ln_value: f64 },

    #[error("initial estimator {value:.6} is not below the violated-set budget {budget:.6}")]
    InitialEstimator { value: f64, budget: f64 },

    #[error("estimator consistency check failed: {0}")]
    Consistency(String),

    #[error("column deletion removed every column")]
    EmptyAfterDeletion,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("exact oracle refused: {0} undetermined entries (limit 20)")]
    OracleTooLarge(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

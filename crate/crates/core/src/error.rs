use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("too few points: {found} (need at least {required})")]
    TooSmall { found: usize, required: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("no sharp features: skeleton is empty at the chosen threshold")]
    NoSharpFeatures,

    #[error("no curves: {0}")]
    NoCurves(String),

    #[error("parameter {u} outside curve domain [{start}, {end}]")]
    Domain { u: f64, start: f64, end: f64 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

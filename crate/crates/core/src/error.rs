use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent p must be positive and finite, got {0}")]
    InvalidExponent(f64),
    #[error("grid size {0} must be a power of two and at least 4")]
    InvalidGridSize(usize),
    #[error("degree {degree} needs at least {needed} samples, grid has {size}")]
    DegreeTooLarge {
        degree: usize,
        needed: usize,
        size: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hypothesis violated for {id}: {reason}")]
    Hypothesis { id: String, reason: String },
    #[error("a rough function needs an exact Fourier rule for a positive-order Weyl derivative")]
    MissingFourierRule,
    #[error("no exact derivative of order {alpha} is known for {function}")]
    MissingDerivative { function: String, alpha: f64 },
    #[error("need at least {needed} points for a rate fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("rate fit needs strictly positive data, got ({x}, {y})")]
    NonPositiveData { x: f64, y: f64 },
    #[error("empty sweep: {0}")]
    EmptySweep(String),
    #[error("unknown theorem id {id:?}; did you mean one of: {suggestions}")]
    UnknownTheorem { id: String, suggestions: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("non-integrable weight: N + a = {0} must be positive")]
    NonIntegrableWeight(f64),
    #[error("insufficient decay: {0}")]
    InsufficientDecay(String),
    #[error("solver failure after {} iterations: {message}", history.len())]
    SolverFailure { message: String, history: Vec<f64> },
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    #[error("consistency failure: {0}")]
    ConsistencyFailure(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlraError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("enumeration of {count} candidates exceeds budget {budget}")]
    OracleInfeasible { count: f64, budget: u64 },
    #[error("invalid state: {0}")]
    State(String),
    #[error("incompatible sketch configurations: {0}")]
    Merge(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, SlraError>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(SlraError::Parameter(msg.into()))
}

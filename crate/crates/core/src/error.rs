use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("sampling error: non-finite value {value} at x = {x}")]
    Sampling { x: f64, value: f64 },
    #[error("operator error: {0}")]
    Operator(String),
    #[error("dynamics error at t = {t}: {reason}")]
    Dynamics { t: f64, reason: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

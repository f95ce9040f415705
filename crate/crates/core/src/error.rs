use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("time {t} is outside the domain {domain}")]
    Domain { t: f64, domain: String },

    #[error("evaluation at t = {t} hits the terminal singularity at T = {horizon}")]
    Singularity { t: f64, horizon: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid target specification: {0}")]
    InvalidTarget(String),

    #[error("unsupported scenario: {0}")]
    Unsupported(String),

    #[error("a price path is required for stochastic targets")]
    MissingPath,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised while validating or building controllers, plants, filters and configs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid fractional order {0}")]
    InvalidOrder(f64),
    #[error("invalid frequency band [{low}, {high}]: need 0 < low < high")]
    InvalidBand { low: f64, high: f64 },
    #[error("filter half-order must be at least 1")]
    InvalidFilterOrder,
    #[error("invalid sample period {0}")]
    InvalidStep(f64),
    #[error("invalid plant: {0}")]
    InvalidPlant(String),
    #[error("invalid controller: {0}")]
    InvalidController(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid tuner configuration: {0}")]
    InvalidTuner(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

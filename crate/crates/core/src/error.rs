use thiserror::Error;

/// Errors produced across the search engine, workload, and harness layers.
#[derive(Debug, Error)]
pub enum NemoError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("workload has not been calibrated")]
    Uncalibrated,

    #[error("training reached {accuracy:.4} validation accuracy after {epochs} epochs (need {target:.2})")]
    TrainingFailed {
        accuracy: f64,
        epochs: usize,
        target: f64,
    },

    #[error("search space has {size} configurations, limit is {limit}")]
    SpaceTooLarge { size: f64, limit: f64 },

    #[error("unknown benchmark problem `{0}`")]
    UnknownProblem(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = NemoError> = std::result::Result<T, E>;

impl NemoError {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        NemoError::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        NemoError::Config(msg.into())
    }
}

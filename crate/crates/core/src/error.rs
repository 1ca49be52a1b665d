use thiserror::Error;

/// Error type shared across the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),

    #[error("invalid value for parameter `{param}`: {reason}")]
    InvalidValue { param: String, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("mismatched objective sets: {0}")]
    ObjectiveMismatch(String),

    #[error("invalid reference point: {0}")]
    InvalidReference(String),

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("unmatched trial id {0}")]
    UnmatchedTrial(u64),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("negative cost in evaluation record")]
    NegativeCost,

    #[error("no successful evaluations")]
    NoSuccesses,

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("evaluator version mismatch: peer speaks v{0}")]
    VersionMismatch(u64),

    #[error("storage error: {0}")]
    Storage(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

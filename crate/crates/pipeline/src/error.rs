use claimdrift_core::ConsolidatedLabel;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no valid records in corpus")]
    EmptyCorpus,

    #[error("class {label} has only {count} records; need at least {floor}")]
    InsufficientClass { label: ConsolidatedLabel, count: usize, floor: usize },

    #[error("persona registry has {size} personas; need at least 2")]
    RegistryTooSmall { size: usize },

    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),

    #[error("every node of round {round} failed")]
    RoundCollapsed { round: u8 },

    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] claimdrift_core::CoreError),

    #[error(transparent)]
    Gateway(#[from] claimdrift_gateway::GatewayError),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl PipelineError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        PipelineError::Io { path: path.into(), source }
    }
}

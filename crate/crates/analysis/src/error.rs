use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("point {index} has dimension {got}, expected {expected}")]
    PointDimensionMismatch { index: usize, expected: usize, got: usize },

    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },

    #[error("prediction references unknown node {0}")]
    UnresolvedNode(String),

    #[error("empty input")]
    EmptyInput,

    #[error("judge endpoint error: {0}")]
    JudgeEndpoint(String),

    #[error(transparent)]
    Gateway(#[from] claimdrift_gateway::GatewayError),

    #[error(transparent)]
    Metric(#[from] claimdrift_metrics::MetricError),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("text has no sentences or words")]
    DegenerateText,

    #[error("empty input")]
    EmptyInput,

    #[error("confusion table has no counts")]
    EmptyTable,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },

    #[error("rating {value} outside the declared bins")]
    RatingOutsideBins { value: i64 },

    #[error("no embedding stored for node {node_id}")]
    MissingEmbedding { node_id: String },

    #[error("token scores must be log probabilities (≤ 0), got {value}")]
    PositiveLogProb { value: f64 },
}

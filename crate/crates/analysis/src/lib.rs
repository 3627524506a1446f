//! Embedding-space analysis and downstream evaluation: density-based
//! clustering, deterministic 2-D projection, pluggable judge adapters
//! (sentiment, morality, feasibility), prompt-strategy classification, and
//! the classifier-robustness report.
//!
//! The numeric kernels (clustering, projection) are generic over the
//! scalar type via [`num_traits`]; the pipeline instantiates them at `f64`
//! ([`claimdrift_metrics::Scalar`]).

mod classify;
mod error;
mod hdbscan;
mod judge;
mod projection;
mod robustness;

pub use classify::{
    classification_prompt, classify_llm, ClassifyOutcome, PromptStrategy,
};
pub use error::AnalysisError;
pub use hdbscan::hdbscan;
pub use judge::{
    feasibility_rate, judge, morality_summary, sentiment_counts, Feasibility, FeasibilityReport,
    GroupKey, HttpJudgeAdapter, JudgeAdapter, JudgeKind, JudgeVerdict, LlmJudgeAdapter,
    MoralitySummaryRow, Sentiment, SentimentRow, VerdictPayload, MORAL_FOUNDATIONS,
};
pub use projection::project_2d;
pub use robustness::{
    degradation_rows, robustness_report, ClaimGroup, DegradationRow, PredictionRow,
    RobustnessCell, RobustnessReport,
};

use serde::{Deserialize, Serialize};

/// One row of the cluster CSV export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub node_id: String,
    /// Cluster id, contiguous from 0; -1 marks noise.
    pub cluster: i32,
    pub x: f64,
    pub y: f64,
}

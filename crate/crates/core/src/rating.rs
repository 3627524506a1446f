//! Human and model questionnaire ratings for generated claims.

use serde::{Deserialize, Serialize};

use crate::label::ConsolidatedLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RaterKind {
    Human,
    Model,
}

impl RaterKind {
    pub fn parse(s: &str) -> Option<RaterKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "human" => Some(RaterKind::Human),
            "model" => Some(RaterKind::Model),
            _ => None,
        }
    }
}

/// One completed questionnaire row: four 5-point Likert answers plus a
/// label assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub node_id: String,
    pub rater_id: String,
    pub rater_kind: RaterKind,
    /// Role-playing consistency, 1..=5.
    pub q1_role_consistency: u8,
    /// Content relevance, 1..=5.
    pub q2_relevance: u8,
    /// Fluency, 1..=5.
    pub q3_fluency: u8,
    /// Factuality, 1..=5.
    pub q4_factuality: u8,
    pub q5_label: ConsolidatedLabel,
}

impl RatingRecord {
    /// All four Likert values must sit in 1..=5.
    pub fn likert_in_range(&self) -> bool {
        [
            self.q1_role_consistency,
            self.q2_relevance,
            self.q3_fluency,
            self.q4_factuality,
        ]
        .iter()
        .all(|v| (1..=5).contains(v))
    }
}

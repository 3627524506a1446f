//! Raw fact-check articles and the curated source/evidence records
//! extracted from them.

use serde::{Deserialize, Serialize};

use crate::label::{ConsolidatedLabel, RawLabel};

/// One raw fact-check article as ingested from the corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleRecord {
    /// Stable key, typically the article URL or a hash of it.
    pub article_id: String,
    /// The highlighted claim under review.
    pub claim_text: String,
    /// Who made the claim.
    pub claim_owner: String,
    pub raw_label: RawLabel,
    /// Full article body.
    pub body: String,
    /// The article's cited-sources section, one entry per source.
    #[serde(default)]
    pub cited_sources: Vec<String>,
    /// ISO-8601 date, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_date: Option<String>,
}

/// Quality-assurance category assigned to a curated record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QaCategory {
    NoIssues,
    ContaminatedSources,
    PoorExtraction,
    /// Default until a human review is imported.
    Unreviewed,
}

impl QaCategory {
    pub fn display_name(&self) -> &'static str {
        match self {
            QaCategory::NoIssues => "No Issues",
            QaCategory::ContaminatedSources => "Contaminated Sources",
            QaCategory::PoorExtraction => "Poor Extraction",
            QaCategory::Unreviewed => "Unreviewed",
        }
    }

    /// Parses the human-review CSV values ("Contaminated Sources" etc.).
    pub fn parse(s: &str) -> Option<QaCategory> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "noissues" => Some(QaCategory::NoIssues),
            "contaminatedsources" => Some(QaCategory::ContaminatedSources),
            "poorextraction" => Some(QaCategory::PoorExtraction),
            "unreviewed" => Some(QaCategory::Unreviewed),
            _ => None,
        }
    }
}

/// Model-extracted misinformation sources and fact-checking evidence for
/// one article.
///
/// Invariant: `misinformation_sources` and `fact_checking_evidence` never
/// share an identical sentence; the extraction step resolves collisions by
/// dropping the duplicate from the sources side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuratedRecord {
    pub article_id: String,
    #[serde(default)]
    pub misinformation_sources: Vec<String>,
    #[serde(default)]
    pub fact_checking_evidence: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition_sentence: Option<String>,
    pub qa_category: QaCategory,
    pub consolidated_label: ConsolidatedLabel,
}

impl CuratedRecord {
    /// True when no sentence appears in both lists.
    pub fn lists_disjoint(&self) -> bool {
        self.misinformation_sources
            .iter()
            .all(|s| !self.fact_checking_evidence.contains(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qa_category_parse() {
        assert_eq!(QaCategory::parse("Contaminated Sources"), Some(QaCategory::ContaminatedSources));
        assert_eq!(QaCategory::parse("no-issues"), Some(QaCategory::NoIssues));
        assert_eq!(QaCategory::parse("POOR EXTRACTION"), Some(QaCategory::PoorExtraction));
        assert_eq!(QaCategory::parse("fine"), None);
    }

    #[test]
    fn curated_disjointness() {
        let rec = CuratedRecord {
            article_id: "a".into(),
            misinformation_sources: vec!["x".into()],
            fact_checking_evidence: vec!["x".into()],
            transition_sentence: None,
            qa_category: QaCategory::Unreviewed,
            consolidated_label: ConsolidatedLabel::False,
        };
        assert!(!rec.lists_disjoint());
    }
}

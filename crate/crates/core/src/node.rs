//! Claim nodes: one entry of the claim forest per (article, round,
//! persona-chain) combination.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::label::ConsolidatedLabel;

/// Claims are asked to stay at or under this many words; longer claims are
/// flagged, not rejected.
pub const WORD_LIMIT: usize = 20;

/// One node of the claim forest.
///
/// Round 0 nodes carry the original article claim verbatim and have no
/// persona, intent, or explanation. A round-k node (k in 1..=3) lists its
/// k-1 generated ancestors nearest-last and always uses a persona that
/// appears nowhere in its ancestor chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimNode {
    pub node_id: String,
    pub article_id: String,
    pub round: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persona_id: Option<String>,
    #[serde(default)]
    pub ancestor_ids: Vec<String>,
    pub claim_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
    pub word_count: usize,
    pub over_limit: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assigned_label: Option<ConsolidatedLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_explanation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_confidence: Option<BTreeMap<ConsolidatedLabel, f64>>,
}

impl ClaimNode {
    /// Materialize the round-0 node for an article claim.
    pub fn root(article_id: &str, claim_text: &str) -> ClaimNode {
        let wc = word_count(claim_text);
        ClaimNode {
            node_id: node_id_digest(article_id, 0, None, &[]),
            article_id: article_id.to_string(),
            round: 0,
            persona_id: None,
            ancestor_ids: Vec::new(),
            claim_text: claim_text.to_string(),
            intent: None,
            explanation: None,
            word_count: wc,
            over_limit: wc > WORD_LIMIT,
            assigned_label: None,
            label_explanation: None,
            label_confidence: None,
        }
    }
}

/// Word count rule used everywhere: split on Unicode whitespace;
/// punctuation attached to a token counts with the token.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Deterministic node identity: a digest of the article, round, persona,
/// and ancestor chain. Reruns of the same plan produce the same ids, which
/// is what makes generation resumable.
pub fn node_id_digest(
    article_id: &str,
    round: u8,
    persona_id: Option<&str>,
    ancestor_ids: &[String],
) -> String {
    let mut hasher = Sha256::new();
    hasher.update(article_id.as_bytes());
    hasher.update([0x1f, round]);
    hasher.update(persona_id.unwrap_or("").as_bytes());
    for anc in ancestor_ids {
        hasher.update([0x1f]);
        hasher.update(anc.as_bytes());
    }
    let digest = hasher.finalize();
    hex::encode(&digest[..16])
}

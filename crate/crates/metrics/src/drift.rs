//! Semantic-drift summary: average cosine similarity between each
//! generated claim and its ancestors, per round pair.

use std::collections::BTreeMap;

use claimdrift_core::ClaimNode;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::MetricError;
use crate::vector::cosine;

/// The five reported pairs, in table order.
pub const DRIFT_PAIRS: [DriftPair; 5] = [
    DriftPair { from_round: 0, to_round: 1 },
    DriftPair { from_round: 0, to_round: 2 },
    DriftPair { from_round: 0, to_round: 3 },
    DriftPair { from_round: 1, to_round: 2 },
    DriftPair { from_round: 2, to_round: 3 },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftPair {
    pub from_round: u8,
    pub to_round: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRow<T> {
    pub pair: DriftPair,
    pub count: usize,
    pub mean_cosine: T,
}

/// The ancestor a round-`to` node is compared against for `from_round`:
/// round 0 means the article's root node, otherwise the stored ancestor at
/// that round (ancestors are ordered round 1, 2, ... nearest-last).
fn partner_id<'a>(
    node: &'a ClaimNode,
    from_round: u8,
    roots: &'a BTreeMap<String, String>,
) -> Option<&'a str> {
    if from_round == 0 {
        roots.get(&node.article_id).map(|s| s.as_str())
    } else {
        node.ancestor_ids.get(from_round as usize - 1).map(|s| s.as_str())
    }
}

/// Pair populations implied by the forest alone (no embeddings needed):
/// each pair counts every round-`to` node with a resolvable partner.
pub fn drift_pair_counts(nodes: &[ClaimNode]) -> Vec<(DriftPair, usize)> {
    let roots = root_index(nodes);
    DRIFT_PAIRS
        .iter()
        .map(|&pair| {
            let count = nodes
                .iter()
                .filter(|n| n.round == pair.to_round)
                .filter(|n| partner_id(n, pair.from_round, &roots).is_some())
                .count();
            (pair, count)
        })
        .collect()
}

/// Average cosine per round pair. Every referenced node must have an
/// embedding.
pub fn drift_summary<T: Float>(
    nodes: &[ClaimNode],
    embeddings: &BTreeMap<String, Vec<T>>,
) -> Result<Vec<DriftRow<T>>, MetricError> {
    let roots = root_index(nodes);
    let lookup = |id: &str| -> Result<&Vec<T>, MetricError> {
        embeddings
            .get(id)
            .ok_or_else(|| MetricError::MissingEmbedding { node_id: id.to_string() })
    };

    let mut rows = Vec::with_capacity(DRIFT_PAIRS.len());
    for pair in DRIFT_PAIRS {
        let mut sum = T::zero();
        let mut count = 0usize;
        for node in nodes.iter().filter(|n| n.round == pair.to_round) {
            let Some(partner) = partner_id(node, pair.from_round, &roots) else {
                continue;
            };
            let a = lookup(&node.node_id)?;
            let b = lookup(partner)?;
            sum = sum + cosine(a, b)?;
            count += 1;
        }
        let mean = if count == 0 {
            T::zero()
        } else {
            sum / T::from(count).expect("count fits scalar")
        };
        rows.push(DriftRow { pair, count, mean_cosine: mean });
    }
    Ok(rows)
}

fn root_index(nodes: &[ClaimNode]) -> BTreeMap<String, String> {
    nodes
        .iter()
        .filter(|n| n.round == 0)
        .map(|n| (n.article_id.clone(), n.node_id.clone()))
        .collect()
}

//! Persona-chain planning.
//!
//! Each test article spawns every permutation of distinct personas up to
//! length three. Chains sharing a prefix share the node for that prefix,
//! so with three personas one article yields 3 round-1, 6 round-2, and 6
//! round-3 nodes (15 total); with two personas it yields 2/2/0.

use std::collections::BTreeSet;

use claimdrift_core::{node_id_digest, PersonaRegistry};
use serde::{Deserialize, Serialize};

use crate::error::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainPlan {
    pub article_id: String,
    /// Persona-id sequences, each of length min(3, registry size).
    pub chains: Vec<Vec<String>>,
}

/// One node to generate: the chain prefix that identifies it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedNode {
    pub article_id: String,
    pub round: u8,
    pub persona_id: String,
    /// Persona chain up to and including this node's persona.
    pub chain: Vec<String>,
    pub node_id: String,
    /// Node ids of the chain prefix, round 1 first.
    pub ancestor_ids: Vec<String>,
}

/// All distinct-persona permutations of length min(3, n), in registry
/// order.
pub fn plan_chains(
    article_ids: &[String],
    registry: &PersonaRegistry,
) -> Result<Vec<ChainPlan>, PipelineError> {
    let n = registry.len();
    if n < 2 {
        return Err(PipelineError::RegistryTooSmall { size: n });
    }
    let depth = n.min(3);
    let ids = registry.ids();
    let mut chains = Vec::new();
    let mut current = Vec::with_capacity(depth);
    permute(&ids, depth, &mut current, &mut chains);
    Ok(article_ids
        .iter()
        .map(|article_id| ChainPlan { article_id: article_id.clone(), chains: chains.clone() })
        .collect())
}

fn permute(ids: &[String], depth: usize, current: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    if current.len() == depth {
        out.push(current.clone());
        return;
    }
    for id in ids {
        if current.contains(id) {
            continue;
        }
        current.push(id.clone());
        permute(ids, depth, current, out);
        current.pop();
    }
}

/// Deduplicated nodes across all chains, ordered round 1, 2, 3 (input
/// order within a round).
pub fn planned_nodes(plans: &[ChainPlan]) -> Vec<PlannedNode> {
    let mut seen: BTreeSet<(String, Vec<String>)> = BTreeSet::new();
    let mut by_round: [Vec<PlannedNode>; 3] = Default::default();
    for plan in plans {
        for chain in &plan.chains {
            let mut ancestor_ids: Vec<String> = Vec::new();
            for len in 1..=chain.len() {
                let prefix = &chain[..len];
                let round = len as u8;
                let persona_id = prefix[len - 1].clone();
                let node_id =
                    node_id_digest(&plan.article_id, round, Some(&persona_id), &ancestor_ids);
                if seen.insert((plan.article_id.clone(), prefix.to_vec())) {
                    by_round[len - 1].push(PlannedNode {
                        article_id: plan.article_id.clone(),
                        round,
                        persona_id,
                        chain: prefix.to_vec(),
                        node_id: node_id.clone(),
                        ancestor_ids: ancestor_ids.clone(),
                    });
                }
                ancestor_ids.push(node_id);
            }
        }
    }
    let [r1, r2, r3] = by_round;
    r1.into_iter().chain(r2).chain(r3).collect()
}

/// Node counts per round (index 0 = round 1).
pub fn round_counts(plans: &[ChainPlan]) -> [usize; 3] {
    let mut counts = [0usize; 3];
    for node in planned_nodes(plans) {
        counts[node.round as usize - 1] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use claimdrift_core::PersonaSpec;

    fn registry(n: usize) -> PersonaRegistry {
        PersonaRegistry::new(
            (0..n)
                .map(|i| PersonaSpec {
                    persona_id: format!("p{i}"),
                    role_name: format!("Role{i}"),
                    description_bullets: vec!["bullet".into()],
                })
                .collect(),
        )
    }

    #[test]
    fn three_personas_give_six_chains_and_fifteen_nodes_per_article() {
        let plans = plan_chains(&["a1".into()], &registry(3)).unwrap();
        assert_eq!(plans[0].chains.len(), 6);
        let counts = round_counts(&plans);
        assert_eq!(counts, [3, 6, 6]);
    }

    #[test]
    fn full_test_split_reproduces_forest_size() {
        let ids: Vec<String> = (0..678).map(|i| format!("article-{i}")).collect();
        let plans = plan_chains(&ids, &registry(3)).unwrap();
        let counts = round_counts(&plans);
        assert_eq!(counts, [2_034, 4_068, 4_068]);
        assert_eq!(counts.iter().sum::<usize>(), 10_170);
    }

    #[test]
    fn two_personas_have_no_round_three() {
        let plans = plan_chains(&["a1".into()], &registry(2)).unwrap();
        assert_eq!(plans[0].chains, vec![
            vec!["p0".to_string(), "p1".to_string()],
            vec!["p1".to_string(), "p0".to_string()],
        ]);
        assert_eq!(round_counts(&plans), [2, 2, 0]);
    }

    #[test]
    fn empty_plan_for_no_articles() {
        let plans = plan_chains(&[], &registry(3)).unwrap();
        assert!(plans.is_empty());
        assert_eq!(round_counts(&plans), [0, 0, 0]);
    }

    #[test]
    fn one_persona_is_too_small() {
        assert!(matches!(
            plan_chains(&["a".into()], &registry(1)).unwrap_err(),
            PipelineError::RegistryTooSmall { size: 1 }
        ));
    }

    #[test]
    fn node_count_formula_holds_for_any_article_count() {
        for a in [0usize, 1, 2, 5, 17] {
            let ids: Vec<String> = (0..a).map(|i| format!("x{i}")).collect();
            let plans = plan_chains(&ids, &registry(3)).unwrap();
            assert_eq!(round_counts(&plans), [3 * a, 6 * a, 6 * a]);
        }
    }

    #[test]
    fn shared_prefixes_share_node_ids() {
        let plans = plan_chains(&["a1".into()], &registry(3)).unwrap();
        let nodes = planned_nodes(&plans);
        // Round-1 nodes: one per persona, each referenced by two chains.
        assert_eq!(nodes.iter().filter(|n| n.round == 1).count(), 3);
        // Ancestor chains resolve: every round-2 node's ancestor is a
        // round-1 node id.
        let r1_ids: BTreeSet<&String> =
            nodes.iter().filter(|n| n.round == 1).map(|n| &n.node_id).collect();
        for node in nodes.iter().filter(|n| n.round == 2) {
            assert_eq!(node.ancestor_ids.len(), 1);
            assert!(r1_ids.contains(&node.ancestor_ids[0]));
        }
        // Distinct personas within every chain.
        for node in &nodes {
            let unique: BTreeSet<&String> = node.chain.iter().collect();
            assert_eq!(unique.len(), node.chain.len());
        }
    }
}

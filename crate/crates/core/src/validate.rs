//! Mechanical claim-node validation.
//!
//! Violations are reported, never thrown: a malformed node is data to
//! inspect, not a reason to stop a batch run.

use std::collections::BTreeMap;

use crate::node::{word_count, ClaimNode, WORD_LIMIT};
use crate::persona::PersonaRegistry;

/// One violated node invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Round outside 0..=3.
    RoundOutOfRange { round: u8 },
    /// Round-0 nodes must not carry a persona; later rounds must.
    PersonaPresence { round: u8, present: bool },
    /// persona_id not found in the registry.
    UnknownPersona { persona_id: String },
    /// ancestor_ids length disagrees with the round.
    AncestorCount { expected: usize, actual: usize },
    /// An ancestor id is not resolvable in the provided index.
    DanglingAncestor { ancestor_id: String },
    /// A resolvable ancestor sits at the wrong round for its position.
    AncestorRound { ancestor_id: String, expected_round: u8, actual_round: u8 },
    /// The node reuses a persona already present in its chain.
    DuplicatePersonaInChain { persona_id: String },
    /// Stored word_count disagrees with the whitespace-token rule.
    WordCountMismatch { stored: usize, computed: usize },
    /// Stored over_limit flag disagrees with word_count > limit.
    OverLimitMismatch { stored: bool, computed: bool },
    /// Empty claim text.
    EmptyClaim,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::RoundOutOfRange { round } => write!(f, "round {round} out of range 0..=3"),
            Violation::PersonaPresence { round, present } => {
                if *present {
                    write!(f, "round {round} node must not carry a persona")
                } else {
                    write!(f, "round {round} node is missing a persona")
                }
            }
            Violation::UnknownPersona { persona_id } => {
                write!(f, "unknown persona {persona_id:?}")
            }
            Violation::AncestorCount { expected, actual } => {
                write!(f, "ancestor count {actual}, expected {expected}")
            }
            Violation::DanglingAncestor { ancestor_id } => {
                write!(f, "dangling ancestor reference {ancestor_id:?}")
            }
            Violation::AncestorRound { ancestor_id, expected_round, actual_round } => write!(
                f,
                "ancestor {ancestor_id:?} at round {actual_round}, expected {expected_round}"
            ),
            Violation::DuplicatePersonaInChain { persona_id } => {
                write!(f, "persona {persona_id:?} repeats within the chain")
            }
            Violation::WordCountMismatch { stored, computed } => {
                write!(f, "word_count {stored} but whitespace rule counts {computed}")
            }
            Violation::OverLimitMismatch { stored, computed } => {
                write!(f, "over_limit {stored} but word count implies {computed}")
            }
            Violation::EmptyClaim => write!(f, "empty claim text"),
        }
    }
}

/// Check every invariant that is decidable from the record, the persona
/// registry, and (when given) an index of already-stored nodes.
///
/// Returns the list of violated invariants; an empty list means valid.
pub fn validate_node(
    node: &ClaimNode,
    registry: &PersonaRegistry,
    index: Option<&BTreeMap<String, ClaimNode>>,
) -> Vec<Violation> {
    let mut violations = Vec::new();

    if node.round > 3 {
        violations.push(Violation::RoundOutOfRange { round: node.round });
    }
    if node.claim_text.trim().is_empty() {
        violations.push(Violation::EmptyClaim);
    }

    match (&node.persona_id, node.round) {
        (Some(_), 0) => violations.push(Violation::PersonaPresence { round: 0, present: true }),
        (None, r) if r > 0 => {
            violations.push(Violation::PersonaPresence { round: r, present: false })
        }
        (Some(pid), _) if registry.get(pid).is_none() => {
            violations.push(Violation::UnknownPersona { persona_id: pid.clone() })
        }
        _ => {}
    }

    let expected_ancestors = (node.round as usize).saturating_sub(1);
    if node.ancestor_ids.len() != expected_ancestors {
        violations.push(Violation::AncestorCount {
            expected: expected_ancestors,
            actual: node.ancestor_ids.len(),
        });
    }

    if let Some(index) = index {
        let mut chain_personas: Vec<&str> = Vec::new();
        for (pos, ancestor_id) in node.ancestor_ids.iter().enumerate() {
            match index.get(ancestor_id) {
                None => {
                    violations.push(Violation::DanglingAncestor { ancestor_id: ancestor_id.clone() })
                }
                Some(ancestor) => {
                    let expected_round = (pos + 1) as u8;
                    if ancestor.round != expected_round {
                        violations.push(Violation::AncestorRound {
                            ancestor_id: ancestor_id.clone(),
                            expected_round,
                            actual_round: ancestor.round,
                        });
                    }
                    if let Some(pid) = &ancestor.persona_id {
                        chain_personas.push(pid);
                    }
                }
            }
        }
        if let Some(pid) = &node.persona_id {
            if chain_personas.contains(&pid.as_str()) {
                violations.push(Violation::DuplicatePersonaInChain { persona_id: pid.clone() });
            }
        }
    }

    let computed = word_count(&node.claim_text);
    if node.word_count != computed {
        violations.push(Violation::WordCountMismatch { stored: node.word_count, computed });
    }
    let computed_over = computed > WORD_LIMIT;
    if node.over_limit != computed_over {
        violations.push(Violation::OverLimitMismatch {
            stored: node.over_limit,
            computed: computed_over,
        });
    }

    violations
}

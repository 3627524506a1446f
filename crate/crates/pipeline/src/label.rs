//! Stage 3: the three-step labeling protocol.
//!
//! One conversation per node: evidence analysis, label assignment (which
//! also surfaces per-label confidence scores), then formatting and label
//! selection. The confidence map is stored when present; if its argmax
//! disagrees with the selected label, that is a warning, never an
//! override.

use std::collections::BTreeMap;

use claimdrift_core::{ClaimNode, ConsolidatedLabel, Store};
use claimdrift_gateway::{
    bounded_map, extract_last_json_object, ChatRequest, Gateway, GatewayError, Message,
};
use serde_json::Value;

use crate::error::PipelineError;
use crate::generate::RunSummary;
use crate::generate::{FailureReason, NodeFailure};
use crate::prompts::{evidence_analysis_prompt, label_assignment_prompt, label_formatting_prompt};

pub struct LabelContext<'a> {
    pub gateway: &'a Gateway,
    pub model_id: &'a str,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Extra formatting attempts after the first unparseable reply.
    pub format_retries: u32,
    pub workers: usize,
}

#[derive(Debug)]
pub struct LabelOutcome {
    pub node: ClaimNode,
    /// True when a label was assigned on this call.
    pub labeled: bool,
    /// Argmax-vs-selected disagreement, when a confidence map was found.
    pub argmax_warning: Option<String>,
    pub failure: Option<NodeFailure>,
}

/// Label one node against its evidence.
pub fn label_node(
    ctx: &LabelContext<'_>,
    node: &ClaimNode,
    evidence: &[String],
) -> LabelOutcome {
    let mut node = node.clone();
    let mut messages =
        vec![Message::user(evidence_analysis_prompt(&node.claim_text, evidence))];

    let send = |messages: &Vec<Message>| -> Result<String, FailureReason> {
        let request = ChatRequest {
            model_id: ctx.model_id.to_string(),
            messages: messages.clone(),
            temperature: ctx.temperature,
            max_tokens: ctx.max_tokens,
            seed: None,
        };
        ctx.gateway.chat(&request).map_err(|err| match err {
            GatewayError::Refusal(reason) => FailureReason::Refusal(reason),
            other => FailureReason::Gateway(other.to_string()),
        })
    };
    let fail = |node: ClaimNode, reason: FailureReason| {
        let failure = NodeFailure {
            node_id: node.node_id.clone(),
            article_id: node.article_id.clone(),
            round: node.round,
            persona_id: node.persona_id.clone().unwrap_or_default(),
            reason,
        };
        LabelOutcome { node, labeled: false, argmax_warning: None, failure: Some(failure) }
    };

    // Step 1: evidence analysis.
    let analysis = match send(&messages) {
        Ok(reply) => reply,
        Err(reason) => return fail(node, reason),
    };
    messages.push(Message::assistant(analysis));

    // Step 2: label assignment; confidence scores often ride along here.
    messages.push(Message::user(label_assignment_prompt()));
    let assignment = match send(&messages) {
        Ok(reply) => reply,
        Err(reason) => return fail(node, reason),
    };
    let confidence = parse_confidence_map(&assignment);
    messages.push(Message::assistant(assignment));

    // Step 3: formatting and label selection, with a parse-retry budget.
    let mut attempt = 0u32;
    let selected = loop {
        messages.push(Message::user(label_formatting_prompt()));
        let reply = match send(&messages) {
            Ok(reply) => reply,
            Err(reason) => return fail(node, reason),
        };
        messages.push(Message::assistant(reply.clone()));
        if let Some((label, explanation)) = parse_label_reply(&reply) {
            break Some((label, explanation));
        }
        if attempt >= ctx.format_retries {
            break None;
        }
        attempt += 1;
    };

    let Some((label, explanation)) = selected else {
        return fail(node, FailureReason::FormatParse);
    };

    let mut argmax_warning = None;
    if let Some(map) = &confidence {
        if let Some(argmax) = confidence_argmax(map) {
            if argmax != label {
                argmax_warning = Some(format!(
                    "confidence argmax {} disagrees with selected label {}",
                    argmax.display_name(),
                    label.display_name()
                ));
            }
        }
    }
    node.assigned_label = Some(label);
    node.label_explanation = explanation;
    node.label_confidence = confidence;
    LabelOutcome { node, labeled: true, argmax_warning, failure: None }
}

/// First label attaining the maximum, in True / Half True / False order.
pub fn confidence_argmax(map: &BTreeMap<ConsolidatedLabel, f64>) -> Option<ConsolidatedLabel> {
    let mut best: Option<(ConsolidatedLabel, f64)> = None;
    for label in ConsolidatedLabel::ALL {
        if let Some(&score) = map.get(&label) {
            if best.map(|(_, b)| score > b).unwrap_or(true) {
                best = Some((label, score));
            }
        }
    }
    best.map(|(label, _)| label)
}

fn parse_label_reply(reply: &str) -> Option<(ConsolidatedLabel, Option<String>)> {
    let value = extract_last_json_object(reply)?;
    let label = value.get("Label")?.as_str()?.parse::<ConsolidatedLabel>().ok()?;
    let explanation = value.get("Explanation").and_then(|v| v.as_str()).map(|s| s.to_string());
    Some((label, explanation))
}

/// Find a JSON object whose keys all normalize to labels with values in
/// [0,1]; searched depth-first through any JSON in the reply.
fn parse_confidence_map(reply: &str) -> Option<BTreeMap<ConsolidatedLabel, f64>> {
    let value = extract_last_json_object(reply)?;
    find_confidence(&value)
}

fn find_confidence(value: &Value) -> Option<BTreeMap<ConsolidatedLabel, f64>> {
    if let Value::Object(obj) = value {
        if obj.len() >= 2 {
            let mut map = BTreeMap::new();
            let mut all_labels = true;
            for (key, v) in obj {
                let (Ok(label), Some(score)) = (key.parse::<ConsolidatedLabel>(), v.as_f64())
                else {
                    all_labels = false;
                    break;
                };
                if !(0.0..=1.0).contains(&score) {
                    all_labels = false;
                    break;
                }
                map.insert(label, score);
            }
            if all_labels && map.len() >= 2 {
                return Some(map);
            }
        }
        for v in obj.values() {
            if let Some(found) = find_confidence(v) {
                return Some(found);
            }
        }
    }
    if let Value::Array(items) = value {
        for v in items {
            if let Some(found) = find_confidence(v) {
                return Some(found);
            }
        }
    }
    None
}

/// Label every unlabeled generated node in the store. Round-0 nodes keep
/// their consolidated gold label from ingestion.
pub fn run_labeling(
    ctx: &LabelContext<'_>,
    store: &Store,
    evidence_by_article: &BTreeMap<String, Vec<String>>,
) -> Result<(RunSummary, Vec<String>), PipelineError> {
    let known = store.load_claims()?;
    let todo: Vec<ClaimNode> = known
        .values()
        .filter(|n| n.round > 0 && n.assigned_label.is_none())
        .cloned()
        .collect();
    let mut summary = RunSummary {
        skipped: known.values().filter(|n| n.round > 0).count() - todo.len(),
        ..RunSummary::default()
    };
    if todo.is_empty() {
        return Ok((summary, Vec::new()));
    }

    let outcomes = bounded_map(&todo, ctx.workers, |_, node| {
        let evidence = evidence_by_article.get(&node.article_id).cloned().unwrap_or_default();
        if evidence.is_empty() {
            let failure = NodeFailure {
                node_id: node.node_id.clone(),
                article_id: node.article_id.clone(),
                round: node.round,
                persona_id: node.persona_id.clone().unwrap_or_default(),
                reason: FailureReason::AncestorMissing("no evidence for article".into()),
            };
            return LabelOutcome {
                node: node.clone(),
                labeled: false,
                argmax_warning: None,
                failure: Some(failure),
            };
        }
        label_node(ctx, node, &evidence)
    });

    let mut labeled = Vec::new();
    let mut warnings = Vec::new();
    for outcome in outcomes {
        if let Some(warning) = outcome.argmax_warning {
            warnings.push(format!("{}: {warning}", outcome.node.node_id));
        }
        if outcome.labeled {
            labeled.push(outcome.node);
        }
        if let Some(failure) = outcome.failure {
            summary.failures.push(failure);
        }
    }
    // Relabelled nodes are appended; the claim map keeps the newest row
    // per id.
    store.append_claims(&labeled)?;
    summary.generated = labeled.len();
    Ok((summary, warnings))
}

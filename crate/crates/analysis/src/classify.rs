//! Prompt-strategy classification of claims against gold evidence.
//!
//! Four strategies (zero-shot, zero-shot chain-of-thought, few-shot,
//! few-shot chain-of-thought) share the slot convention `<|claim|>` /
//! `<|fce|>`. Evidence renders as `- fce_source_i: "..."` lines. A reply
//! that yields no parseable label is an abstention: recorded, reported,
//! and scored as wrong for every class.

use claimdrift_core::ConsolidatedLabel;
use claimdrift_gateway::{extract_last_json_object, ChatRequest, Gateway, Message};
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;

const ZERO_SHOT: &str = include_str!("../templates/classify_zero_shot.txt");
const ZERO_SHOT_COT: &str = include_str!("../templates/classify_zero_shot_cot.txt");
const FEW_SHOT: &str = include_str!("../templates/classify_few_shot.txt");
const FEW_SHOT_COT: &str = include_str!("../templates/classify_few_shot_cot.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptStrategy {
    ZeroShot,
    ZeroShotCot,
    FewShot,
    FewShotCot,
}

impl PromptStrategy {
    pub const ALL: [PromptStrategy; 4] = [
        PromptStrategy::ZeroShot,
        PromptStrategy::ZeroShotCot,
        PromptStrategy::FewShot,
        PromptStrategy::FewShotCot,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            PromptStrategy::ZeroShot => "zero-shot",
            PromptStrategy::ZeroShotCot => "zero-shot-cot",
            PromptStrategy::FewShot => "few-shot",
            PromptStrategy::FewShotCot => "few-shot-cot",
        }
    }

    pub fn parse(s: &str) -> Option<PromptStrategy> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "zero-shot" | "zs" => Some(PromptStrategy::ZeroShot),
            "zero-shot-cot" | "zs-cot" => Some(PromptStrategy::ZeroShotCot),
            "few-shot" | "fs" => Some(PromptStrategy::FewShot),
            "few-shot-cot" | "fs-cot" => Some(PromptStrategy::FewShotCot),
            _ => None,
        }
    }

    fn template(&self) -> &'static str {
        match self {
            PromptStrategy::ZeroShot => ZERO_SHOT,
            PromptStrategy::ZeroShotCot => ZERO_SHOT_COT,
            PromptStrategy::FewShot => FEW_SHOT,
            PromptStrategy::FewShotCot => FEW_SHOT_COT,
        }
    }
}

/// Render the evidence list in the `fce_source_i` style the few-shot
/// examples use.
pub fn render_fce(evidence: &[String]) -> String {
    evidence
        .iter()
        .enumerate()
        .map(|(i, e)| format!("- fce_source_{i}: \"{e}\""))
        .collect::<Vec<_>>()
        .join(",\n")
}

/// The full classification prompt for one claim under one strategy.
pub fn classification_prompt(strategy: PromptStrategy, claim: &str, evidence: &[String]) -> String {
    strategy
        .template()
        .replace("<|claim|>", claim)
        .replace("<|fce|>", &render_fce(evidence))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOutcome {
    /// None is an abstention: the reply carried no parseable label.
    pub label: Option<ConsolidatedLabel>,
    pub raw_reply: String,
}

/// Classify one claim against its evidence. Parse failures are not
/// errors; they come back as abstentions so aggregation never crashes.
pub fn classify_llm(
    gateway: &Gateway,
    model_id: &str,
    max_tokens: u32,
    strategy: PromptStrategy,
    claim: &str,
    evidence: &[String],
) -> Result<ClassifyOutcome, AnalysisError> {
    if evidence.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let request = ChatRequest {
        model_id: model_id.to_string(),
        messages: vec![Message::user(classification_prompt(strategy, claim, evidence))],
        temperature: 0.0,
        max_tokens,
        seed: None,
    };
    let reply = gateway.chat(&request)?;
    let label = extract_last_json_object(&reply)
        .and_then(|v| v.get("Label").and_then(|l| l.as_str()).map(|s| s.to_string()))
        .and_then(|s| s.parse::<ConsolidatedLabel>().ok());
    Ok(ClassifyOutcome { label, raw_reply: reply })
}

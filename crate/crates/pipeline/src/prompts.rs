//! Prompt templates and slot rendering.
//!
//! The templates live as plain-text files with `{slot}` placeholders and
//! are filled by literal substitution only; every test that snapshots a
//! prompt relies on that. Slot conventions:
//!
//! * `{role_definition}`, `{sources}`, `{our_sources}` render lists as
//!   "- item" lines
//! * `{previous_claims}` renders "- Role: claim" lines, nearest ancestor
//!   last
//! * `{evidence}` joins items with newlines (it sits inside quotes in the
//!   template)

use claimdrift_core::{ArticleRecord, PersonaSpec};

const REASONING_NO_PREVIOUS: &str = include_str!("../templates/gen_reasoning_no_previous.txt");
const REASONING_WITH_PREVIOUS: &str = include_str!("../templates/gen_reasoning_with_previous.txt");
const CLAIM: &str = include_str!("../templates/gen_claim.txt");
const INTENT: &str = include_str!("../templates/gen_intent.txt");
const EXPLANATION: &str = include_str!("../templates/gen_explanation.txt");
const FORMATTING: &str = include_str!("../templates/gen_formatting.txt");
const EVIDENCE_ANALYSIS: &str = include_str!("../templates/label_evidence_analysis.txt");
const LABEL_ASSIGNMENT: &str = include_str!("../templates/label_assignment.txt");
const LABEL_FORMATTING: &str = include_str!("../templates/label_formatting.txt");
const EXTRACTION: &str = include_str!("../templates/extraction.txt");

/// "- item" lines.
pub fn bullet_lines(items: &[String]) -> String {
    items.iter().map(|s| format!("- {s}")).collect::<Vec<_>>().join("\n")
}

/// "- Role: claim" lines for the previous-claims slot, nearest last.
pub fn previous_claim_lines(previous: &[(String, String)]) -> String {
    previous
        .iter()
        .map(|(role, claim)| format!("- {role}: {claim}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Step 1. Uses the with-previous-claims variant iff `previous` is
/// non-empty. Ablations blank the role-definition or sources slot.
#[allow(clippy::too_many_arguments)]
pub fn reasoning_prompt(
    persona: &PersonaSpec,
    claim_owner: &str,
    original_claim: &str,
    sources: &[String],
    previous: &[(String, String)],
    no_role_definitions: bool,
    no_sources: bool,
) -> String {
    let template = if previous.is_empty() { REASONING_NO_PREVIOUS } else { REASONING_WITH_PREVIOUS };
    let role_definition =
        if no_role_definitions { String::new() } else { bullet_lines(&persona.description_bullets) };
    let sources_text = if no_sources { String::new() } else { bullet_lines(sources) };
    let mut prompt = template
        .replace("{role}", &persona.role_name)
        .replace("{role_definition}", &role_definition)
        .replace("{claim_owner}", claim_owner)
        .replace("{original_claim}", original_claim)
        .replace("{sources}", &sources_text);
    if !previous.is_empty() {
        prompt = prompt.replace("{previous_claims}", &previous_claim_lines(previous));
    }
    prompt
}

/// Step 2.
pub fn claim_prompt() -> &'static str {
    CLAIM
}

/// Step 3.
pub fn intent_prompt() -> &'static str {
    INTENT
}

/// Step 4.
pub fn explanation_prompt() -> &'static str {
    EXPLANATION
}

/// Step 5.
pub fn formatting_prompt() -> &'static str {
    FORMATTING
}

/// Labeling step 1.
pub fn evidence_analysis_prompt(claim: &str, evidence: &[String]) -> String {
    EVIDENCE_ANALYSIS
        .replace("{claim}", claim)
        .replace("{evidence}", &evidence.join("\n"))
}

/// Labeling step 2.
pub fn label_assignment_prompt() -> &'static str {
    LABEL_ASSIGNMENT
}

/// Labeling step 3.
pub fn label_formatting_prompt() -> &'static str {
    LABEL_FORMATTING
}

/// The source/evidence extraction prompt for one article.
pub fn extraction_prompt(article: &ArticleRecord) -> String {
    EXTRACTION
        .replace("{original_claim}", &article.claim_text)
        .replace("{original_claim_label}", article.raw_label.display_name())
        .replace("{our_sources}", &bullet_lines(&article.cited_sources))
        .replace("{article}", &article.body)
}

//! Stage 2: the five-step claim-generation protocol and its round-by-round
//! runner.
//!
//! Every node is one accumulating conversation: reasoning, claim, intent,
//! explanation, formatting. The formatting reply must carry a JSON object
//! with Claim / Intent / Explanation; if it does not, only the formatting
//! prompt is retried. A claim over the word limit gets exactly one re-ask
//! of the formatting prompt and is then accepted and flagged.

use std::collections::BTreeMap;

use claimdrift_core::{
    node_id_digest, validate_node, word_count, ArticleRecord, ClaimNode, CuratedRecord,
    PersonaRegistry, PersonaSpec, Store, WORD_LIMIT,
};
use claimdrift_gateway::{
    bounded_map, extract_last_json_object, ChatRequest, Gateway, GatewayError, Message,
};
use serde::{Deserialize, Serialize};

use crate::chains::{planned_nodes, ChainPlan, PlannedNode};
use crate::error::PipelineError;
use crate::prompts::{
    claim_prompt, explanation_prompt, formatting_prompt, intent_prompt, reasoning_prompt,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    Reasoning,
    Claim,
    Intent,
    Explanation,
    Formatting,
}

/// Audit row: one prompt/reply exchange of one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStepLog {
    pub node_id: String,
    pub step: StepKind,
    pub prompt: String,
    pub reply: String,
    pub attempt: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FailureReason {
    /// The formatting reply never yielded a parseable JSON object.
    FormatParse,
    /// The backend declined (safety alignment); the pipeline continues.
    Refusal(String),
    /// Transport or API failure that outlived the retry budget.
    Gateway(String),
    /// An ancestor node is missing from the store, so the chain context
    /// cannot be built.
    AncestorMissing(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFailure {
    pub node_id: String,
    pub article_id: String,
    pub round: u8,
    pub persona_id: String,
    pub reason: FailureReason,
}

#[derive(Debug)]
pub struct GenerationOutcome {
    pub node: Option<ClaimNode>,
    pub logs: Vec<GenerationStepLog>,
    pub failure: Option<NodeFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AblationFlags {
    pub no_role_definitions: bool,
    pub no_sources: bool,
}

impl AblationFlags {
    pub fn parse(s: &str) -> Option<AblationFlags> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Some(AblationFlags::default()),
            "no-roles" | "no-role-definitions" => {
                Some(AblationFlags { no_role_definitions: true, no_sources: false })
            }
            "no-sources" => Some(AblationFlags { no_role_definitions: false, no_sources: true }),
            _ => None,
        }
    }
}

pub struct GenerationContext<'a> {
    pub gateway: &'a Gateway,
    pub model_id: &'a str,
    pub temperature: f64,
    pub max_tokens: u32,
    pub seed: Option<u64>,
    /// Extra formatting attempts after the first unparseable reply.
    pub format_retries: u32,
    pub ablation: AblationFlags,
    /// Worker threads for fan-out within a round.
    pub workers: usize,
}

/// Run the five-step conversation for one node.
pub fn generate_node(
    ctx: &GenerationContext<'_>,
    article: &ArticleRecord,
    curated: &CuratedRecord,
    persona: &PersonaSpec,
    ancestors: &[ClaimNode],
    registry: &PersonaRegistry,
) -> GenerationOutcome {
    let round = ancestors.len() as u8 + 1;
    let ancestor_ids: Vec<String> = ancestors.iter().map(|a| a.node_id.clone()).collect();
    let node_id = node_id_digest(&article.article_id, round, Some(&persona.persona_id), &ancestor_ids);

    let previous: Vec<(String, String)> = ancestors
        .iter()
        .map(|node| {
            let role = node
                .persona_id
                .as_deref()
                .and_then(|pid| registry.get(pid))
                .map(|p| p.role_name.clone())
                .unwrap_or_else(|| "Unknown".to_string());
            (role, node.claim_text.clone())
        })
        .collect();

    let opening = reasoning_prompt(
        persona,
        &article.claim_owner,
        &article.claim_text,
        &curated.misinformation_sources,
        &previous,
        ctx.ablation.no_role_definitions,
        ctx.ablation.no_sources,
    );

    let mut conversation = Conversation::new(ctx, &node_id);
    let fail = |reason: FailureReason, logs: Vec<GenerationStepLog>| GenerationOutcome {
        node: None,
        logs,
        failure: Some(NodeFailure {
            node_id: node_id.clone(),
            article_id: article.article_id.clone(),
            round,
            persona_id: persona.persona_id.clone(),
            reason,
        }),
    };

    let steps: [(StepKind, String); 4] = [
        (StepKind::Reasoning, opening),
        (StepKind::Claim, claim_prompt().to_string()),
        (StepKind::Intent, intent_prompt().to_string()),
        (StepKind::Explanation, explanation_prompt().to_string()),
    ];
    for (step, prompt) in steps {
        if let Err(reason) = conversation.exchange(step, &prompt, 1) {
            return fail(reason, conversation.logs);
        }
    }

    // Formatting, with a parse-retry budget and one over-limit re-ask.
    let mut attempt = 1u32;
    let mut reasked_over_limit = false;
    let parsed = loop {
        let reply = match conversation.exchange(StepKind::Formatting, formatting_prompt(), attempt)
        {
            Ok(reply) => reply,
            Err(reason) => return fail(reason, conversation.logs),
        };
        match parse_formatting_reply(&reply) {
            Some(parsed) => {
                if word_count(&parsed.0) > WORD_LIMIT && !reasked_over_limit {
                    reasked_over_limit = true;
                    attempt += 1;
                    continue;
                }
                break parsed;
            }
            None => {
                if attempt > ctx.format_retries {
                    return fail(FailureReason::FormatParse, conversation.logs);
                }
                attempt += 1;
            }
        }
    };

    let (claim_text, intent, explanation) = parsed;
    let wc = word_count(&claim_text);
    let node = ClaimNode {
        node_id,
        article_id: article.article_id.clone(),
        round,
        persona_id: Some(persona.persona_id.clone()),
        ancestor_ids,
        claim_text,
        intent: Some(intent),
        explanation: Some(explanation),
        word_count: wc,
        over_limit: wc > WORD_LIMIT,
        assigned_label: None,
        label_explanation: None,
        label_confidence: None,
    };
    GenerationOutcome { node: Some(node), logs: conversation.logs, failure: None }
}

/// The accumulating conversation: two messages per exchange.
struct Conversation<'a> {
    ctx: &'a GenerationContext<'a>,
    node_id: String,
    messages: Vec<Message>,
    logs: Vec<GenerationStepLog>,
}

impl<'a> Conversation<'a> {
    fn new(ctx: &'a GenerationContext<'a>, node_id: &str) -> Conversation<'a> {
        Conversation { ctx, node_id: node_id.to_string(), messages: Vec::new(), logs: Vec::new() }
    }

    fn exchange(&mut self, step: StepKind, prompt: &str, attempt: u32) -> Result<String, FailureReason> {
        self.messages.push(Message::user(prompt));
        let request = ChatRequest {
            model_id: self.ctx.model_id.to_string(),
            messages: self.messages.clone(),
            temperature: self.ctx.temperature,
            max_tokens: self.ctx.max_tokens,
            seed: self.ctx.seed,
        };
        let before = self.messages.len();
        let reply = self.ctx.gateway.chat(&request).map_err(|err| match err {
            GatewayError::Refusal(reason) => FailureReason::Refusal(reason),
            other => FailureReason::Gateway(other.to_string()),
        })?;
        self.messages.push(Message::assistant(reply.clone()));
        debug_assert_eq!(self.messages.len(), before + 1);
        self.logs.push(GenerationStepLog {
            node_id: self.node_id.clone(),
            step,
            prompt: prompt.to_string(),
            reply: reply.clone(),
            attempt,
        });
        Ok(reply)
    }
}

fn parse_formatting_reply(reply: &str) -> Option<(String, String, String)> {
    let value = extract_last_json_object(reply)?;
    let field = |key: &str| value.get(key).and_then(|v| v.as_str()).map(|s| s.to_string());
    Some((field("Claim")?, field("Intent")?, field("Explanation")?))
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub generated: usize,
    pub skipped: usize,
    pub failures: Vec<NodeFailure>,
}

/// Execute a plan round by round. Nodes already in the store are skipped,
/// which makes the run resumable; failures are collected and the run only
/// aborts if an entire round produces nothing.
pub fn run_generation(
    ctx: &GenerationContext<'_>,
    store: &Store,
    plans: &[ChainPlan],
    articles: &BTreeMap<String, ArticleRecord>,
    curated: &BTreeMap<String, CuratedRecord>,
    registry: &PersonaRegistry,
    rounds: &[u8],
) -> Result<RunSummary, PipelineError> {
    let mut known = store.load_claims()?;
    let mut summary = RunSummary::default();

    // Round-0 roots first, so every metric can treat originals uniformly.
    let mut roots = Vec::new();
    for plan in plans {
        let Some(article) = articles.get(&plan.article_id) else { continue };
        let root_id = node_id_digest(&article.article_id, 0, None, &[]);
        if !known.contains_key(&root_id) {
            let mut root = ClaimNode::root(&article.article_id, &article.claim_text);
            root.assigned_label =
                Some(claimdrift_core::consolidate_label(article.raw_label));
            known.insert(root.node_id.clone(), root.clone());
            roots.push(root);
        }
    }
    store.append_claims(&roots)?;

    let all_nodes = planned_nodes(plans);
    for round in 1u8..=3 {
        if !rounds.contains(&round) {
            continue;
        }
        let todo: Vec<PlannedNode> = all_nodes
            .iter()
            .filter(|n| n.round == round)
            .filter(|n| !known.contains_key(&n.node_id))
            .cloned()
            .collect();
        let planned_this_round = all_nodes.iter().filter(|n| n.round == round).count();
        summary.skipped += planned_this_round - todo.len();
        if todo.is_empty() {
            continue;
        }

        let outcomes = bounded_map(&todo, ctx.workers, |_, planned| {
            let article = articles.get(&planned.article_id);
            let curated_record = curated.get(&planned.article_id);
            let persona = registry.get(&planned.persona_id);
            let (Some(article), Some(curated_record), Some(persona)) =
                (article, curated_record, persona)
            else {
                return GenerationOutcome {
                    node: None,
                    logs: Vec::new(),
                    failure: Some(NodeFailure {
                        node_id: planned.node_id.clone(),
                        article_id: planned.article_id.clone(),
                        round: planned.round,
                        persona_id: planned.persona_id.clone(),
                        reason: FailureReason::AncestorMissing("article or persona".into()),
                    }),
                };
            };
            let mut ancestors = Vec::with_capacity(planned.ancestor_ids.len());
            for ancestor_id in &planned.ancestor_ids {
                match known.get(ancestor_id) {
                    Some(node) => ancestors.push(node.clone()),
                    None => {
                        return GenerationOutcome {
                            node: None,
                            logs: Vec::new(),
                            failure: Some(NodeFailure {
                                node_id: planned.node_id.clone(),
                                article_id: planned.article_id.clone(),
                                round: planned.round,
                                persona_id: planned.persona_id.clone(),
                                reason: FailureReason::AncestorMissing(ancestor_id.clone()),
                            }),
                        }
                    }
                }
            }
            generate_node(ctx, article, curated_record, persona, &ancestors, registry)
        });

        let mut generated_this_round = Vec::new();
        let mut logs = Vec::new();
        for outcome in outcomes {
            logs.extend(outcome.logs);
            if let Some(node) = outcome.node {
                debug_assert!(validate_node(&node, registry, None).is_empty());
                known.insert(node.node_id.clone(), node.clone());
                generated_this_round.push(node);
            }
            if let Some(failure) = outcome.failure {
                summary.failures.push(failure);
            }
        }
        store.append_claims(&generated_this_round)?;
        Store::append_jsonl(&store.step_log_path(), &logs)?;
        summary.generated += generated_this_round.len();

        if generated_this_round.is_empty() {
            return Err(PipelineError::RoundCollapsed { round });
        }
    }
    Ok(summary)
}

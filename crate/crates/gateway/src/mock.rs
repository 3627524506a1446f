//! Deterministic offline backend.
//!
//! Replies are either scripted (substring rules loaded from a file or
//! added programmatically) or synthesized from a digest of the
//! conversation, so a rerun of any pipeline stage produces byte-identical
//! output with zero network access. The synthesized replies understand the
//! pipeline's own prompts: the generation formatting step, for example,
//! returns a JSON object assembled from the earlier assistant turns of the
//! same conversation.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backend::Backend;
use crate::error::GatewayError;
use crate::request::{ChatRequest, EmbedRequest, Role, ScoreRequest};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ScriptRule {
    /// Substring of the most recent user message this rule matches.
    pub contains: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refusal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport_error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default = "default_embed_dim")]
    pub embed_dim: usize,
    #[serde(default = "default_vocab_size")]
    pub vocab_size: usize,
    /// Artificial per-call latency, mostly for concurrency tests.
    #[serde(default)]
    pub latency_ms: u64,
    #[serde(default)]
    pub rules: Vec<ScriptRule>,
}

fn default_embed_dim() -> usize {
    64
}
fn default_vocab_size() -> usize {
    100
}

impl Default for MockScript {
    fn default() -> Self {
        MockScript {
            embed_dim: default_embed_dim(),
            vocab_size: default_vocab_size(),
            latency_ms: 0,
            rules: Vec::new(),
        }
    }
}

#[derive(Debug)]
pub struct MockBackend {
    script: MockScript,
    calls: AtomicU64,
    in_flight: AtomicU64,
    max_in_flight: AtomicU64,
}

impl Default for MockBackend {
    fn default() -> Self {
        MockBackend::new(MockScript::default())
    }
}

impl MockBackend {
    pub fn new(script: MockScript) -> MockBackend {
        MockBackend {
            script,
            calls: AtomicU64::new(0),
            in_flight: AtomicU64::new(0),
            max_in_flight: AtomicU64::new(0),
        }
    }

    pub fn from_script_file(path: &std::path::Path) -> Result<MockBackend, GatewayError> {
        let text = std::fs::read_to_string(path)?;
        let script: MockScript = serde_json::from_str(&text)?;
        Ok(MockBackend::new(script))
    }

    pub fn push_rule(&mut self, rule: ScriptRule) {
        self.script.rules.push(rule);
    }

    /// Total backend invocations (all kinds).
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    /// High-water mark of simultaneous in-flight requests.
    pub fn max_in_flight(&self) -> u64 {
        self.max_in_flight.load(Ordering::SeqCst)
    }

    pub fn vocab_size(&self) -> usize {
        self.script.vocab_size
    }

    fn enter(&self) -> InFlight<'_> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.max_in_flight.fetch_max(now, Ordering::SeqCst);
        if self.script.latency_ms > 0 {
            std::thread::sleep(std::time::Duration::from_millis(self.script.latency_ms));
        }
        InFlight { backend: self }
    }
}

struct InFlight<'a> {
    backend: &'a MockBackend,
}

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        self.backend.in_flight.fetch_sub(1, Ordering::SeqCst);
    }
}

impl Backend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn chat(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        let _guard = self.enter();
        let prompt = req.last_user_content().unwrap_or_default();

        for rule in &self.script.rules {
            if !prompt.contains(&rule.contains) {
                continue;
            }
            if let Some(reason) = &rule.refusal {
                return Err(GatewayError::Refusal(reason.clone()));
            }
            if let Some(message) = &rule.transport_error {
                return Err(GatewayError::Transport { attempts: 1, message: message.clone() });
            }
            if let Some(reply) = &rule.reply {
                return Ok(reply.clone());
            }
        }

        Ok(synthesize_reply(req, prompt))
    }

    fn score(&self, req: &ScoreRequest) -> Result<Vec<f64>, GatewayError> {
        let _guard = self.enter();
        let tokens = req.text.split_whitespace().count().max(1);
        let lp = (1.0 / self.script.vocab_size as f64).ln();
        Ok(vec![lp; tokens])
    }

    fn embed(&self, req: &EmbedRequest) -> Result<Vec<Vec<f64>>, GatewayError> {
        let _guard = self.enter();
        Ok(req
            .texts
            .iter()
            .map(|text| bag_of_words_embedding(&req.model_id, text, self.script.embed_dim))
            .collect())
    }
}

fn seed_for(model_id: &str, text: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(model_id.as_bytes());
    hasher.update([0x1f]);
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Token-bag embedding: each token hashes to a fixed pseudo-random
/// direction and the text is the sum, plus a small whole-text component
/// so near-identical token sets still differ. Texts sharing vocabulary
/// therefore correlate, which gives offline runs meaningful drift and
/// cluster structure.
fn bag_of_words_embedding(model_id: &str, text: &str, dim: usize) -> Vec<f64> {
    let mut vector = vec![0.0f64; dim];
    let mut tokens = 0usize;
    for token in text.split_whitespace() {
        let token: String = token
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_lowercase();
        if token.is_empty() {
            continue;
        }
        tokens += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed_for(model_id, &token));
        for v in vector.iter_mut() {
            *v += rng.gen_range(-1.0..1.0);
        }
    }
    let mut jitter = ChaCha8Rng::seed_from_u64(seed_for(model_id, text));
    let scale = (tokens.max(1) as f64).sqrt() * 0.2;
    for v in vector.iter_mut() {
        *v += jitter.gen_range(-1.0..1.0) * scale;
    }
    vector
}

fn conversation_digest(req: &ChatRequest) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(req.model_id.as_bytes());
    for m in &req.messages {
        hasher.update([0x1f, m.role.as_str().as_bytes()[0]]);
        hasher.update(m.content.as_bytes());
    }
    hasher.finalize().into()
}

const SUBJECTS: [&str; 8] = [
    "the new budget plan",
    "the statewide audit",
    "the federal jobs report",
    "the border security bill",
    "the healthcare proposal",
    "the election recount",
    "the energy subsidy",
    "the school funding measure",
];
const VERBS: [&str; 8] = [
    "will cut",
    "quietly raises",
    "fails to track",
    "openly favors",
    "sharply expands",
    "largely ignores",
    "secretly delays",
    "directly funds",
];
const OBJECTS: [&str; 8] = [
    "taxes on working families",
    "benefits for veterans",
    "aid for small towns",
    "costs for local hospitals",
    "wages for state workers",
    "grants for rural schools",
    "fees for commuters",
    "support for first responders",
];
const TAILS: [&str; 6] = [
    "according to leaked figures",
    "despite official denials",
    "as records now show",
    "and voters deserve answers",
    "while officials stay silent",
    "per the latest filings",
];

fn synthesize_reply(req: &ChatRequest, prompt: &str) -> String {
    let digest = conversation_digest(req);
    let tag = hex::encode(&digest[..4]);

    // Generation pipeline steps, recognized by their fixed instructions.
    if prompt.contains("Return the Claim, Intent, and Explanation in JSON Format") {
        let replies: Vec<&str> = req
            .messages
            .iter()
            .filter(|m| m.role == Role::Assistant)
            .map(|m| m.content.as_str())
            .collect();
        let claim = replies.get(1).copied().unwrap_or("A mock claim.");
        let intent = replies.get(2).copied().unwrap_or("A mock intent.");
        let explanation = replies.get(3).copied().unwrap_or("A mock explanation.");
        return serde_json::json!({
            "Claim": claim,
            "Intent": intent,
            "Explanation": explanation,
        })
        .to_string();
    }
    if prompt.contains("generate a persuasive yet factually coherent claim") {
        // Weave in content words from the original claim (and pick the
        // subject from an article-stable digest) so claims of the same
        // article share vocabulary; with the token-bag embeddings this
        // gives mock runs article-level cluster and drift structure.
        if let Some(original) = original_claim_in(req) {
            let topic = topic_words(&original);
            if topic.len() == 2 {
                let article_digest: [u8; 32] = {
                    let mut hasher = Sha256::new();
                    hasher.update(original.as_bytes());
                    hasher.finalize().into()
                };
                const OPENERS: [&str; 4] =
                    ["Analysts say", "Critics argue", "Backers insist", "Reports suggest"];
                const CLOSERS: [&str; 4] = ["dispute", "fight", "debate", "standoff"];
                return format!(
                    "{} {} {} {}, echoing the {} {} {}.",
                    OPENERS[digest[5] as usize % OPENERS.len()],
                    SUBJECTS[article_digest[0] as usize % SUBJECTS.len()],
                    VERBS[digest[2] as usize % VERBS.len()],
                    OBJECTS[digest[3] as usize % OBJECTS.len()],
                    topic[0],
                    topic[1],
                    CLOSERS[digest[6] as usize % CLOSERS.len()],
                );
            }
        }
        return format!(
            "Analysts say {} {} {} {}.",
            SUBJECTS[digest[1] as usize % SUBJECTS.len()],
            VERBS[digest[2] as usize % VERBS.len()],
            OBJECTS[digest[3] as usize % OBJECTS.len()],
            TAILS[digest[4] as usize % TAILS.len()],
        );
    }
    if prompt.contains("State your intent when generating this claim") {
        return format!("To steer the audience toward reading {tag} as the decisive fact.");
    }
    if prompt.contains("Provide a structured explanation of the modified claim") {
        return format!(
            "The claim was reframed around {tag} to match the role while staying tied to the sources."
        );
    }
    if prompt.contains("Your task is to analyze and reason about the original claim") {
        return format!(
            "Reasoning {tag}: the role weighs the owner, the claim, and the sources, then picks what to stress."
        );
    }

    // Labeling pipeline steps.
    if prompt.contains("Select the label based on the highest confidence score") {
        let label = previous_confidence_argmax(req).unwrap_or_else(|| pick_label(&digest));
        return serde_json::json!({
            "Label": label,
            "Explanation": format!("Mock verdict {tag} from the confidence scores."),
        })
        .to_string();
    }
    if prompt.contains("assign the appropriate label") {
        let probs = pseudo_probs(&digest);
        return format!(
            "Weighing the analysis, the scores are {{\"True\": {:.6}, \"Half-True\": {:.6}, \"False\": {:.6}}}.",
            probs[0], probs[1], probs[2]
        );
    }
    if prompt.contains("You are a fact-checking assistant") {
        return format!("Analysis {tag}: the claim is partially supported by the evidence.");
    }

    // Curation extraction.
    if prompt.contains("You are a fact-checking annotator") {
        return serde_json::json!({
            "Misinformation Sources": [
                format!("Statement {tag} circulated by the claim owner before the vote."),
                format!("A supporting account {tag} repeated the figure without context."),
            ],
            "Fact-Checking Evidence": [
                format!("Official records {tag} show a different total."),
            ],
            "Transition Sentence": "But the record shows otherwise.",
            "Explanation": "Mock extraction.",
        })
        .to_string();
    }

    // Classification strategies.
    if prompt.contains("select a \"Label\" from") || prompt.contains("assign an appropriate 'Label'") {
        return serde_json::json!({
            "Label": pick_label(&digest),
            "Explanation": format!("Mock classification {tag}."),
        })
        .to_string();
    }

    // Judge adapters.
    if prompt.contains("Classify the sentiment of the claim") {
        let sentiment = ["Negative", "Neutral", "Positive"][digest[5] as usize % 3];
        return serde_json::json!({ "sentiment": sentiment }).to_string();
    }
    if prompt.contains("Score the moral framing of the claim") {
        let foundations = [
            "Care", "Harm", "Fairness", "Cheating", "Loyalty", "Betrayal", "Authority",
            "Subversion", "Purity", "Degradation",
        ];
        let mut map = serde_json::Map::new();
        for (i, name) in foundations.iter().enumerate() {
            let v = (digest[6 + i] as f64) / 1020.0;
            map.insert(name.to_string(), serde_json::json!((v * 1000.0).round() / 1000.0));
        }
        return serde_json::Value::Object(map).to_string();
    }
    if prompt.contains("decide whether the claim could be fact-checked") {
        let verdict = match digest[5] % 10 {
            0 | 1 => "Feasible",
            8 | 9 => "Infeasible",
            _ => "Feasible with web search",
        };
        return serde_json::json!({ "feasibility": verdict }).to_string();
    }

    // Paraphrasing for annotation packets.
    if prompt.contains("Paraphrase each of the following") {
        let body = prompt.split("---").nth(1).unwrap_or("").trim();
        let lines: Vec<String> = body
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| format!("In short, {}", l.trim().trim_start_matches("- ")))
            .collect();
        return lines.join("\n");
    }

    format!("Mock reply {tag}.")
}

/// The "Original Claim: ..." line of the opening prompt, when present.
fn original_claim_in(req: &ChatRequest) -> Option<String> {
    for message in &req.messages {
        if message.role != Role::User {
            continue;
        }
        for line in message.content.lines() {
            if let Some(rest) = line.strip_prefix("Original Claim: ") {
                return Some(rest.trim().to_string());
            }
        }
    }
    None
}

/// The two longest content words (length >= 5), in their original order.
fn topic_words(text: &str) -> Vec<String> {
    let mut words: Vec<(usize, String)> = Vec::new();
    for (pos, token) in text.split_whitespace().enumerate() {
        let word: String = token
            .chars()
            .filter(|c| c.is_alphabetic())
            .collect::<String>()
            .to_lowercase();
        if word.len() >= 5 && !words.iter().any(|(_, w)| *w == word) {
            words.push((pos, word));
        }
    }
    words.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
    words.truncate(2);
    words.sort_by_key(|(pos, _)| *pos);
    words.into_iter().map(|(_, w)| w).collect()
}

fn pick_label(digest: &[u8; 32]) -> &'static str {
    ["True", "Half-True", "False"][digest[0] as usize % 3]
}

fn pseudo_probs(digest: &[u8; 32]) -> [f64; 3] {
    let raw = [1 + digest[0] as u32, 1 + digest[1] as u32, 1 + digest[2] as u32];
    let sum: u32 = raw.iter().sum();
    [
        raw[0] as f64 / sum as f64,
        raw[1] as f64 / sum as f64,
        raw[2] as f64 / sum as f64,
    ]
}

/// Recover the confidence scores the mock emitted in the previous
/// assistant turn and return the first label attaining the maximum, in
/// True / Half-True / False order.
fn previous_confidence_argmax(req: &ChatRequest) -> Option<&'static str> {
    let names = ["True", "Half-True", "False"];
    for message in req.messages.iter().rev() {
        if message.role != Role::Assistant {
            continue;
        }
        let Some(open) = message.content.find('{') else { continue };
        let Some(close) = message.content.rfind('}') else { continue };
        let Ok(value) =
            serde_json::from_str::<serde_json::Value>(&message.content[open..=close])
        else {
            continue;
        };
        let obj = value.as_object()?;
        let mut best: Option<(usize, f64)> = None;
        for (i, name) in names.iter().enumerate() {
            let v = obj.get(*name).and_then(|v| v.as_f64())?;
            if best.map(|(_, b)| v > b).unwrap_or(true) {
                best = Some((i, v));
            }
        }
        return best.map(|(i, _)| names[i]);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::request::Message;

    fn chat_req(messages: Vec<Message>) -> ChatRequest {
        ChatRequest {
            model_id: "mock-model".into(),
            messages,
            temperature: 0.0,
            max_tokens: 256,
            seed: None,
        }
    }

    #[test]
    fn scripted_rule_wins_over_synthesis() {
        let mut backend = MockBackend::default();
        backend.push_rule(ScriptRule {
            contains: "magic phrase".into(),
            reply: Some("scripted!".into()),
            ..Default::default()
        });
        let req = chat_req(vec![Message::user("please include the magic phrase here")]);
        assert_eq!(backend.chat(&req).unwrap(), "scripted!");
        assert_eq!(backend.calls(), 1);
    }

    #[test]
    fn refusal_rule_surfaces_as_refusal() {
        let mut backend = MockBackend::default();
        backend.push_rule(ScriptRule {
            contains: "forbidden".into(),
            refusal: Some("policy".into()),
            ..Default::default()
        });
        let req = chat_req(vec![Message::user("forbidden topic")]);
        assert!(matches!(backend.chat(&req).unwrap_err(), GatewayError::Refusal(_)));
    }

    #[test]
    fn format_step_reuses_earlier_turns() {
        let req = chat_req(vec![
            Message::user("Your task is to analyze and reason about the original claim ..."),
            Message::assistant("reasoning text"),
            Message::user("... generate a persuasive yet factually coherent claim ..."),
            Message::assistant("The claim text."),
            Message::user("State your intent when generating this claim ..."),
            Message::assistant("The intent."),
            Message::user("Provide a structured explanation of the modified claim ..."),
            Message::assistant("The explanation."),
            Message::user("Return the Claim, Intent, and Explanation in JSON Format ..."),
        ]);
        let backend = MockBackend::default();
        let reply = backend.chat(&req).unwrap();
        let value: serde_json::Value = serde_json::from_str(&reply).unwrap();
        assert_eq!(value["Claim"], "The claim text.");
        assert_eq!(value["Intent"], "The intent.");
        assert_eq!(value["Explanation"], "The explanation.");
    }

    #[test]
    fn label_selection_is_argmax_of_emitted_scores() {
        let backend = MockBackend::default();
        let assign = chat_req(vec![
            Message::user("You are a fact-checking assistant ..."),
            Message::assistant("analysis"),
            Message::user("Based on your factual analysis, assign the appropriate label ..."),
        ]);
        let scores_reply = backend.chat(&assign).unwrap();

        let mut messages = assign.messages.clone();
        messages.push(Message::assistant(scores_reply.clone()));
        messages.push(Message::user(
            "Select the label based on the highest confidence score ...",
        ));
        let reply = backend.chat(&chat_req(messages)).unwrap();
        let value: serde_json::Value = serde_json::from_str(&reply).unwrap();

        // Recompute the argmax from the emitted scores.
        let open = scores_reply.find('{').unwrap();
        let close = scores_reply.rfind('}').unwrap();
        let scores: serde_json::Value =
            serde_json::from_str(&scores_reply[open..=close]).unwrap();
        let mut best = ("True", -1.0);
        for name in ["True", "Half-True", "False"] {
            let v = scores[name].as_f64().unwrap();
            if v > best.1 {
                best = (name, v);
            }
        }
        assert_eq!(value["Label"], best.0);
    }

    #[test]
    fn scoring_is_uniform_over_vocab() {
        let backend = MockBackend::default();
        let scores = backend
            .score(&ScoreRequest { model_id: "m".into(), text: "five tokens in this text".into() })
            .unwrap();
        assert_eq!(scores.len(), 5);
        let expected = (1.0f64 / 100.0).ln();
        for s in scores {
            assert!((s - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn embeddings_are_deterministic_per_text() {
        let backend = MockBackend::default();
        let req = EmbedRequest {
            model_id: "m".into(),
            texts: vec!["same text".into(), "same text".into(), "other".into()],
        };
        let vectors = backend.embed(&req).unwrap();
        assert_eq!(vectors[0], vectors[1]);
        assert_ne!(vectors[0], vectors[2]);
        assert_eq!(vectors[0].len(), 64);
    }

    #[test]
    fn synthesized_claims_fit_the_word_budget() {
        let backend = MockBackend::default();
        for i in 0..20 {
            let req = chat_req(vec![Message::user(format!(
                "context {i} ... generate a persuasive yet factually coherent claim ..."
            ))]);
            let claim = backend.chat(&req).unwrap();
            assert!(claim.split_whitespace().count() <= 20, "{claim}");
        }
    }

    #[test]
    fn synthesized_claims_carry_the_article_topic() {
        let backend = MockBackend::default();
        let opening = "You are a Skeptic...\n\
                       Original Claim Owner: Jane Smith\n\
                       Original Claim: The federal infrastructure proposal expands broadband coverage.\n\
                       Original Claim Context (Sources): - x";
        let req = chat_req(vec![
            Message::user(opening),
            Message::assistant("reasoning"),
            Message::user("... generate a persuasive yet factually coherent claim ..."),
        ]);
        let claim = backend.chat(&req).unwrap();
        assert!(claim.contains("infrastructure"), "{claim}");
        assert!(claim.contains("broadband"), "{claim}");
        assert!(claim.split_whitespace().count() <= 20, "{claim}");
    }

    #[test]
    fn shared_vocabulary_raises_embedding_similarity() {
        let backend = MockBackend::default();
        let req = EmbedRequest {
            model_id: "m".into(),
            texts: vec![
                "the budget dispute over school funding continues".into(),
                "school funding remains a budget dispute".into(),
                "astronauts mapped a crater on the lunar surface".into(),
            ],
        };
        let vectors = backend.embed(&req).unwrap();
        let cos = |a: &Vec<f64>, b: &Vec<f64>| {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            dot / (na * nb)
        };
        let related = cos(&vectors[0], &vectors[1]);
        let unrelated = cos(&vectors[0], &vectors[2]);
        assert!(related > unrelated + 0.2, "related {related} vs unrelated {unrelated}");
    }
}

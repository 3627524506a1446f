//! Judge adapters: pluggable external classifiers for sentiment, moral
//! framing, and feasibility.
//!
//! Adapters speak a one-POST JSON contract so model-backed scorers stay
//! replaceable:
//!
//! ```text
//! POST {endpoint}
//! {"kind": "sentiment" | "morality" | "feasibility", "texts": ["...", ...]}
//! -> {"verdicts": [<kind-specific JSON>, ...]}
//! ```
//!
//! Kind-specific verdict shapes:
//! * sentiment:   {"sentiment": "Negative" | "Neutral" | "Positive"}
//! * morality:    {"Care": 0.1, "Harm": 0.0, ... all ten foundations in [0,1]}
//! * feasibility: {"feasibility": "Feasible" | "Feasible with web search" | "Infeasible"}
//!
//! A reference adapter that prompts a chat model through the gateway is
//! included, which is also what offline mock runs use.

use std::collections::BTreeMap;

use claimdrift_gateway::{extract_last_json_object, ChatRequest, Gateway, Message};
use claimdrift_metrics::{mean_se, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeKind {
    Sentiment,
    Morality,
    Feasibility,
}

impl JudgeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            JudgeKind::Sentiment => "sentiment",
            JudgeKind::Morality => "morality",
            JudgeKind::Feasibility => "feasibility",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sentiment {
    Negative,
    Neutral,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feasibility {
    Feasible,
    FeasibleWithWebSearch,
    Infeasible,
}

pub const MORAL_FOUNDATIONS: [&str; 10] = [
    "Care", "Harm", "Fairness", "Cheating", "Loyalty", "Betrayal", "Authority", "Subversion",
    "Purity", "Degradation",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum VerdictPayload {
    Sentiment(Sentiment),
    Morality(BTreeMap<String, f64>),
    Feasibility(Feasibility),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub node_id: String,
    pub payload: VerdictPayload,
}

/// Anything that can produce raw verdict JSON for a batch of texts.
pub trait JudgeAdapter: Sync {
    fn judge_batch(&self, kind: JudgeKind, texts: &[String]) -> Result<Vec<Value>, AnalysisError>;
}

/// HTTP adapter implementing the one-POST contract.
pub struct HttpJudgeAdapter {
    pub endpoint: String,
}

impl JudgeAdapter for HttpJudgeAdapter {
    fn judge_batch(&self, kind: JudgeKind, texts: &[String]) -> Result<Vec<Value>, AnalysisError> {
        let body = serde_json::json!({ "kind": kind.as_str(), "texts": texts });
        let response = ureq::post(&self.endpoint)
            .set("Content-Type", "application/json")
            .send_json(body)
            .map_err(|e| AnalysisError::JudgeEndpoint(e.to_string()))?;
        let value: Value = response
            .into_json()
            .map_err(|e| AnalysisError::JudgeEndpoint(e.to_string()))?;
        let verdicts = value
            .get("verdicts")
            .and_then(|v| v.as_array())
            .ok_or_else(|| AnalysisError::JudgeEndpoint("response without verdicts".into()))?;
        Ok(verdicts.clone())
    }
}

/// Reference adapter: prompts a chat model once per text through the
/// gateway. Works offline against the mock backend.
pub struct LlmJudgeAdapter<'a> {
    pub gateway: &'a Gateway,
    pub model_id: String,
    pub max_tokens: u32,
}

impl LlmJudgeAdapter<'_> {
    fn prompt_for(kind: JudgeKind, text: &str) -> String {
        match kind {
            JudgeKind::Sentiment => format!(
                "Classify the sentiment of the claim below as Negative, Neutral, or Positive.\n\n\
                 Claim: \"{text}\"\n\n\
                 Return JSON: {{\"sentiment\": \"<Negative / Neutral / Positive>\"}}"
            ),
            JudgeKind::Morality => format!(
                "Score the moral framing of the claim below on each of the ten moral foundations \
                 (Care, Harm, Fairness, Cheating, Loyalty, Betrayal, Authority, Subversion, Purity, \
                 Degradation) with a number between 0 and 1.\n\n\
                 Claim: \"{text}\"\n\n\
                 Return JSON with exactly those ten keys."
            ),
            JudgeKind::Feasibility => format!(
                "Read the claim below and decide whether the claim could be fact-checked as \
                 stated: reply Feasible if it can be checked from the text alone, Feasible with \
                 web search if checking needs retrieval, or Infeasible.\n\n\
                 Claim: \"{text}\"\n\n\
                 Return JSON: {{\"feasibility\": \"<Feasible / Feasible with web search / Infeasible>\"}}"
            ),
        }
    }
}

impl JudgeAdapter for LlmJudgeAdapter<'_> {
    fn judge_batch(&self, kind: JudgeKind, texts: &[String]) -> Result<Vec<Value>, AnalysisError> {
        texts
            .iter()
            .map(|text| {
                let request = ChatRequest {
                    model_id: self.model_id.clone(),
                    messages: vec![Message::user(Self::prompt_for(kind, text))],
                    temperature: 0.0,
                    max_tokens: self.max_tokens,
                    seed: None,
                };
                let reply = self.gateway.chat(&request)?;
                extract_last_json_object(&reply)
                    .ok_or_else(|| AnalysisError::JudgeEndpoint("reply without JSON".into()))
            })
            .collect()
    }
}

/// Per-node schema failures: (node_id, reason).
pub type JudgeFailures = Vec<(String, String)>;

/// Run one judge kind over (node_id, text) pairs. Replies that fail the
/// kind schema are skipped and reported, never fatal.
pub fn judge(
    items: &[(String, String)],
    kind: JudgeKind,
    adapter: &dyn JudgeAdapter,
) -> Result<(Vec<JudgeVerdict>, JudgeFailures), AnalysisError> {
    let texts: Vec<String> = items.iter().map(|(_, text)| text.clone()).collect();
    let raw = adapter.judge_batch(kind, &texts)?;
    if raw.len() != items.len() {
        return Err(AnalysisError::JudgeEndpoint(format!(
            "{} texts but {} verdicts",
            items.len(),
            raw.len()
        )));
    }
    let mut verdicts = Vec::new();
    let mut failures = Vec::new();
    for ((node_id, _), value) in items.iter().zip(raw) {
        match parse_verdict(kind, &value) {
            Ok(payload) => verdicts.push(JudgeVerdict { node_id: node_id.clone(), payload }),
            Err(reason) => failures.push((node_id.clone(), reason)),
        }
    }
    Ok((verdicts, failures))
}

fn parse_verdict(kind: JudgeKind, value: &Value) -> Result<VerdictPayload, String> {
    match kind {
        JudgeKind::Sentiment => {
            let text = value
                .get("sentiment")
                .and_then(|v| v.as_str())
                .or_else(|| value.as_str())
                .ok_or("missing sentiment field")?;
            let sentiment = match text.trim().to_ascii_lowercase().as_str() {
                "negative" => Sentiment::Negative,
                "neutral" => Sentiment::Neutral,
                "positive" => Sentiment::Positive,
                other => return Err(format!("unknown sentiment {other:?}")),
            };
            Ok(VerdictPayload::Sentiment(sentiment))
        }
        JudgeKind::Morality => {
            let obj = value.as_object().ok_or("morality verdict is not an object")?;
            let mut map = BTreeMap::new();
            for foundation in MORAL_FOUNDATIONS {
                let score = obj
                    .get(foundation)
                    .and_then(|v| v.as_f64())
                    .ok_or_else(|| format!("missing foundation {foundation:?}"))?;
                if !(0.0..=1.0).contains(&score) {
                    return Err(format!("{foundation} score {score} outside [0,1]"));
                }
                map.insert(foundation.to_string(), score);
            }
            Ok(VerdictPayload::Morality(map))
        }
        JudgeKind::Feasibility => {
            let text = value
                .get("feasibility")
                .and_then(|v| v.as_str())
                .or_else(|| value.as_str())
                .ok_or("missing feasibility field")?;
            let norm: String = text
                .trim()
                .to_ascii_lowercase()
                .chars()
                .map(|c| if c == '_' || c == '-' { ' ' } else { c })
                .collect();
            let feasibility = match norm.as_str() {
                "feasible" => Feasibility::Feasible,
                "feasible with web search" => Feasibility::FeasibleWithWebSearch,
                "infeasible" | "not feasible" => Feasibility::Infeasible,
                other => return Err(format!("unknown feasibility {other:?}")),
            };
            Ok(VerdictPayload::Feasibility(feasibility))
        }
    }
}

/// Grouping key for report rows: round 0 is the Original row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub round: u8,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentRow {
    pub group: GroupKey,
    pub negative: usize,
    pub neutral: usize,
    pub positive: usize,
}

pub fn sentiment_counts(
    verdicts: &[JudgeVerdict],
    groups: &BTreeMap<String, GroupKey>,
) -> Vec<SentimentRow> {
    let mut table: BTreeMap<GroupKey, (usize, usize, usize)> = BTreeMap::new();
    for verdict in verdicts {
        let VerdictPayload::Sentiment(s) = &verdict.payload else { continue };
        let Some(group) = groups.get(&verdict.node_id) else { continue };
        let entry = table.entry(group.clone()).or_default();
        match s {
            Sentiment::Negative => entry.0 += 1,
            Sentiment::Neutral => entry.1 += 1,
            Sentiment::Positive => entry.2 += 1,
        }
    }
    table
        .into_iter()
        .map(|(group, (negative, neutral, positive))| SentimentRow {
            group,
            negative,
            neutral,
            positive,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoralitySummaryRow {
    pub foundation: String,
    pub group: GroupKey,
    pub mean: Scalar,
    pub se: Scalar,
    pub n: usize,
}

/// Mean and standard error per (foundation, group). Groups with a single
/// verdict get SE 0.
pub fn morality_summary(
    verdicts: &[JudgeVerdict],
    groups: &BTreeMap<String, GroupKey>,
) -> Vec<MoralitySummaryRow> {
    let mut samples: BTreeMap<(String, GroupKey), Vec<Scalar>> = BTreeMap::new();
    for verdict in verdicts {
        let VerdictPayload::Morality(map) = &verdict.payload else { continue };
        let Some(group) = groups.get(&verdict.node_id) else { continue };
        for (foundation, &score) in map {
            samples
                .entry((foundation.clone(), group.clone()))
                .or_default()
                .push(score);
        }
    }
    samples
        .into_iter()
        .map(|((foundation, group), values)| {
            let (mean, se) = match mean_se(&values) {
                Ok(summary) => (summary.mean, summary.se),
                Err(_) => (values.iter().sum::<Scalar>() / values.len() as Scalar, 0.0),
            };
            MoralitySummaryRow { foundation, group, mean, se, n: values.len() }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: usize,
    pub feasible_with_web_search: usize,
    pub infeasible: usize,
    pub total: usize,
    /// Percentage of verdicts that are feasible in either form.
    pub rate_percent: Scalar,
}

pub fn feasibility_rate(verdicts: &[JudgeVerdict]) -> FeasibilityReport {
    let mut report = FeasibilityReport {
        feasible: 0,
        feasible_with_web_search: 0,
        infeasible: 0,
        total: 0,
        rate_percent: 0.0,
    };
    for verdict in verdicts {
        let VerdictPayload::Feasibility(f) = &verdict.payload else { continue };
        report.total += 1;
        match f {
            Feasibility::Feasible => report.feasible += 1,
            Feasibility::FeasibleWithWebSearch => report.feasible_with_web_search += 1,
            Feasibility::Infeasible => report.infeasible += 1,
        }
    }
    if report.total > 0 {
        report.rate_percent = 100.0 * (report.feasible + report.feasible_with_web_search) as Scalar
            / report.total as Scalar;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    struct FixedAdapter {
        replies: Vec<Value>,
    }

    impl JudgeAdapter for FixedAdapter {
        fn judge_batch(&self, _kind: JudgeKind, _texts: &[String]) -> Result<Vec<Value>, AnalysisError> {
            Ok(self.replies.clone())
        }
    }

    fn items(n: usize) -> Vec<(String, String)> {
        (0..n).map(|i| (format!("node{i}"), format!("claim {i}"))).collect()
    }

    #[test]
    fn sentiment_verdicts_aggregate_by_group() {
        let adapter = FixedAdapter {
            replies: vec![
                serde_json::json!({"sentiment": "Negative"}),
                serde_json::json!({"sentiment": "neutral"}),
                serde_json::json!({"sentiment": "Positive"}),
                serde_json::json!({"sentiment": "Negative"}),
            ],
        };
        let items = items(4);
        let (verdicts, failures) = judge(&items, JudgeKind::Sentiment, &adapter).unwrap();
        assert!(failures.is_empty());

        let mut groups = BTreeMap::new();
        groups.insert("node0".into(), GroupKey { round: 1, role: "Democrat".into() });
        groups.insert("node1".into(), GroupKey { round: 1, role: "Democrat".into() });
        groups.insert("node2".into(), GroupKey { round: 2, role: "Moderate".into() });
        groups.insert("node3".into(), GroupKey { round: 2, role: "Moderate".into() });
        let rows = sentiment_counts(&verdicts, &groups);
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].negative, rows[0].neutral, rows[0].positive), (1, 1, 0));
        assert_eq!((rows[1].negative, rows[1].neutral, rows[1].positive), (1, 0, 1));
    }

    #[test]
    fn morality_missing_foundation_is_a_per_node_failure() {
        let mut full = serde_json::Map::new();
        for f in MORAL_FOUNDATIONS {
            full.insert(f.to_string(), serde_json::json!(0.25));
        }
        let mut missing = full.clone();
        missing.remove("Purity");
        let adapter = FixedAdapter {
            replies: vec![Value::Object(full), Value::Object(missing)],
        };
        let items = items(2);
        let (verdicts, failures) = judge(&items, JudgeKind::Morality, &adapter).unwrap();
        assert_eq!(verdicts.len(), 1);
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].0, "node1");
        let VerdictPayload::Morality(map) = &verdicts[0].payload else { panic!() };
        assert_eq!(map.len(), 10);
    }

    #[test]
    fn feasibility_fixture_rate() {
        // 300 verdicts: 203 need web search, 28 directly feasible,
        // 69 infeasible -> 231/300 = 77.0%.
        let mut verdicts = Vec::new();
        let push = |verdicts: &mut Vec<JudgeVerdict>, n: usize, f: Feasibility| {
            for i in 0..n {
                verdicts.push(JudgeVerdict {
                    node_id: format!("{f:?}-{i}"),
                    payload: VerdictPayload::Feasibility(f),
                });
            }
        };
        push(&mut verdicts, 203, Feasibility::FeasibleWithWebSearch);
        push(&mut verdicts, 28, Feasibility::Feasible);
        push(&mut verdicts, 69, Feasibility::Infeasible);
        let report = feasibility_rate(&verdicts);
        assert_eq!(report.total, 300);
        assert!((report.rate_percent - 77.0).abs() < 0.1);
    }

    #[test]
    fn feasibility_strings_normalize() {
        let adapter = FixedAdapter {
            replies: vec![
                serde_json::json!({"feasibility": "Feasible with web search"}),
                serde_json::json!({"feasibility": "feasible_with_web_search"}),
                serde_json::json!({"feasibility": "INFEASIBLE"}),
            ],
        };
        let items = items(3);
        let (verdicts, failures) = judge(&items, JudgeKind::Feasibility, &adapter).unwrap();
        assert!(failures.is_empty());
        assert_eq!(
            verdicts[0].payload,
            VerdictPayload::Feasibility(Feasibility::FeasibleWithWebSearch)
        );
        assert_eq!(verdicts[0].payload, verdicts[1].payload);
        assert_eq!(verdicts[2].payload, VerdictPayload::Feasibility(Feasibility::Infeasible));
    }

    #[test]
    fn morality_summary_uses_mean_and_se() {
        let mk = |node: &str, score: f64| {
            let mut map = BTreeMap::new();
            for f in MORAL_FOUNDATIONS {
                map.insert(f.to_string(), score);
            }
            JudgeVerdict { node_id: node.into(), payload: VerdictPayload::Morality(map) }
        };
        let verdicts = vec![mk("a", 0.0), mk("b", 1.0)];
        let mut groups = BTreeMap::new();
        let group = GroupKey { round: 1, role: "Democrat".into() };
        groups.insert("a".into(), group.clone());
        groups.insert("b".into(), group.clone());
        let rows = morality_summary(&verdicts, &groups);
        assert_eq!(rows.len(), 10);
        for row in rows {
            assert!((row.mean - 0.5).abs() < 1e-12);
            assert!((row.se - 0.5).abs() < 1e-12);
        }
    }
}

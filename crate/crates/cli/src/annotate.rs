//! Annotation packets for the blind human study, ratings import, and the
//! human-vs-model agreement table.

use std::collections::BTreeMap;
use std::path::Path;

use claimdrift_core::{ClaimNode, RaterKind, RatingRecord, Store};
use claimdrift_gateway::{ChatRequest, Message};
use claimdrift_metrics::{binned_jsd, AgreementInput, Scalar};
use serde::{Deserialize, Serialize};

use crate::commands::{metric_path, EXIT_PARTIAL};
use crate::context::RunContext;
use crate::data::{self, fmt_f};
use crate::evaluate::seeded_sample;

/// One blind-annotation row: claim plus paraphrased context, never metric
/// values or gold labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationPacket {
    pub node_id: String,
    pub claim_text: String,
    pub role_name: String,
    pub paraphrased_sources: Vec<String>,
    pub paraphrased_evidence: Vec<String>,
    pub previous_claims_display: Vec<String>,
}

const LIST_SEPARATOR: &str = " | ";

pub fn export(
    ctx: &RunContext,
    sample: usize,
    no_paraphrase: bool,
    output: Option<&Path>,
    stratify: Option<&str>,
) -> anyhow::Result<i32> {
    let claims = ctx.store.load_claims()?;
    let registry = ctx.personas()?;
    let curated = data::load_curated(&ctx.store)?;
    let generated: Vec<ClaimNode> =
        claims.values().filter(|n| n.round > 0).cloned().collect();

    let selected = match stratify {
        None => seeded_sample(generated, sample, ctx.seed)?,
        Some(spec) => stratified_sample(generated, sample, ctx.seed, spec)?,
    };

    let mut packets = Vec::new();
    for node in &selected {
        let role_name = node
            .persona_id
            .as_deref()
            .and_then(|pid| registry.get(pid))
            .map(|p| p.role_name.clone())
            .unwrap_or_else(|| "Unknown".to_string());
        let (sources, evidence) = match curated.get(&node.article_id) {
            Some(record) => {
                (record.misinformation_sources.clone(), record.fact_checking_evidence.clone())
            }
            None => (Vec::new(), Vec::new()),
        };
        let (paraphrased_sources, paraphrased_evidence) = if no_paraphrase {
            (sources, evidence)
        } else {
            (paraphrase(ctx, &sources)?, paraphrase(ctx, &evidence)?)
        };
        let previous_claims_display = node
            .ancestor_ids
            .iter()
            .filter_map(|id| claims.get(id))
            .map(|ancestor| {
                let role = ancestor
                    .persona_id
                    .as_deref()
                    .and_then(|pid| registry.get(pid))
                    .map(|p| p.role_name.clone())
                    .unwrap_or_else(|| "Unknown".to_string());
                format!("{role}: {}", ancestor.claim_text)
            })
            .collect();
        packets.push(AnnotationPacket {
            node_id: node.node_id.clone(),
            claim_text: node.claim_text.clone(),
            role_name,
            paraphrased_sources,
            paraphrased_evidence,
            previous_claims_display,
        });
    }

    let default_path = ctx.store.reports_dir().join("annotation_packets.csv");
    let path = output.unwrap_or(&default_path);
    let rows: Vec<Vec<String>> = packets
        .iter()
        .map(|p| {
            vec![
                p.node_id.clone(),
                p.claim_text.clone(),
                p.role_name.clone(),
                p.paraphrased_sources.join(LIST_SEPARATOR),
                p.paraphrased_evidence.join(LIST_SEPARATOR),
                p.previous_claims_display.join(LIST_SEPARATOR),
            ]
        })
        .collect();
    data::write_csv(
        path,
        &["node_id", "claim_text", "role_name", "paraphrased_sources", "paraphrased_evidence", "previous_claims"],
        &rows,
    )?;
    ctx.write_call_ledger("annotate-export")?;
    println!("exported {} packet(s) -> {}", packets.len(), path.display());
    Ok(0)
}

fn stratified_sample(
    nodes: Vec<ClaimNode>,
    sample: usize,
    seed: u64,
    spec: &str,
) -> anyhow::Result<Vec<ClaimNode>> {
    let by_round = spec.contains("round");
    let by_persona = spec.contains("persona");
    anyhow::ensure!(by_round || by_persona, "--stratify expects round, persona, or round,persona");
    let mut strata: BTreeMap<(u8, String), Vec<ClaimNode>> = BTreeMap::new();
    for node in nodes {
        let key = (
            if by_round { node.round } else { 0 },
            if by_persona { node.persona_id.clone().unwrap_or_default() } else { String::new() },
        );
        strata.entry(key).or_default().push(node);
    }
    let k = strata.len();
    anyhow::ensure!(k > 0, "no generated claims to sample");
    let base = sample / k;
    let mut remainder = sample % k;
    let mut out = Vec::new();
    for (i, (_, stratum)) in strata.into_iter().enumerate() {
        let extra = if remainder > 0 { remainder -= 1; 1 } else { 0 };
        let want = (base + extra).min(stratum.len());
        out.extend(seeded_sample(stratum, want, seed.wrapping_add(i as u64))?);
    }
    Ok(out)
}

/// Gateway-backed paraphrase of a bullet list; one output line per input
/// line.
fn paraphrase(ctx: &RunContext, items: &[String]) -> anyhow::Result<Vec<String>> {
    if items.is_empty() {
        return Ok(Vec::new());
    }
    let stage = ctx.config.stage("paraphrase");
    let gateway = ctx.gateway("paraphrase")?;
    let body = items.iter().map(|s| format!("- {s}")).collect::<Vec<_>>().join("\n");
    let prompt = format!(
        "Paraphrase each of the following lines in plain concise language, one output line per \
         input line, keeping the order.\n---\n{body}"
    );
    let request = ChatRequest {
        model_id: stage.model_id.clone(),
        messages: vec![Message::user(prompt)],
        temperature: stage.temperature,
        max_tokens: stage.max_tokens,
        seed: None,
    };
    let reply = gateway.chat(&request)?;
    Ok(reply.lines().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect())
}

pub fn import(ctx: &RunContext, input: &Path) -> anyhow::Result<i32> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(input)?;
    let mut accepted = Vec::new();
    let mut rejected = 0usize;
    for (idx, row) in reader.records().enumerate() {
        let row = row?;
        match parse_rating_row(&row) {
            Ok(record) => accepted.push(record),
            Err(reason) => {
                rejected += 1;
                eprintln!("row {} rejected: {reason}", idx + 2);
            }
        }
    }
    Store::append_jsonl(&ratings_path(&ctx.store), &accepted)?;
    ctx.update_manifest(|m| {
        let (all, _) = Store::read_jsonl::<RatingRecord>(&ratings_path(&ctx.store)).unwrap_or_default();
        m.stage_counts.insert("ratings".into(), all.len() as u64);
    })?;
    ctx.write_call_ledger("annotate-import")?;
    println!("imported {} rating(s), rejected {rejected}", accepted.len());
    Ok(if rejected == 0 { 0 } else { EXIT_PARTIAL })
}

pub fn ratings_path(store: &Store) -> std::path::PathBuf {
    store.metrics_dir().join("ratings.jsonl")
}

fn parse_rating_row(row: &csv::StringRecord) -> Result<RatingRecord, String> {
    let field = |i: usize, name: &str| -> Result<String, String> {
        row.get(i).map(|s| s.trim().to_string()).ok_or_else(|| format!("missing {name}"))
    };
    let likert = |i: usize, name: &str| -> Result<u8, String> {
        let raw = field(i, name)?;
        let value: u8 = raw.parse().map_err(|_| format!("{name} {raw:?} is not an integer"))?;
        if !(1..=5).contains(&value) {
            return Err(format!("{name} {value} outside 1..=5"));
        }
        Ok(value)
    };
    let rater_kind = RaterKind::parse(&field(2, "rater_kind")?)
        .ok_or_else(|| "rater_kind must be human or model".to_string())?;
    let q5_label = field(7, "q5_label")?
        .parse()
        .map_err(|_| "q5_label must be True / Half-True / False".to_string())?;
    Ok(RatingRecord {
        node_id: field(0, "node_id")?,
        rater_id: field(1, "rater_id")?,
        rater_kind,
        q1_role_consistency: likert(3, "q1")?,
        q2_relevance: likert(4, "q2")?,
        q3_fluency: likert(5, "q3")?,
        q4_factuality: likert(6, "q4")?,
        q5_label,
    })
}

const QUESTIONS: [&str; 5] = [
    "Role-Playing Consistency (Q1)",
    "Content Relevance (Q2)",
    "Fluency (Q3)",
    "Factuality (Q4)",
    "Label Assignment (Q5)",
];

/// Per-question binned divergence between pooled human and pooled model
/// ratings: five Likert bins for Q1-Q4, three label bins for Q5.
pub fn agreement_table(ratings: &[RatingRecord]) -> anyhow::Result<Vec<(String, Scalar)>> {
    let humans: Vec<&RatingRecord> =
        ratings.iter().filter(|r| r.rater_kind == RaterKind::Human).collect();
    let models: Vec<&RatingRecord> =
        ratings.iter().filter(|r| r.rater_kind == RaterKind::Model).collect();
    anyhow::ensure!(!humans.is_empty(), "no human ratings present");
    anyhow::ensure!(!models.is_empty(), "no model ratings present");

    let likert_of = |r: &RatingRecord, q: usize| -> i64 {
        match q {
            0 => r.q1_role_consistency as i64,
            1 => r.q2_relevance as i64,
            2 => r.q3_fluency as i64,
            _ => r.q4_factuality as i64,
        }
    };
    let mut table = Vec::new();
    for (q, name) in QUESTIONS.iter().enumerate().take(4) {
        let input = AgreementInput::new(
            humans.iter().map(|r| likert_of(r, q)).collect(),
            models.iter().map(|r| likert_of(r, q)).collect(),
            vec![1, 2, 3, 4, 5],
        );
        table.push((name.to_string(), binned_jsd::<Scalar>(&input)?));
    }
    let label_bins = vec![0i64, 1, 2];
    let input = AgreementInput::new(
        humans.iter().map(|r| r.q5_label.index() as i64).collect(),
        models.iter().map(|r| r.q5_label.index() as i64).collect(),
        label_bins,
    );
    table.push((QUESTIONS[4].to_string(), binned_jsd::<Scalar>(&input)?));
    Ok(table)
}

pub fn agreement(ctx: &RunContext, ratings_file: Option<&Path>) -> anyhow::Result<i32> {
    let ratings: Vec<RatingRecord> = match ratings_file {
        Some(path) => {
            let (records, rejects) = Store::read_jsonl::<RatingRecord>(path)?;
            anyhow::ensure!(rejects.is_empty(), "ratings file has malformed lines");
            records
        }
        None => {
            let (records, _) = Store::read_jsonl::<RatingRecord>(&ratings_path(&ctx.store))?;
            records
        }
    };
    anyhow::ensure!(!ratings.is_empty(), "no ratings; run `annotate import` first");
    let table = agreement_table(&ratings)?;
    let rows: Vec<Vec<String>> =
        table.iter().map(|(q, v)| vec![q.clone(), fmt_f(*v, 3)]).collect();
    data::write_csv(&metric_path(&ctx.store, "agreement"), &["question", "jsd"], &rows)?;
    ctx.write_call_ledger("evaluate-jsd")?;
    for (question, value) in &table {
        println!("{question}: {}", fmt_f(*value, 3));
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use claimdrift_core::ConsolidatedLabel;

    fn rating(kind: RaterKind, q3: u8, q5: ConsolidatedLabel) -> RatingRecord {
        RatingRecord {
            node_id: "n".into(),
            rater_id: "r".into(),
            rater_kind: kind,
            q1_role_consistency: 4,
            q2_relevance: 4,
            q3_fluency: q3,
            q4_factuality: 3,
            q5_label: q5,
        }
    }

    #[test]
    fn copied_ratings_agree_perfectly() {
        let mut ratings = Vec::new();
        for q3 in [2u8, 3, 5] {
            ratings.push(rating(RaterKind::Human, q3, ConsolidatedLabel::HalfTrue));
            ratings.push(rating(RaterKind::Model, q3, ConsolidatedLabel::HalfTrue));
        }
        let table = agreement_table(&ratings).unwrap();
        for (_, value) in table {
            assert!(value.abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_fluency_hits_the_bound() {
        let mut ratings = Vec::new();
        for _ in 0..4 {
            ratings.push(rating(RaterKind::Human, 1, ConsolidatedLabel::True));
            ratings.push(rating(RaterKind::Model, 5, ConsolidatedLabel::True));
        }
        let table = agreement_table(&ratings).unwrap();
        let q3 = table.iter().find(|(q, _)| q.contains("Q3")).unwrap().1;
        assert!((q3 - (2.0f64.ln()).sqrt()).abs() < 1e-12);
        let q5 = table.iter().find(|(q, _)| q.contains("Q5")).unwrap().1;
        assert!(q5.abs() < 1e-12);
    }

    #[test]
    fn missing_rater_kind_is_an_error() {
        let ratings = vec![rating(RaterKind::Human, 3, ConsolidatedLabel::True)];
        assert!(agreement_table(&ratings).is_err());
    }

    #[test]
    fn rating_rows_validate_likert_range() {
        let mut record = csv::StringRecord::new();
        for field in ["n1", "alice", "human", "5", "4", "6", "2", "Half-True"] {
            record.push_field(field);
        }
        let err = parse_rating_row(&record).unwrap_err();
        assert!(err.contains("q3"), "{err}");

        let mut ok = csv::StringRecord::new();
        for field in ["n1", "alice", "human", "5", "4", "5", "2", "Half-True"] {
            ok.push_field(field);
        }
        let record = parse_rating_row(&ok).unwrap();
        assert_eq!(record.q5_label, ConsolidatedLabel::HalfTrue);
        assert!(record.likert_in_range());
    }
}

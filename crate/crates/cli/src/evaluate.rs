//! `evaluate` subcommands: each computes one metric family over the claim
//! store and writes a CSV under `metrics/`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use claimdrift_analysis::{
    classify_llm, feasibility_rate, hdbscan, judge, morality_summary, project_2d,
    robustness_report, sentiment_counts, ClaimGroup, ClusterAssignment, GroupKey,
    HttpJudgeAdapter, JudgeAdapter, JudgeKind, JudgeVerdict, LlmJudgeAdapter, PredictionRow,
    PromptStrategy,
};
use claimdrift_core::{ClaimNode, ConsolidatedLabel, Store};
use claimdrift_gateway::{bounded_map, EmbedRequest, ScoreRequest};
use claimdrift_metrics::{
    drift_summary, fkgl, perplexity, quartiles, Embedding, QuartileSummary, Scalar,
};

use crate::commands::{evaluable_claims, metric_path, EXIT_PARTIAL};
use crate::context::RunContext;
use crate::data::{self, fmt_f, round_display};

fn grouped_values(
    nodes: &[ClaimNode],
    registry: &claimdrift_core::PersonaRegistry,
    value_of: impl Fn(&ClaimNode) -> Option<Scalar>,
) -> (BTreeMap<GroupKey, Vec<Scalar>>, usize) {
    let mut grouped: BTreeMap<GroupKey, Vec<Scalar>> = BTreeMap::new();
    let mut skipped = 0usize;
    for node in nodes {
        match value_of(node) {
            Some(value) => {
                grouped.entry(data::group_of(node, registry)).or_default().push(value)
            }
            None => skipped += 1,
        }
    }
    (grouped, skipped)
}

fn write_quartile_csv(
    path: &Path,
    grouped: &BTreeMap<GroupKey, Vec<Scalar>>,
) -> anyhow::Result<()> {
    let mut rows = Vec::new();
    for (group, values) in grouped {
        let summary: QuartileSummary<Scalar> = quartiles(values)?;
        rows.push(vec![
            group.role.clone(),
            round_display(group),
            summary.n.to_string(),
            fmt_f(summary.median, 3),
            fmt_f(summary.q1, 3),
            fmt_f(summary.q3, 3),
            fmt_f(summary.iqr, 3),
        ]);
    }
    data::write_csv(path, &["persona", "round", "n", "median", "q1", "q3", "iqr"], &rows)
}

pub fn readability(ctx: &RunContext) -> anyhow::Result<i32> {
    let nodes = evaluable_claims(&ctx.store)?;
    let registry = ctx.personas()?;
    let (grouped, skipped) =
        grouped_values(&nodes, &registry, |node| fkgl::<Scalar>(&node.claim_text).ok());
    write_quartile_csv(&metric_path(&ctx.store, "readability"), &grouped)?;
    ctx.write_call_ledger("evaluate-readability")?;
    println!("readability written for {} group(s) ({skipped} unscorable)", grouped.len());
    Ok(0)
}

pub fn perplexity_cmd(ctx: &RunContext) -> anyhow::Result<i32> {
    let nodes = evaluable_claims(&ctx.store)?;
    let registry = ctx.personas()?;
    let stage = ctx.config.stage("scoring");
    let gateway = ctx.gateway("scoring")?;

    let scores = bounded_map(&nodes, stage.request_budget, |_, node| {
        let request = ScoreRequest { model_id: stage.model_id.clone(), text: node.claim_text.clone() };
        gateway
            .score_logprobs(&request)
            .ok()
            .and_then(|logprobs| perplexity::<Scalar>(&logprobs).ok())
    });
    let mut by_node: BTreeMap<&str, Scalar> = BTreeMap::new();
    for (node, score) in nodes.iter().zip(&scores) {
        if let Some(score) = score {
            by_node.insert(&node.node_id, *score);
        }
    }
    let (grouped, skipped) =
        grouped_values(&nodes, &registry, |node| by_node.get(node.node_id.as_str()).copied());
    write_quartile_csv(&metric_path(&ctx.store, "perplexity"), &grouped)?;
    ctx.update_manifest(|m| {
        m.model_ids.insert("scoring".into(), stage.model_id.clone());
    })?;
    ctx.write_call_ledger("evaluate-perplexity")?;
    println!("perplexity written for {} group(s) ({skipped} unscorable)", grouped.len());
    Ok(0)
}

/// Load persisted verdicts of one kind, run the adapter over nodes that
/// have none yet, and persist the new ones.
fn judged_verdicts(
    ctx: &RunContext,
    kind: JudgeKind,
    nodes: &[ClaimNode],
    adapter_url: Option<&str>,
) -> anyhow::Result<(Vec<JudgeVerdict>, usize)> {
    let path = ctx.store.metrics_dir().join(format!("verdicts_{}.jsonl", kind.as_str()));
    let (mut verdicts, _rejects) = Store::read_jsonl::<JudgeVerdict>(&path)?;
    let have: std::collections::BTreeSet<String> =
        verdicts.iter().map(|v| v.node_id.clone()).collect();
    let todo: Vec<(String, String)> = nodes
        .iter()
        .filter(|n| !have.contains(&n.node_id))
        .map(|n| (n.node_id.clone(), n.claim_text.clone()))
        .collect();

    let mut failures = 0usize;
    if !todo.is_empty() {
        let stage = ctx.config.stage("judging");
        let gateway = ctx.gateway("judging")?;
        let llm_adapter;
        let http_adapter;
        let adapter: &dyn JudgeAdapter = match adapter_url {
            Some(url) => {
                http_adapter = HttpJudgeAdapter { endpoint: url.to_string() };
                &http_adapter
            }
            None => {
                llm_adapter = LlmJudgeAdapter {
                    gateway: &gateway,
                    model_id: stage.model_id.clone(),
                    max_tokens: stage.max_tokens,
                };
                &llm_adapter
            }
        };
        let (fresh, parse_failures) = judge(&todo, kind, adapter)?;
        failures = parse_failures.len();
        for (node_id, reason) in &parse_failures {
            eprintln!("judge parse failure for {node_id}: {reason}");
        }
        Store::append_jsonl(&path, &fresh)?;
        verdicts.extend(fresh);
    }
    Ok((verdicts, failures))
}

pub fn sentiment(ctx: &RunContext, adapter_url: Option<&str>) -> anyhow::Result<i32> {
    let nodes = evaluable_claims(&ctx.store)?;
    let registry = ctx.personas()?;
    let (verdicts, failures) = judged_verdicts(ctx, JudgeKind::Sentiment, &nodes, adapter_url)?;
    let groups = data::groups_map(&nodes.iter().map(|n| (n.node_id.clone(), n.clone())).collect(), &registry);
    let rows_data = sentiment_counts(&verdicts, &groups);
    let rows: Vec<Vec<String>> = rows_data
        .iter()
        .map(|row| {
            vec![
                row.group.role.clone(),
                round_display(&row.group),
                row.negative.to_string(),
                row.neutral.to_string(),
                row.positive.to_string(),
            ]
        })
        .collect();
    data::write_csv(
        &metric_path(&ctx.store, "sentiment"),
        &["persona", "round", "negative", "neutral", "positive"],
        &rows,
    )?;
    ctx.write_call_ledger("evaluate-sentiment")?;
    println!("sentiment written for {} group(s) ({failures} parse failure(s))", rows.len());
    Ok(if failures == 0 { 0 } else { EXIT_PARTIAL })
}

pub fn morality(ctx: &RunContext, adapter_url: Option<&str>) -> anyhow::Result<i32> {
    let nodes = evaluable_claims(&ctx.store)?;
    let registry = ctx.personas()?;
    let (verdicts, failures) = judged_verdicts(ctx, JudgeKind::Morality, &nodes, adapter_url)?;
    let groups = data::groups_map(&nodes.iter().map(|n| (n.node_id.clone(), n.clone())).collect(), &registry);
    let rows_data = morality_summary(&verdicts, &groups);
    let rows: Vec<Vec<String>> = rows_data
        .iter()
        .map(|row| {
            vec![
                row.foundation.clone(),
                row.group.role.clone(),
                round_display(&row.group),
                row.n.to_string(),
                fmt_f(row.mean, 3),
                fmt_f(row.se, 3),
            ]
        })
        .collect();
    data::write_csv(
        &metric_path(&ctx.store, "morality"),
        &["foundation", "persona", "round", "n", "avg_score", "se"],
        &rows,
    )?;
    ctx.write_call_ledger("evaluate-morality")?;
    println!("morality written: {} row(s) ({failures} parse failure(s))", rows.len());
    Ok(if failures == 0 { 0 } else { EXIT_PARTIAL })
}

pub fn feasibility(
    ctx: &RunContext,
    adapter_url: Option<&str>,
    sample: Option<usize>,
) -> anyhow::Result<i32> {
    let mut nodes: Vec<ClaimNode> =
        evaluable_claims(&ctx.store)?.into_iter().filter(|n| n.round > 0).collect();
    anyhow::ensure!(!nodes.is_empty(), "no generated claims to judge; run `generate` first");
    if let Some(sample) = sample {
        nodes = seeded_sample(nodes, sample, ctx.seed)?;
    }
    let (verdicts, failures) = judged_verdicts(ctx, JudgeKind::Feasibility, &nodes, adapter_url)?;
    let wanted: std::collections::BTreeSet<&str> =
        nodes.iter().map(|n| n.node_id.as_str()).collect();
    let scoped: Vec<JudgeVerdict> = verdicts
        .into_iter()
        .filter(|v| wanted.contains(v.node_id.as_str()))
        .collect();
    let report = feasibility_rate(&scoped);
    data::write_csv(
        &metric_path(&ctx.store, "feasibility"),
        &["feasible", "feasible_with_web_search", "infeasible", "total", "rate_percent"],
        &[vec![
            report.feasible.to_string(),
            report.feasible_with_web_search.to_string(),
            report.infeasible.to_string(),
            report.total.to_string(),
            fmt_f(report.rate_percent, 1),
        ]],
    )?;
    ctx.write_call_ledger("evaluate-feasibility")?;
    println!(
        "feasibility: {}/{} verifiable ({}%)",
        report.feasible + report.feasible_with_web_search,
        report.total,
        fmt_f(report.rate_percent, 1)
    );
    Ok(if failures == 0 { 0 } else { EXIT_PARTIAL })
}

fn embeddings_for(
    ctx: &RunContext,
    nodes: &[ClaimNode],
) -> anyhow::Result<BTreeMap<String, Embedding>> {
    let stage = ctx.config.stage("embedding");
    let gateway = ctx.gateway("embedding")?;
    // One batched request per chunk; the cache makes reruns free.
    let mut embeddings = BTreeMap::new();
    for chunk in nodes.chunks(64) {
        let request = EmbedRequest {
            model_id: stage.model_id.clone(),
            texts: chunk.iter().map(|n| n.claim_text.clone()).collect(),
        };
        let vectors = gateway.embed(&request)?;
        for (node, vector) in chunk.iter().zip(vectors) {
            embeddings.insert(node.node_id.clone(), vector);
        }
    }
    Ok(embeddings)
}

pub fn cluster(ctx: &RunContext, min_cluster_size: usize) -> anyhow::Result<i32> {
    let nodes = evaluable_claims(&ctx.store)?;
    let embeddings = embeddings_for(ctx, &nodes)?;
    let points: Vec<Embedding> =
        nodes.iter().map(|n| embeddings[&n.node_id].clone()).collect();
    // Clustering runs on full-dimension embeddings; the 2-D projection is
    // for plotting only.
    let labels = hdbscan(&points, min_cluster_size)?;
    let projected = project_2d(&points)?;
    let assignments: Vec<ClusterAssignment> = nodes
        .iter()
        .zip(labels.iter().zip(&projected))
        .map(|(node, (&cluster, &(x, y)))| ClusterAssignment {
            node_id: node.node_id.clone(),
            cluster,
            x,
            y,
        })
        .collect();
    let rows: Vec<Vec<String>> = assignments
        .iter()
        .map(|a| vec![a.node_id.clone(), a.cluster.to_string(), fmt_f(a.x, 6), fmt_f(a.y, 6)])
        .collect();
    data::write_csv(&metric_path(&ctx.store, "cluster"), &["node_id", "cluster", "x", "y"], &rows)?;
    let clusters = labels.iter().filter(|&&l| l >= 0).collect::<std::collections::BTreeSet<_>>();
    let noise = labels.iter().filter(|&&l| l < 0).count();
    ctx.write_call_ledger("evaluate-cluster")?;
    println!("clustered {} claim(s): {} cluster(s), {noise} noise", labels.len(), clusters.len());
    Ok(0)
}

pub fn drift(ctx: &RunContext) -> anyhow::Result<i32> {
    let nodes = evaluable_claims(&ctx.store)?;
    let embeddings = embeddings_for(ctx, &nodes)?;
    let rows_data = drift_summary(&nodes, &embeddings)?;
    let rows: Vec<Vec<String>> = rows_data
        .iter()
        .map(|row| {
            vec![
                row.pair.from_round.to_string(),
                row.pair.to_round.to_string(),
                row.count.to_string(),
                fmt_f(row.mean_cosine, 3),
            ]
        })
        .collect();
    data::write_csv(
        &metric_path(&ctx.store, "drift"),
        &["from_round", "to_round", "count", "avg_cosine"],
        &rows,
    )?;
    ctx.write_call_ledger("evaluate-drift")?;
    println!("drift written: {} pair(s)", rows.len());
    Ok(0)
}

pub fn classify(
    ctx: &RunContext,
    strategy_arg: &str,
    model_tag: Option<&str>,
) -> anyhow::Result<i32> {
    let strategy = PromptStrategy::parse(strategy_arg).ok_or_else(|| {
        anyhow::anyhow!("--strategy must be zero-shot, zero-shot-cot, few-shot, or few-shot-cot")
    })?;
    let nodes = evaluable_claims(&ctx.store)?;
    let curated = data::load_curated(&ctx.store)?;
    let stage = ctx.config.stage("classification");
    let gateway = ctx.gateway("classification")?;
    let model_tag = model_tag.unwrap_or(&stage.model_id).to_string();

    let path = ctx
        .store
        .metrics_dir()
        .join(format!("predictions_{}_{}.csv", sanitize(&model_tag), strategy.tag()));
    let mut existing: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    let mut rows: Vec<Vec<String>> = Vec::new();
    if path.exists() {
        let (_, old_rows) = data::read_csv(&path)?;
        for row in old_rows {
            if let Some(id) = row.first() {
                existing.insert(id.clone());
            }
            rows.push(row);
        }
    }

    let todo: Vec<&ClaimNode> = nodes
        .iter()
        .filter(|n| !existing.contains(&n.node_id))
        .filter(|n| {
            curated
                .get(&n.article_id)
                .map(|c| !c.fact_checking_evidence.is_empty())
                .unwrap_or(false)
        })
        .collect();
    let mut abstentions = 0usize;
    let outcomes = bounded_map(&todo, stage.request_budget, |_, node| {
        let evidence = &curated[&node.article_id].fact_checking_evidence;
        classify_llm(&gateway, &stage.model_id, stage.max_tokens, strategy, &node.claim_text, evidence)
    });
    for (node, outcome) in todo.iter().zip(outcomes) {
        let outcome = outcome?;
        if outcome.label.is_none() {
            abstentions += 1;
        }
        rows.push(vec![
            node.node_id.clone(),
            data::label_to_csv(outcome.label).to_string(),
            model_tag.clone(),
            strategy.tag().to_string(),
        ]);
    }
    rows.sort();
    data::write_csv(&path, &["node_id", "label", "model_tag", "strategy_tag"], &rows)?;
    ctx.update_manifest(|m| {
        m.model_ids.insert("classification".into(), stage.model_id.clone());
        m.stage_counts.insert("predictions".into(), rows.len() as u64);
    })?;
    ctx.write_call_ledger("evaluate-classify")?;
    println!(
        "classified {} claim(s) with {} ({} abstention(s)) -> {}",
        todo.len(),
        strategy.tag(),
        abstentions,
        path.display()
    );
    Ok(0)
}

fn sanitize(tag: &str) -> String {
    tag.chars().map(|c| if c.is_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

pub fn robustness(ctx: &RunContext, prediction_files: &[PathBuf]) -> anyhow::Result<i32> {
    let nodes = evaluable_claims(&ctx.store)?;
    let mut gold: BTreeMap<String, (ClaimGroup, ConsolidatedLabel)> = BTreeMap::new();
    let mut unlabeled = 0usize;
    for node in &nodes {
        match node.assigned_label {
            Some(label) => {
                gold.insert(node.node_id.clone(), (ClaimGroup::from_round(node.round), label));
            }
            None => unlabeled += 1,
        }
    }
    if unlabeled > 0 {
        eprintln!("warning: {unlabeled} node(s) lack gold labels and are excluded");
    }

    let files: Vec<PathBuf> = if prediction_files.is_empty() {
        let mut found = Vec::new();
        for entry in std::fs::read_dir(ctx.store.metrics_dir())? {
            let path = entry?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            if name.starts_with("predictions_") && name.ends_with(".csv") {
                found.push(path);
            }
        }
        found.sort();
        found
    } else {
        prediction_files.to_vec()
    };
    anyhow::ensure!(
        !files.is_empty(),
        "no prediction files; run `evaluate classify` or pass --predictions"
    );

    let mut predictions = Vec::new();
    for file in &files {
        let (_, rows) = data::read_csv(file)?;
        for row in rows {
            anyhow::ensure!(row.len() >= 4, "malformed prediction row in {}", file.display());
            let label = data::label_from_csv(&row[1])?;
            if !gold.contains_key(&row[0]) {
                // Predictions for unlabeled nodes cannot be scored.
                continue;
            }
            predictions.push(PredictionRow {
                node_id: row[0].clone(),
                label,
                model_tag: row[2].clone(),
                strategy_tag: row[3].clone(),
            });
        }
    }
    let report = robustness_report(&gold, &predictions)?;

    let mut rows = Vec::new();
    for cell in &report.cells {
        rows.push(vec![
            cell.model_tag.clone(),
            cell.group.display_name().to_string(),
            cell.n.to_string(),
            cell.abstentions.to_string(),
            fmt_f(cell.scores.precision, 3),
            fmt_f(cell.scores.recall, 3),
            fmt_f(cell.scores.f1, 3),
            fmt_f(cell.scores.precision * 100.0, 1),
            fmt_f(cell.scores.recall * 100.0, 1),
            fmt_f(cell.scores.f1 * 100.0, 1),
        ]);
    }
    data::write_csv(
        &metric_path(&ctx.store, "robustness"),
        &["model_tag", "group", "n", "abstentions", "precision", "recall", "f1", "p_pct", "r_pct", "f1_pct"],
        &rows,
    )?;

    let degradation_rows: Vec<Vec<String>> = report
        .degradation
        .iter()
        .map(|d| {
            vec![
                d.model_tag.clone(),
                fmt_f(d.original_f1, 3),
                fmt_f(d.min_round_f1, 3),
                fmt_f(d.drop_points, 1),
                fmt_f(d.drop_percent, 1),
            ]
        })
        .collect();
    data::write_csv(
        &metric_path(&ctx.store, "degradation"),
        &["model_tag", "original_f1", "min_round_f1", "drop_points", "drop_percent"],
        &degradation_rows,
    )?;
    for (model, group) in &report.missing_groups {
        eprintln!("warning: {model} has no predictions for {}", group.display_name());
    }
    ctx.write_call_ledger("evaluate-robustness")?;
    println!("robustness written: {} cell(s), {} model(s)", report.cells.len(), report.degradation.len());
    Ok(0)
}

pub fn jsd(ctx: &RunContext, ratings_file: Option<&Path>) -> anyhow::Result<i32> {
    crate::annotate::agreement(ctx, ratings_file)
}

/// Deterministic sample without replacement.
pub fn seeded_sample<T>(mut items: Vec<T>, sample: usize, seed: u64) -> anyhow::Result<Vec<T>> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    anyhow::ensure!(
        sample <= items.len(),
        "sample size {sample} exceeds population {}",
        items.len()
    );
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    items.shuffle(&mut rng);
    items.truncate(sample);
    Ok(items)
}

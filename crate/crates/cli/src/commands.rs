//! Curation, persona, generation, and labeling commands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use claimdrift_core::{ClaimNode, Store};
use claimdrift_gateway::bounded_map;
use claimdrift_pipeline::{
    balance_and_split, extract_sources_and_evidence, import_qa_review, ingest_articles,
    plan_chains, round_counts, AblationFlags, CurationContext, GenerationContext, LabelContext,
    SplitSpec,
};

use crate::context::RunContext;
use crate::data;

/// Exit code meaning "finished but some records failed".
pub const EXIT_PARTIAL: i32 = 2;

pub fn curate_ingest(ctx: &RunContext, input: &Path) -> anyhow::Result<i32> {
    let report = ingest_articles(input)?;
    if ctx.dry_run {
        println!(
            "[dry-run] would ingest {} article(s), {} reject(s)",
            report.articles.len(),
            report.rejects.len()
        );
        return Ok(0);
    }
    let existing = data::load_articles(&ctx.store)?;
    let fresh: Vec<_> = report
        .articles
        .iter()
        .filter(|a| !existing.contains_key(&a.article_id))
        .cloned()
        .collect();
    Store::append_jsonl(&ctx.store.articles_path(), &fresh)?;
    for (line, reason) in &report.rejects {
        eprintln!("reject line {line}: {reason}");
    }
    let total = existing.len() + fresh.len();
    ctx.update_manifest(|m| {
        m.stage_counts.insert("articles".into(), total as u64);
    })?;
    ctx.write_call_ledger("curate-ingest")?;
    println!(
        "ingested {} new article(s) ({} already stored, {} rejected)",
        fresh.len(),
        existing.len(),
        report.rejects.len()
    );
    Ok(if report.rejects.is_empty() { 0 } else { EXIT_PARTIAL })
}

pub fn curate_extract(ctx: &RunContext) -> anyhow::Result<i32> {
    let articles = data::load_articles(&ctx.store)?;
    anyhow::ensure!(!articles.is_empty(), "no articles in store; run `curate ingest` first");
    let curated = data::load_curated(&ctx.store)?;
    let todo: Vec<_> = articles
        .values()
        .filter(|a| !curated.contains_key(&a.article_id))
        .cloned()
        .collect();
    if ctx.dry_run {
        println!("[dry-run] would extract {} article(s), {} already curated", todo.len(), curated.len());
        return Ok(0);
    }

    let stage = ctx.config.stage("extraction");
    let gateway = ctx.gateway("extraction")?;
    let curation_ctx = CurationContext {
        gateway: &gateway,
        model_id: &stage.model_id,
        temperature: stage.temperature,
        max_tokens: stage.max_tokens,
        retries: 2,
        base_seed: ctx.seed,
    };
    let outcomes = bounded_map(&todo, stage.request_budget, |_, article| {
        extract_sources_and_evidence(&curation_ctx, article)
    });

    let mut records = Vec::new();
    let mut parse_failures = 0usize;
    for outcome in outcomes {
        let outcome = outcome?;
        for warning in &outcome.dedup_warnings {
            eprintln!(
                "{}: duplicate sentence removed from sources: {warning:?}",
                outcome.record.article_id
            );
        }
        if outcome.parse_failed {
            parse_failures += 1;
        }
        records.push(outcome.record);
    }
    Store::append_jsonl(&ctx.store.curated_path(), &records)?;
    ctx.update_manifest(|m| {
        m.model_ids.insert("extraction".into(), stage.model_id.clone());
        m.stage_counts.insert("curated".into(), (curated.len() + records.len()) as u64);
    })?;
    ctx.write_call_ledger("curate-extract")?;
    println!(
        "extracted {} record(s) ({} skipped, {} parse failure(s))",
        records.len(),
        curated.len(),
        parse_failures
    );
    Ok(if parse_failures == 0 { 0 } else { EXIT_PARTIAL })
}

pub fn curate_qa_import(ctx: &RunContext, input: &Path) -> anyhow::Result<i32> {
    let curated = data::load_curated(&ctx.store)?;
    anyhow::ensure!(!curated.is_empty(), "no curated records; run `curate extract` first");
    let mut records: Vec<_> = curated.values().cloned().collect();
    let report = import_qa_review(input, &mut records)?;
    if ctx.dry_run {
        println!("[dry-run] would update {} record(s)", report.updated);
        return Ok(0);
    }
    let map: BTreeMap<String, _> =
        records.into_iter().map(|r| (r.article_id.clone(), r)).collect();
    data::save_curated(&ctx.store, &map)?;
    println!("qa review: {} record(s) updated", report.updated);
    for (category, count) in &report.counts {
        let ratio = report.ratios()[category];
        println!("  {:<22} {:>4}  {:>5.1}%", category.display_name(), count, ratio);
    }
    for unknown in &report.unknown_ids {
        eprintln!("unknown article id: {unknown}");
    }
    ctx.write_call_ledger("curate-qa-import")?;
    Ok(if report.unknown_ids.is_empty() { 0 } else { EXIT_PARTIAL })
}

pub fn curate_split(
    ctx: &RunContext,
    seed: Option<u64>,
    per_class_cap: Option<usize>,
) -> anyhow::Result<i32> {
    let articles = data::load_articles(&ctx.store)?;
    anyhow::ensure!(!articles.is_empty(), "no articles in store; run `curate ingest` first");
    let records: Vec<_> = articles
        .values()
        .map(|a| (a.article_id.clone(), claimdrift_core::consolidate_label(a.raw_label)))
        .collect();
    let mut spec = SplitSpec::new(seed.unwrap_or(ctx.seed));
    spec.per_class_cap = per_class_cap;
    let split = balance_and_split(&records, &spec)?;
    if ctx.dry_run {
        let (train, dev, test) = split.totals();
        println!("[dry-run] split totals: train {train}, dev {dev}, test {test}");
        return Ok(0);
    }
    data::save_split(&ctx.store, &split)?;
    let (train, dev, test) = split.totals();
    println!("split written: train {train}, dev {dev}, test {test} (seed {})", spec.seed);
    ctx.update_manifest(|m| {
        m.stage_counts.insert("split_train".into(), train as u64);
        m.stage_counts.insert("split_dev".into(), dev as u64);
        m.stage_counts.insert("split_test".into(), test as u64);
    })?;
    ctx.write_call_ledger("curate-split")?;
    Ok(0)
}

pub fn personas_list(ctx: &RunContext) -> anyhow::Result<i32> {
    let registry = ctx.personas()?;
    for persona in &registry.personas {
        println!("{} ({})", persona.role_name, persona.persona_id);
        for bullet in &persona.description_bullets {
            println!("  - {bullet}");
        }
    }
    Ok(0)
}

pub fn personas_validate(ctx: &RunContext) -> anyhow::Result<i32> {
    let registry = ctx.personas()?;
    let problems = registry.validate(false);
    if problems.is_empty() {
        println!("{} persona(s): ok", registry.len());
        return Ok(0);
    }
    for problem in &problems {
        eprintln!("invalid: {problem}");
    }
    anyhow::bail!("persona registry has {} problem(s)", problems.len())
}

pub fn generate(ctx: &RunContext, rounds_arg: &str, ablation_arg: &str) -> anyhow::Result<i32> {
    let rounds: Vec<u8> = match rounds_arg {
        "all" => vec![1, 2, 3],
        other => {
            let round: u8 = other.parse().map_err(|_| {
                anyhow::anyhow!("--round must be all, 1, 2, or 3 (got {other:?})")
            })?;
            anyhow::ensure!((1..=3).contains(&round), "--round must be all, 1, 2, or 3");
            vec![round]
        }
    };
    let ablation = AblationFlags::parse(ablation_arg)
        .ok_or_else(|| anyhow::anyhow!("--ablation must be none, no-roles, or no-sources"))?;

    let articles = data::load_articles(&ctx.store)?;
    let curated = data::load_curated(&ctx.store)?;
    anyhow::ensure!(!curated.is_empty(), "no curated records; run `curate extract` first");
    let registry = ctx.personas()?;
    let targets = data::generation_targets(&ctx.store, &curated)?;
    let plans = plan_chains(&targets, &registry)?;
    let counts = round_counts(&plans);

    if ctx.dry_run {
        println!(
            "[dry-run] {} article(s): round 1 {}, round 2 {}, round 3 {} ({} total)",
            targets.len(),
            counts[0],
            counts[1],
            counts[2],
            counts.iter().sum::<usize>()
        );
        return Ok(0);
    }

    let stage = ctx.config.stage("generation");
    let gateway = ctx.gateway("generation")?;
    let generation_ctx = GenerationContext {
        gateway: &gateway,
        model_id: &stage.model_id,
        temperature: stage.temperature,
        max_tokens: stage.max_tokens,
        seed: Some(ctx.seed),
        format_retries: 2,
        ablation,
        workers: stage.request_budget,
    };
    let summary = claimdrift_pipeline::run_generation(
        &generation_ctx,
        &ctx.store,
        &plans,
        &articles,
        &curated,
        &registry,
        &rounds,
    )?;

    let claims = ctx.store.load_claims()?;
    ctx.update_manifest(|m| {
        m.model_ids.insert("generation".into(), stage.model_id.clone());
        for round in 0u8..=3 {
            let count = claims.values().filter(|n| n.round == round).count() as u64;
            m.stage_counts.insert(format!("claims_round_{round}"), count);
        }
    })?;
    ctx.write_call_ledger("generate")?;
    println!(
        "generated {} node(s), skipped {}, {} failure(s)",
        summary.generated,
        summary.skipped,
        summary.failures.len()
    );
    for failure in &summary.failures {
        eprintln!("failed {} (round {}): {:?}", failure.node_id, failure.round, failure.reason);
    }
    Ok(if summary.failures.is_empty() { 0 } else { EXIT_PARTIAL })
}

pub fn label(ctx: &RunContext) -> anyhow::Result<i32> {
    let curated = data::load_curated(&ctx.store)?;
    let evidence: BTreeMap<String, Vec<String>> = curated
        .iter()
        .map(|(id, record)| (id.clone(), record.fact_checking_evidence.clone()))
        .collect();
    if ctx.dry_run {
        let claims = ctx.store.load_claims()?;
        let todo =
            claims.values().filter(|n| n.round > 0 && n.assigned_label.is_none()).count();
        println!("[dry-run] would label {todo} node(s)");
        return Ok(0);
    }
    let stage = ctx.config.stage("labeling");
    let gateway = ctx.gateway("labeling")?;
    let label_ctx = LabelContext {
        gateway: &gateway,
        model_id: &stage.model_id,
        temperature: stage.temperature,
        max_tokens: stage.max_tokens,
        format_retries: 2,
        workers: stage.request_budget,
    };
    let (summary, warnings) = claimdrift_pipeline::run_labeling(&label_ctx, &ctx.store, &evidence)?;
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }
    let claims = ctx.store.load_claims()?;
    ctx.update_manifest(|m| {
        m.model_ids.insert("labeling".into(), stage.model_id.clone());
        let labeled =
            claims.values().filter(|n| n.round > 0 && n.assigned_label.is_some()).count();
        m.stage_counts.insert("labeled".into(), labeled as u64);
    })?;
    ctx.write_call_ledger("label")?;
    println!(
        "labeled {} node(s), skipped {}, {} failure(s)",
        summary.generated,
        summary.skipped,
        summary.failures.len()
    );
    Ok(if summary.failures.is_empty() { 0 } else { EXIT_PARTIAL })
}

/// Claims that carry text to evaluate, sorted by id for stable outputs.
pub fn evaluable_claims(store: &Store) -> anyhow::Result<Vec<ClaimNode>> {
    let claims = store.load_claims()?;
    anyhow::ensure!(!claims.is_empty(), "no claims in store; run `generate` first");
    Ok(claims.into_values().collect())
}

/// Default output path for a metric CSV.
pub fn metric_path(store: &Store, name: &str) -> PathBuf {
    store.metrics_dir().join(format!("{name}.csv"))
}

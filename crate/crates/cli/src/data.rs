//! Shared store loaders and CSV conventions used across commands.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use claimdrift_analysis::GroupKey;
use claimdrift_core::{
    ArticleRecord, ClaimNode, ConsolidatedLabel, CuratedRecord, PersonaRegistry, Store,
};
use claimdrift_pipeline::CorpusSplit;

pub fn load_articles(store: &Store) -> anyhow::Result<BTreeMap<String, ArticleRecord>> {
    let (articles, _rejects) = Store::read_jsonl::<ArticleRecord>(&store.articles_path())?;
    Ok(articles.into_iter().map(|a| (a.article_id.clone(), a)).collect())
}

pub fn load_curated(store: &Store) -> anyhow::Result<BTreeMap<String, CuratedRecord>> {
    let (records, _rejects) = Store::read_jsonl::<CuratedRecord>(&store.curated_path())?;
    // Later rows win so QA imports can append updated records.
    Ok(records.into_iter().map(|r| (r.article_id.clone(), r)).collect())
}

pub fn save_curated(store: &Store, records: &BTreeMap<String, CuratedRecord>) -> anyhow::Result<()> {
    let rows: Vec<&CuratedRecord> = records.values().collect();
    let path = store.curated_path();
    let mut buf = String::new();
    for row in rows {
        buf.push_str(&serde_json::to_string(row)?);
        buf.push('\n');
    }
    std::fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))
}

pub fn load_split(store: &Store) -> anyhow::Result<Option<CorpusSplit>> {
    let path = store.split_path();
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path)?;
    Ok(Some(serde_json::from_str(&text)?))
}

pub fn save_split(store: &Store, split: &CorpusSplit) -> anyhow::Result<()> {
    let path = store.split_path();
    std::fs::write(&path, serde_json::to_string_pretty(split)?)
        .with_context(|| format!("writing {}", path.display()))
}

/// The article ids generation runs over: the test split when one exists,
/// otherwise every curated article.
pub fn generation_targets(
    store: &Store,
    curated: &BTreeMap<String, CuratedRecord>,
) -> anyhow::Result<Vec<String>> {
    if let Some(split) = load_split(store)? {
        return Ok(split.test);
    }
    Ok(curated.keys().cloned().collect())
}

/// Report grouping for a node: round 0 is the Original row, generated
/// rounds group by persona role name.
pub fn group_of(node: &ClaimNode, registry: &PersonaRegistry) -> GroupKey {
    if node.round == 0 {
        return GroupKey { round: 0, role: "Original".to_string() };
    }
    let role = node
        .persona_id
        .as_deref()
        .and_then(|pid| registry.get(pid))
        .map(|p| p.role_name.clone())
        .unwrap_or_else(|| "Unknown".to_string());
    GroupKey { round: node.round, role }
}

pub fn groups_map(
    nodes: &BTreeMap<String, ClaimNode>,
    registry: &PersonaRegistry,
) -> BTreeMap<String, GroupKey> {
    nodes.iter().map(|(id, node)| (id.clone(), group_of(node, registry))).collect()
}

/// Round column text: "-" for the Original row.
pub fn round_display(group: &GroupKey) -> String {
    if group.round == 0 { "-".to_string() } else { group.round.to_string() }
}

/// Label text used in CSV exchange files.
pub fn label_to_csv(label: Option<ConsolidatedLabel>) -> &'static str {
    match label {
        Some(ConsolidatedLabel::True) => "True",
        Some(ConsolidatedLabel::HalfTrue) => "Half True",
        Some(ConsolidatedLabel::False) => "False",
        None => "abstain",
    }
}

pub fn label_from_csv(text: &str) -> anyhow::Result<Option<ConsolidatedLabel>> {
    if text.trim().eq_ignore_ascii_case("abstain") {
        return Ok(None);
    }
    Ok(Some(text.parse::<ConsolidatedLabel>().map_err(|e| anyhow::anyhow!("{e}"))?))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a CSV (with header) into rows of strings.
pub fn read_csv(path: &Path) -> anyhow::Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let header = reader.headers()?.iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(record.iter().map(|s| s.to_string()).collect());
    }
    Ok((header, rows))
}

pub fn fmt_f(value: f64, decimals: usize) -> String {
    format!("{value:.decimals$}")
}

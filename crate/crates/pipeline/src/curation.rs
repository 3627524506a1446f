//! Stage 1: turn raw articles into curated, evidence-annotated records.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use claimdrift_core::{consolidate_label, ArticleRecord, CuratedRecord, QaCategory};
use claimdrift_gateway::{extract_last_json_object, ChatRequest, Gateway, Message};

use crate::error::PipelineError;
use crate::prompts::extraction_prompt;

#[derive(Debug)]
pub struct IngestReport {
    pub articles: Vec<ArticleRecord>,
    /// (1-based line number, reason)
    pub rejects: Vec<(usize, String)>,
}

/// Read a one-JSON-object-per-line article file. Malformed lines are
/// collected, not fatal; zero valid records is.
pub fn ingest_articles(path: &Path) -> Result<IngestReport, PipelineError> {
    let file = File::open(path).map_err(|e| PipelineError::io(path.display().to_string(), e))?;
    let mut articles: Vec<ArticleRecord> = Vec::new();
    let mut rejects = Vec::new();
    let mut seen_ids = std::collections::BTreeSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| PipelineError::io(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ArticleRecord>(&line) {
            Ok(article) => {
                if article.claim_text.trim().is_empty() {
                    rejects.push((line_no, "empty claim_text".to_string()));
                } else if !seen_ids.insert(article.article_id.clone()) {
                    rejects.push((line_no, format!("duplicate article_id {:?}", article.article_id)));
                } else {
                    articles.push(article);
                }
            }
            Err(err) => rejects.push((line_no, err.to_string())),
        }
    }
    if articles.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }
    Ok(IngestReport { articles, rejects })
}

pub struct CurationContext<'a> {
    pub gateway: &'a Gateway,
    pub model_id: &'a str,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Extra attempts after the first when the reply does not parse.
    pub retries: u32,
    pub base_seed: u64,
}

#[derive(Debug)]
pub struct ExtractionOutcome {
    pub record: CuratedRecord,
    /// Sentences dropped from the sources side because they also appeared
    /// as evidence.
    pub dedup_warnings: Vec<String>,
    /// True when every attempt failed to parse and the record fell back
    /// to an empty PoorExtraction one.
    pub parse_failed: bool,
}

/// Ask the extraction model for misinformation sources and fact-checking
/// evidence. Parse failures burn through the retry budget (each retry
/// reseeds so a sampling backend can answer differently) and then fall
/// back to an empty record marked PoorExtraction. Refusals propagate.
pub fn extract_sources_and_evidence(
    ctx: &CurationContext<'_>,
    article: &ArticleRecord,
) -> Result<ExtractionOutcome, PipelineError> {
    let prompt = extraction_prompt(article);
    let mut attempt = 0u32;
    loop {
        let request = ChatRequest {
            model_id: ctx.model_id.to_string(),
            messages: vec![Message::user(prompt.clone())],
            temperature: ctx.temperature,
            max_tokens: ctx.max_tokens,
            seed: Some(ctx.base_seed.wrapping_add(attempt as u64)),
        };
        // Refusals and transport failures both surface to the caller;
        // only parse trouble is retried here.
        let reply = ctx.gateway.chat(&request)?;
        if let Some(parsed) = parse_extraction_reply(&reply) {
            let (sources, evidence, transition) = parsed;
            let (sources, dedup_warnings) = drop_shared_sentences(sources, &evidence);
            let record = CuratedRecord {
                article_id: article.article_id.clone(),
                misinformation_sources: sources,
                fact_checking_evidence: evidence,
                transition_sentence: transition,
                qa_category: QaCategory::Unreviewed,
                consolidated_label: consolidate_label(article.raw_label),
            };
            debug_assert!(record.lists_disjoint());
            return Ok(ExtractionOutcome { record, dedup_warnings, parse_failed: false });
        }
        if attempt >= ctx.retries {
            let record = CuratedRecord {
                article_id: article.article_id.clone(),
                misinformation_sources: Vec::new(),
                fact_checking_evidence: Vec::new(),
                transition_sentence: None,
                qa_category: QaCategory::PoorExtraction,
                consolidated_label: consolidate_label(article.raw_label),
            };
            return Ok(ExtractionOutcome { record, dedup_warnings: Vec::new(), parse_failed: true });
        }
        attempt += 1;
    }
}

type ParsedExtraction = (Vec<String>, Vec<String>, Option<String>);

fn parse_extraction_reply(reply: &str) -> Option<ParsedExtraction> {
    let value = extract_last_json_object(reply)?;
    let string_list = |key: &str| -> Option<Vec<String>> {
        value.get(key)?.as_array().map(|items| {
            items.iter().filter_map(|v| v.as_str().map(|s| s.to_string())).collect()
        })
    };
    let sources = string_list("Misinformation Sources")?;
    let evidence = string_list("Fact-Checking Evidence")?;
    let transition = value
        .get("Transition Sentence")
        .and_then(|v| v.as_str())
        .map(|s| s.to_string())
        .filter(|s| !s.trim().is_empty());
    Some((sources, evidence, transition))
}

fn drop_shared_sentences(sources: Vec<String>, evidence: &[String]) -> (Vec<String>, Vec<String>) {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for sentence in sources {
        if evidence.contains(&sentence) {
            dropped.push(sentence);
        } else {
            kept.push(sentence);
        }
    }
    (kept, dropped)
}

#[derive(Debug, Default)]
pub struct QaImportReport {
    pub updated: usize,
    pub unknown_ids: Vec<String>,
    /// Category counts over the imported review rows.
    pub counts: BTreeMap<QaCategory, usize>,
}

impl QaImportReport {
    /// Percentage share per category, for the summary table.
    pub fn ratios(&self) -> BTreeMap<QaCategory, f64> {
        let total: usize = self.counts.values().sum();
        self.counts
            .iter()
            .map(|(&cat, &n)| (cat, if total == 0 { 0.0 } else { 100.0 * n as f64 / total as f64 }))
            .collect()
    }
}

/// Apply a human-review CSV of (article_id, qa_category) rows to the
/// curated records. Unknown ids are reported, never applied.
pub fn import_qa_review(
    path: &Path,
    records: &mut [CuratedRecord],
) -> Result<QaImportReport, PipelineError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut report = QaImportReport::default();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for (i, record) in records.iter().enumerate() {
        index.insert(record.article_id.clone(), i);
    }
    for row in reader.records() {
        let row = row?;
        let article_id = row.get(0).unwrap_or_default().trim().to_string();
        let category_text = row.get(1).unwrap_or_default().trim();
        let Some(category) = QaCategory::parse(category_text) else {
            report.unknown_ids.push(format!("{article_id} (bad category {category_text:?})"));
            continue;
        };
        match index.get(&article_id) {
            Some(&i) => {
                records[i].qa_category = category;
                report.updated += 1;
                *report.counts.entry(category).or_default() += 1;
            }
            None => report.unknown_ids.push(article_id),
        }
    }
    Ok(report)
}

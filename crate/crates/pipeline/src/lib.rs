//! The pipeline proper: corpus curation (ingest, source/evidence
//! extraction, QA import, balanced splitting), persona-chain planning,
//! the five-step claim-generation protocol, and the three-step labeling
//! protocol.

mod chains;
mod curation;
mod error;
mod generate;
mod label;
mod prompts;
mod split;

pub use chains::{plan_chains, planned_nodes, round_counts, ChainPlan, PlannedNode};
pub use curation::{
    extract_sources_and_evidence, import_qa_review, ingest_articles, CurationContext,
    ExtractionOutcome, IngestReport, QaImportReport,
};
pub use error::PipelineError;
pub use generate::{
    generate_node, run_generation, AblationFlags, FailureReason, GenerationContext,
    GenerationOutcome, GenerationStepLog, NodeFailure, RunSummary, StepKind,
};
pub use label::{label_node, run_labeling, LabelContext, LabelOutcome};
pub use prompts::{
    bullet_lines, claim_prompt, evidence_analysis_prompt, explanation_prompt, extraction_prompt,
    formatting_prompt, intent_prompt, label_assignment_prompt, label_formatting_prompt,
    previous_claim_lines, reasoning_prompt,
};
pub use split::{balance_and_split, CorpusSplit, SplitSpec};

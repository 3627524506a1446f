//! Command-line surface and run orchestration.
//!
//! Exit codes: 0 success, 2 partial (some records failed but the run
//! completed), 1 fatal.

mod annotate;
mod commands;
mod config;
mod context;
mod data;
mod evaluate;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use context::RunContext;

#[derive(Parser)]
#[command(name = "claimdrift", version, about = "Simulate multi-round, persona-conditioned claim evolution and evaluate the results")]
struct Cli {
    /// Config file, TOML (or JSON by extension); defaults to an offline
    /// all-mock configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Store directory (overrides the config).
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    /// Seed for sampling decisions (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Plan and report without touching backends or the store.
    #[arg(long, global = true)]
    dry_run: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus curation: ingest, extract, QA import, split.
    Curate {
        #[command(subcommand)]
        action: CurateCmd,
    },
    /// Inspect or validate the persona registry.
    Personas {
        #[command(subcommand)]
        action: PersonasCmd,
    },
    /// Run persona-conditioned claim generation over the planned chains.
    Generate {
        /// all, 1, 2, or 3.
        #[arg(long, default_value = "all")]
        round: String,
        /// none, no-roles, or no-sources.
        #[arg(long, default_value = "none")]
        ablation: String,
    },
    /// Assign veracity labels to generated claims.
    Label,
    /// Compute metrics over the claim store.
    Evaluate {
        #[command(subcommand)]
        metric: EvaluateCmd,
    },
    /// Export annotation packets / import completed ratings.
    Annotate {
        #[command(subcommand)]
        action: AnnotateCmd,
    },
    /// Render the markdown report from the computed metrics.
    Report,
}

#[derive(Subcommand)]
enum CurateCmd {
    /// Read a JSONL article file into the store.
    Ingest {
        #[arg(long)]
        input: PathBuf,
    },
    /// Extract misinformation sources and fact-checking evidence.
    Extract,
    /// Apply a human QA review CSV (article_id, qa_category).
    QaImport {
        #[arg(long)]
        input: PathBuf,
    },
    /// Balance classes and write the train/dev/test split.
    Split {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        per_class_cap: Option<usize>,
    },
}

#[derive(Subcommand)]
enum PersonasCmd {
    List,
    Validate,
}

#[derive(Subcommand)]
enum EvaluateCmd {
    /// Flesch-Kincaid grade level quartiles per persona and round.
    Readability,
    /// Perplexity quartiles via the scoring backend.
    Perplexity,
    /// Sentiment counts via a judge adapter.
    Sentiment {
        /// HTTP judge endpoint; defaults to the model-prompted adapter.
        #[arg(long)]
        adapter_url: Option<String>,
    },
    /// Moral-foundation scores via a judge adapter.
    Morality {
        #[arg(long)]
        adapter_url: Option<String>,
    },
    /// Density-based clustering plus 2-D projection coordinates.
    Cluster {
        #[arg(long, default_value_t = 5)]
        min_cluster_size: usize,
    },
    /// Average ancestor cosine similarity per round pair.
    Drift,
    /// Human-vs-model rating agreement (binned Jensen-Shannon distance).
    Jsd {
        /// Ratings JSONL; defaults to ratings imported into the store.
        #[arg(long)]
        ratings: Option<PathBuf>,
    },
    /// Classify claims against gold evidence with a prompt strategy.
    Classify {
        /// zero-shot, zero-shot-cot, few-shot, or few-shot-cot.
        #[arg(long, default_value = "zero-shot")]
        strategy: String,
        /// Tag recorded in the predictions file; defaults to the model id.
        #[arg(long)]
        model_tag: Option<String>,
    },
    /// Macro P/R/F1 per model and claim group from prediction files.
    Robustness {
        /// Prediction CSVs; defaults to metrics/predictions_*.csv.
        #[arg(long)]
        predictions: Vec<PathBuf>,
    },
    /// Feasibility verdicts and the overall feasibility rate.
    Feasibility {
        #[arg(long)]
        adapter_url: Option<String>,
        /// Judge only a seeded sample of this size.
        #[arg(long)]
        sample: Option<usize>,
    },
}

#[derive(Subcommand)]
enum AnnotateCmd {
    /// Sample claims and write blind annotation packets.
    Export {
        #[arg(long)]
        sample: usize,
        /// Skip the paraphrase model and export raw context.
        #[arg(long)]
        no_paraphrase: bool,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Stratify the sample: round, persona, or round,persona.
        #[arg(long)]
        stratify: Option<String>,
    },
    /// Import completed ratings (CSV).
    Import {
        #[arg(long)]
        input: PathBuf,
    },
}

/// Parse arguments and run. Returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are successful exits.
            let _ = err.print();
            return if err.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<i32> {
    let (config, config_dir) = match &cli.config {
        Some(path) => {
            let config = RunConfig::load(path)?;
            let dir = path.parent().unwrap_or(std::path::Path::new(".")).to_path_buf();
            (config, dir)
        }
        None => (RunConfig::default(), PathBuf::from(".")),
    };
    let ctx = RunContext::new(config, config_dir, cli.store.as_deref(), cli.seed, cli.dry_run)?;

    match cli.command {
        Command::Curate { action } => match action {
            CurateCmd::Ingest { input } => commands::curate_ingest(&ctx, &input),
            CurateCmd::Extract => commands::curate_extract(&ctx),
            CurateCmd::QaImport { input } => commands::curate_qa_import(&ctx, &input),
            CurateCmd::Split { seed, per_class_cap } => {
                commands::curate_split(&ctx, seed, per_class_cap)
            }
        },
        Command::Personas { action } => match action {
            PersonasCmd::List => commands::personas_list(&ctx),
            PersonasCmd::Validate => commands::personas_validate(&ctx),
        },
        Command::Generate { round, ablation } => commands::generate(&ctx, &round, &ablation),
        Command::Label => commands::label(&ctx),
        Command::Evaluate { metric } => match metric {
            EvaluateCmd::Readability => evaluate::readability(&ctx),
            EvaluateCmd::Perplexity => evaluate::perplexity_cmd(&ctx),
            EvaluateCmd::Sentiment { adapter_url } => {
                evaluate::sentiment(&ctx, adapter_url.as_deref())
            }
            EvaluateCmd::Morality { adapter_url } => {
                evaluate::morality(&ctx, adapter_url.as_deref())
            }
            EvaluateCmd::Cluster { min_cluster_size } => evaluate::cluster(&ctx, min_cluster_size),
            EvaluateCmd::Drift => evaluate::drift(&ctx),
            EvaluateCmd::Jsd { ratings } => evaluate::jsd(&ctx, ratings.as_deref()),
            EvaluateCmd::Classify { strategy, model_tag } => {
                evaluate::classify(&ctx, &strategy, model_tag.as_deref())
            }
            EvaluateCmd::Robustness { predictions } => evaluate::robustness(&ctx, &predictions),
            EvaluateCmd::Feasibility { adapter_url, sample } => {
                evaluate::feasibility(&ctx, adapter_url.as_deref(), sample)
            }
        },
        Command::Annotate { action } => match action {
            AnnotateCmd::Export { sample, no_paraphrase, output, stratify } => {
                annotate::export(&ctx, sample, no_paraphrase, output.as_deref(), stratify.as_deref())
            }
            AnnotateCmd::Import { input } => annotate::import(&ctx, &input),
        },
        Command::Report => report::render(&ctx),
    }
}

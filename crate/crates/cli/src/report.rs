//! Report rendering: one markdown file assembled from the metric CSVs.
//!
//! The report is byte-stable for a given store: sections appear in a fixed
//! order, tables mirror the CSV rows, and the manifest appendix carries no
//! timestamps.

use std::fmt::Write as _;
use std::path::Path;

use crate::context::RunContext;
use crate::data;

struct Section {
    title: &'static str,
    metric: &'static str,
    command: &'static str,
    note: Option<&'static str>,
}

const SECTIONS: [Section; 8] = [
    Section {
        title: "Readability (grade level)",
        metric: "readability",
        command: "evaluate readability",
        note: None,
    },
    Section {
        title: "Perplexity",
        metric: "perplexity",
        command: "evaluate perplexity",
        note: None,
    },
    Section {
        title: "Sentiment distribution",
        metric: "sentiment",
        command: "evaluate sentiment",
        note: None,
    },
    Section {
        title: "Moral framing",
        metric: "morality",
        command: "evaluate morality",
        note: Some("Mean score and standard error per foundation, persona, and round."),
    },
    Section {
        title: "Semantic drift",
        metric: "drift",
        command: "evaluate drift",
        note: Some("Average cosine similarity between each claim and its ancestor; round 0 is the original claim."),
    },
    Section {
        title: "Rating agreement",
        metric: "agreement",
        command: "evaluate jsd",
        note: Some(
            "Binned Jensen-Shannon distance (natural log, so values live in [0, sqrt(ln 2)] ~ [0, 0.8326]) \
             between pooled human and model ratings; five Likert bins for Q1-Q4, three label bins for Q5.",
        ),
    },
    Section {
        title: "Classifier robustness",
        metric: "robustness",
        command: "evaluate robustness",
        note: Some("Macro precision / recall / F1 per model and claim group, as fractions and percentages."),
    },
    Section {
        title: "Feasibility",
        metric: "feasibility",
        command: "evaluate feasibility",
        note: None,
    },
];

pub fn render(ctx: &RunContext) -> anyhow::Result<i32> {
    let mut out = String::new();
    let mut missing = Vec::new();
    writeln!(out, "# Claim Evolution Report")?;
    writeln!(out)?;

    for section in &SECTIONS {
        writeln!(out, "## {}", section.title)?;
        writeln!(out)?;
        let path = ctx.store.metrics_dir().join(format!("{}.csv", section.metric));
        if !path.exists() {
            missing.push(section);
            writeln!(out, "*missing — run `claimdrift {}`*", section.command)?;
            writeln!(out)?;
            continue;
        }
        if let Some(note) = section.note {
            writeln!(out, "{note}")?;
            writeln!(out)?;
        }
        write_table(&mut out, &path)?;
        if section.metric == "robustness" {
            let degradation = ctx.store.metrics_dir().join("degradation.csv");
            if degradation.exists() {
                writeln!(out, "Per-model degradation (original F1 minus worst round F1):")?;
                writeln!(out)?;
                write_table(&mut out, &degradation)?;
            }
        }
    }

    writeln!(out, "## Run manifest")?;
    writeln!(out)?;
    match ctx.store.load_manifest()? {
        Some(manifest) => {
            writeln!(out, "- run id: `{}`", manifest.run_id)?;
            writeln!(out, "- config hash: `{}`", manifest.config_hash)?;
            writeln!(out, "- seed: {}", manifest.seed)?;
            writeln!(out, "- generation temperature: {}", manifest.temperature)?;
            for (stage, model) in &manifest.model_ids {
                writeln!(out, "- model ({stage}): `{model}`")?;
            }
            for (stage, count) in &manifest.stage_counts {
                writeln!(out, "- count ({stage}): {count}")?;
            }
        }
        None => writeln!(out, "*no manifest recorded yet*")?,
    }
    writeln!(out)?;

    let path = ctx.store.reports_dir().join("report.md");
    std::fs::write(&path, &out)?;
    println!("report written -> {}", path.display());
    if !missing.is_empty() {
        let names: Vec<&str> = missing.iter().map(|s| s.metric).collect();
        println!("missing metrics: {}", names.join(", "));
    }
    Ok(0)
}

fn write_table(out: &mut String, csv_path: &Path) -> anyhow::Result<()> {
    let (header, rows) = data::read_csv(csv_path)?;
    writeln!(out, "| {} |", header.join(" | "))?;
    writeln!(out, "|{}|", header.iter().map(|_| " --- ").collect::<Vec<_>>().join("|"))?;
    for row in rows {
        writeln!(out, "| {} |", row.join(" | "))?;
    }
    writeln!(out)?;
    Ok(())
}

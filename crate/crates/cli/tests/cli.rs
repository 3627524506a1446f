//! Command-level behavior: exit codes, determinism, and the smaller
//! contract points that the acceptance suite does not cover.

use std::path::{Path, PathBuf};

use claimdrift_core::Store;

fn run(args: &[String]) -> i32 {
    let mut full = vec!["claimdrift".to_string()];
    full.extend_from_slice(args);
    claimdrift::run_from(full)
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
    store: PathBuf,
}

impl Fixture {
    fn new() -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let store = root.join("store");
        Fixture { _dir: dir, root, store }
    }

    fn args(&self, args: &[&str]) -> Vec<String> {
        let mut v: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        v.push("--store".into());
        v.push(self.store.to_str().unwrap().to_string());
        v
    }

    fn write_articles(&self, n: usize) -> PathBuf {
        let path = self.root.join("articles.jsonl");
        let mut text = String::new();
        for i in 0..n {
            text.push_str(&format!(
                "{{\"article_id\":\"art-{i}\",\"claim_text\":\"Claim number {i} about the budget.\",\"claim_owner\":\"Owner {i}\",\"raw_label\":\"False\",\"body\":\"Body {i}. But records differ.\",\"cited_sources\":[\"Source {i}\"]}}\n"
            ));
        }
        std::fs::write(&path, text).unwrap();
        path
    }

    /// Ingest, extract, and generate a small forest.
    fn with_forest(self) -> Fixture {
        let articles = self.write_articles(2);
        assert_eq!(
            run(&self.args(&["curate", "ingest", "--input", articles.to_str().unwrap()])),
            0
        );
        assert_eq!(run(&self.args(&["curate", "extract"])), 0);
        assert_eq!(run(&self.args(&["generate"])), 0);
        self
    }
}

#[test]
fn export_is_deterministic_for_a_fixed_seed() {
    let fx = Fixture::new().with_forest();
    let out_a = fx.root.join("packets_a.csv");
    let out_b = fx.root.join("packets_b.csv");
    for out in [&out_a, &out_b] {
        assert_eq!(
            run(&fx.args(&[
                "annotate",
                "export",
                "--sample",
                "7",
                "--no-paraphrase",
                "--output",
                out.to_str().unwrap(),
                "--seed",
                "99",
            ])),
            0
        );
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b, "same seed must produce identical packet files");
}

#[test]
fn export_sample_zero_writes_header_only() {
    let fx = Fixture::new().with_forest();
    let out = fx.root.join("packets.csv");
    assert_eq!(
        run(&fx.args(&[
            "annotate",
            "export",
            "--sample",
            "0",
            "--no-paraphrase",
            "--output",
            out.to_str().unwrap(),
        ])),
        0
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("node_id,"));
}

#[test]
fn export_sample_too_large_is_fatal() {
    let fx = Fixture::new().with_forest();
    let code = run(&fx.args(&["annotate", "export", "--sample", "10000", "--no-paraphrase"]));
    assert_eq!(code, 1);
}

#[test]
fn import_with_bad_rows_is_partial() {
    let fx = Fixture::new().with_forest();
    let ratings = fx.root.join("ratings.csv");
    std::fs::write(
        &ratings,
        "node_id,rater_id,rater_kind,q1,q2,q3,q4,q5_label\n\
         n1,alice,human,4,4,5,3,Half-True\n\
         n2,bob,human,4,4,6,3,True\n",
    )
    .unwrap();
    let code = run(&fx.args(&["annotate", "import", "--input", ratings.to_str().unwrap()]));
    assert_eq!(code, 2, "out-of-range likert row makes the import partial");
    let (stored, _) = Store::read_jsonl::<claimdrift_core::RatingRecord>(
        &fx.store.join("metrics/ratings.jsonl"),
    )
    .unwrap();
    assert_eq!(stored.len(), 1);
}

#[test]
fn split_needs_ten_per_class() {
    let fx = Fixture::new();
    let articles = fx.write_articles(3);
    assert_eq!(run(&fx.args(&["curate", "ingest", "--input", articles.to_str().unwrap()])), 0);
    assert_eq!(run(&fx.args(&["curate", "split"])), 1);
}

#[test]
fn dry_run_plans_without_writing() {
    let fx = Fixture::new();
    let articles = fx.write_articles(2);
    assert_eq!(run(&fx.args(&["curate", "ingest", "--input", articles.to_str().unwrap()])), 0);
    assert_eq!(run(&fx.args(&["curate", "extract"])), 0);
    assert_eq!(run(&fx.args(&["generate", "--dry-run"])), 0);
    let store = Store::open(&fx.store).unwrap();
    assert!(store.load_claims().unwrap().is_empty(), "dry-run must not write claims");
}

#[test]
fn personas_commands_work_with_defaults() {
    let fx = Fixture::new();
    assert_eq!(run(&fx.args(&["personas", "list"])), 0);
    assert_eq!(run(&fx.args(&["personas", "validate"])), 0);
}

#[test]
fn report_with_only_readability_lists_missing_metrics() {
    let fx = Fixture::new().with_forest();
    assert_eq!(run(&fx.args(&["evaluate", "readability"])), 0);
    assert_eq!(run(&fx.args(&["report"])), 0);
    let report = std::fs::read_to_string(fx.store.join("reports/report.md")).unwrap();
    assert!(report.contains("| persona | round | n | median |"));
    assert!(report.contains("*missing — run `claimdrift evaluate drift`*"));
    assert!(report.contains("*missing — run `claimdrift evaluate robustness`*"));
}

#[test]
fn robustness_is_invariant_to_prediction_file_order() {
    let fx = Fixture::new().with_forest();
    assert_eq!(run(&fx.args(&["label"])), 0);
    assert_eq!(run(&fx.args(&["evaluate", "classify", "--strategy", "zero-shot"])), 0);
    assert_eq!(run(&fx.args(&["evaluate", "classify", "--strategy", "few-shot"])), 0);

    let metrics = fx.store.join("metrics");
    let mut prediction_files: Vec<PathBuf> = std::fs::read_dir(&metrics)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("predictions_"))
                .unwrap_or(false)
        })
        .collect();
    prediction_files.sort();
    assert_eq!(prediction_files.len(), 2);

    let robustness_csv = |files: &[PathBuf]| -> String {
        let mut args = vec!["evaluate".to_string(), "robustness".to_string()];
        for file in files {
            args.push("--predictions".into());
            args.push(file.to_str().unwrap().to_string());
        }
        args.push("--store".into());
        args.push(fx.store.to_str().unwrap().to_string());
        let mut full = vec!["claimdrift".to_string()];
        full.extend(args);
        assert_eq!(claimdrift::run_from(full), 0);
        std::fs::read_to_string(metrics.join("robustness.csv")).unwrap()
    };
    let forward = robustness_csv(&prediction_files);
    prediction_files.reverse();
    let backward = robustness_csv(&prediction_files);
    assert_eq!(forward, backward);
}

#[test]
fn unknown_stage_in_config_is_rejected() {
    let fx = Fixture::new();
    let config = fx.root.join("config.toml");
    std::fs::write(&config, "[stages.telepathy]\nbackend = \"mock\"\n").unwrap();
    let code = run(&fx.args(&["--config", config.to_str().unwrap(), "personas", "list"]));
    assert_eq!(code, 1);
}

fn count_rounds(store: &Path) -> [usize; 4] {
    let store = Store::open(store).unwrap();
    let claims = store.load_claims().unwrap();
    let mut counts = [0usize; 4];
    for node in claims.values() {
        counts[node.round as usize] += 1;
    }
    counts
}

#[test]
fn per_round_generation_composes() {
    let fx = Fixture::new();
    let articles = fx.write_articles(1);
    assert_eq!(run(&fx.args(&["curate", "ingest", "--input", articles.to_str().unwrap()])), 0);
    assert_eq!(run(&fx.args(&["curate", "extract"])), 0);
    assert_eq!(run(&fx.args(&["generate", "--round", "1"])), 0);
    assert_eq!(count_rounds(&fx.store), [1, 3, 0, 0]);
    assert_eq!(run(&fx.args(&["generate", "--round", "2"])), 0);
    assert_eq!(count_rounds(&fx.store), [1, 3, 6, 0]);
    assert_eq!(run(&fx.args(&["generate", "--round", "3"])), 0);
    assert_eq!(count_rounds(&fx.store), [1, 3, 6, 6]);
}

//! On-disk store: a directory of append-only JSON-lines files plus the run
//! manifest.
//!
//! Layout under the store root:
//!
//! ```text
//! articles/articles.jsonl    curated/curated.jsonl
//! claims/claims.jsonl        logs/steps.jsonl
//! metrics/*.csv              reports/report.md
//! manifest.json
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CoreError;
use crate::manifest::RunManifest;
use crate::node::ClaimNode;

/// Lines that failed to parse during a JSONL read, with 1-based line
/// numbers.
#[derive(Debug, Clone, Default)]
pub struct JsonlRejects {
    pub rejects: Vec<(usize, String)>,
}

impl JsonlRejects {
    pub fn is_empty(&self) -> bool {
        self.rejects.is_empty()
    }
    pub fn len(&self) -> usize {
        self.rejects.len()
    }
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    /// Open (creating directories as needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Store, CoreError> {
        let store = Store { root: root.into() };
        for sub in ["articles", "curated", "claims", "logs", "metrics", "reports"] {
            let dir = store.root.join(sub);
            fs::create_dir_all(&dir).map_err(|e| CoreError::io(dir.display().to_string(), e))?;
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn articles_path(&self) -> PathBuf {
        self.root.join("articles/articles.jsonl")
    }
    pub fn curated_path(&self) -> PathBuf {
        self.root.join("curated/curated.jsonl")
    }
    pub fn claims_path(&self) -> PathBuf {
        self.root.join("claims/claims.jsonl")
    }
    pub fn step_log_path(&self) -> PathBuf {
        self.root.join("logs/steps.jsonl")
    }
    pub fn split_path(&self) -> PathBuf {
        self.root.join("curated/split.json")
    }
    pub fn metrics_dir(&self) -> PathBuf {
        self.root.join("metrics")
    }
    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }
    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    /// Read every parseable record from a JSONL file. Missing files read as
    /// empty. Blank lines are skipped; malformed lines land in the rejects
    /// report instead of failing the read.
    pub fn read_jsonl<T: DeserializeOwned>(
        path: &Path,
    ) -> Result<(Vec<T>, JsonlRejects), CoreError> {
        let mut records = Vec::new();
        let mut rejects = JsonlRejects::default();
        if !path.exists() {
            return Ok((records, rejects));
        }
        let file = File::open(path).map_err(|e| CoreError::io(path.display().to_string(), e))?;
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| CoreError::io(path.display().to_string(), e))?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<T>(&line) {
                Ok(record) => records.push(record),
                Err(err) => rejects.rejects.push((idx + 1, err.to_string())),
            }
        }
        Ok((records, rejects))
    }

    /// Append records to a JSONL file, one object per line.
    pub fn append_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CoreError> {
        if records.is_empty() {
            return Ok(());
        }
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .map_err(|e| CoreError::io(parent.display().to_string(), e))?;
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| CoreError::io(path.display().to_string(), e))?;
        let mut buf = String::new();
        for record in records {
            buf.push_str(&serde_json::to_string(record)?);
            buf.push('\n');
        }
        file.write_all(buf.as_bytes())
            .map_err(|e| CoreError::io(path.display().to_string(), e))?;
        Ok(())
    }

    /// All claim nodes currently stored, keyed by node id. Later duplicates
    /// of an id (e.g. a relabelled node appended after labeling) win.
    pub fn load_claims(&self) -> Result<BTreeMap<String, ClaimNode>, CoreError> {
        let (nodes, _rejects) = Self::read_jsonl::<ClaimNode>(&self.claims_path())?;
        let mut map = BTreeMap::new();
        for node in nodes {
            map.insert(node.node_id.clone(), node);
        }
        Ok(map)
    }

    pub fn append_claims(&self, nodes: &[ClaimNode]) -> Result<(), CoreError> {
        Self::append_jsonl(&self.claims_path(), nodes)
    }

    pub fn load_manifest(&self) -> Result<Option<RunManifest>, CoreError> {
        let path = self.manifest_path();
        if !path.exists() {
            return Ok(None);
        }
        let text =
            fs::read_to_string(&path).map_err(|e| CoreError::io(path.display().to_string(), e))?;
        Ok(Some(serde_json::from_str(&text)?))
    }

    pub fn save_manifest(&self, manifest: &RunManifest) -> Result<(), CoreError> {
        let path = self.manifest_path();
        let text = serde_json::to_string_pretty(manifest)?;
        fs::write(&path, text).map_err(|e| CoreError::io(path.display().to_string(), e))
    }
}

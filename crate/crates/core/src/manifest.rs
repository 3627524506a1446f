//! Run manifest: the parameters and counts that make a run auditable.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    /// Digest of the serialized run configuration.
    pub config_hash: String,
    /// Model id per pipeline stage.
    pub model_ids: BTreeMap<String, String>,
    /// Generation-stage sampling temperature.
    pub temperature: f64,
    pub seed: u64,
    /// Unix epoch seconds.
    pub started_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<u64>,
    /// Record counts per stage (articles ingested, nodes per round, ...).
    pub stage_counts: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn new(config_hash: &str, seed: u64) -> RunManifest {
        // run_id depends only on config and seed so reruns of the same
        // configuration keep appending to the same logical run.
        let mut hasher = Sha256::new();
        hasher.update(config_hash.as_bytes());
        hasher.update(seed.to_le_bytes());
        let run_id = format!("run-{}", hex::encode(&hasher.finalize()[..6]));
        RunManifest {
            run_id,
            config_hash: config_hash.to_string(),
            model_ids: BTreeMap::new(),
            temperature: 0.0,
            seed,
            started_at: epoch_seconds(),
            finished_at: None,
            stage_counts: BTreeMap::new(),
        }
    }

    pub fn finish(&mut self) {
        self.finished_at = Some(epoch_seconds());
    }
}

/// Deterministic digest of any serializable configuration value.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).unwrap_or_default();
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    hex::encode(&hasher.finalize()[..16])
}

fn epoch_seconds() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

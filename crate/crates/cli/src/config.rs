//! Run configuration: a TOML file with per-stage backend blocks plus
//! store, cache, retry, and persona settings.
//!
//! ```toml
//! seed = 42
//!
//! [store]
//! dir = "store"
//!
//! [cache]
//! enabled = true              # content-addressed response cache
//!
//! [retry]
//! max_attempts = 3
//! base_delay_ms = 250
//!
//! [personas]
//! file = "personas.jsonl"     # optional; default registry otherwise
//!
//! [stages.generation]
//! backend = "mock"            # or "http"
//! model_id = "local-uncensored"
//! temperature = 0.7
//! max_tokens = 1024
//! request_budget = 4
//! # http only:
//! # base_url = "http://localhost:8080/v1"
//! # api_key_env_var = "GENERATION_API_KEY"
//! # mock only:
//! # script = "mock_script.json"
//! ```
//!
//! Stages: `extraction`, `generation`, `labeling`, `judging`,
//! `classification`, `embedding`, `scoring`, `paraphrase`. Any block may
//! be omitted; the default is a deterministic mock backend with the
//! stage's standard temperature (0.7 for generation, 0.0 elsewhere).

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use claimdrift_gateway::{RetryConfig, StageConfig};
use serde::{Deserialize, Serialize};

pub const STAGES: [&str; 8] = [
    "extraction",
    "generation",
    "labeling",
    "judging",
    "classification",
    "embedding",
    "scoring",
    "paraphrase",
];

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct StoreSection {
    #[serde(default = "default_store_dir")]
    pub dir: String,
}

fn default_store_dir() -> String {
    "store".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheSection {
    #[serde(default = "default_true")]
    pub enabled: bool,
    /// Defaults to `<store>/cache`.
    #[serde(default)]
    pub dir: Option<String>,
}

fn default_true() -> bool {
    true
}

impl Default for CacheSection {
    fn default() -> Self {
        CacheSection { enabled: true, dir: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct PersonasSection {
    /// JSONL file of persona records; omitted means the built-in registry.
    #[serde(default)]
    pub file: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub store: StoreSection,
    #[serde(default)]
    pub cache: CacheSection,
    #[serde(default)]
    pub retry: RetryConfig,
    #[serde(default)]
    pub personas: PersonasSection,
    #[serde(default)]
    pub stages: BTreeMap<String, StageConfig>,
}

fn default_seed() -> u64 {
    42
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: default_seed(),
            store: StoreSection { dir: default_store_dir() },
            cache: CacheSection::default(),
            retry: RetryConfig::default(),
            personas: PersonasSection::default(),
            stages: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    /// Load a TOML config, or JSON when the file ends in `.json`.
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let is_json = path.extension().map(|e| e == "json").unwrap_or(false);
        let config: RunConfig = if is_json {
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
        };
        for stage in config.stages.keys() {
            anyhow::ensure!(
                STAGES.contains(&stage.as_str()),
                "unknown stage {stage:?} in config (expected one of {STAGES:?})"
            );
        }
        Ok(config)
    }

    /// Stage block with per-stage defaults filled in.
    pub fn stage(&self, name: &str) -> StageConfig {
        let mut stage = self.stages.get(name).cloned().unwrap_or_else(|| StageConfig {
            model_id: format!("mock-{name}"),
            ..StageConfig::default()
        });
        if !self.stages.contains_key(name) && name == "generation" {
            stage.temperature = 0.7;
        }
        stage
    }
}

//! Per-stage backend configuration blocks.
//!
//! A stage block selects the backend kind and its parameters:
//!
//! ```toml
//! [stages.generation]
//! backend = "http"                 # or "mock"
//! base_url = "http://localhost:8080/v1"
//! model_id = "local-uncensored"
//! api_key_env_var = "GENERATION_API_KEY"
//! temperature = 0.7
//! max_tokens = 1024
//! request_budget = 4
//! script = "mock_script.json"      # mock backend only, optional
//! ```
//!
//! API keys come exclusively from the environment variable the block
//! names; they are never written to disk.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::GatewayError;
use crate::gateway::Gateway;
use crate::http::HttpBackend;
use crate::mock::MockBackend;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageConfig {
    #[serde(default = "default_backend")]
    pub backend: String,
    #[serde(default)]
    pub base_url: Option<String>,
    #[serde(default = "default_model_id")]
    pub model_id: String,
    #[serde(default)]
    pub api_key_env_var: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_request_budget")]
    pub request_budget: usize,
    /// Scripted-responses file for the mock backend.
    #[serde(default)]
    pub script: Option<String>,
}

fn default_backend() -> String {
    "mock".to_string()
}
fn default_model_id() -> String {
    "mock-model".to_string()
}
fn default_max_tokens() -> u32 {
    1024
}
fn default_request_budget() -> usize {
    4
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            backend: default_backend(),
            base_url: None,
            model_id: default_model_id(),
            api_key_env_var: None,
            temperature: 0.0,
            max_tokens: default_max_tokens(),
            request_budget: default_request_budget(),
            script: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RetryConfig {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryConfig {
    fn default() -> Self {
        RetryConfig { max_attempts: 3, base_delay_ms: 250 }
    }
}

impl StageConfig {
    /// Build the gateway for this stage. `config_dir` anchors relative
    /// script paths; `cache_dir` enables the response cache when set.
    pub fn build_gateway(
        &self,
        config_dir: &Path,
        cache_dir: Option<&Path>,
        retry: RetryConfig,
    ) -> Result<Gateway, GatewayError> {
        let backend: Arc<dyn crate::Backend> = match self.backend.as_str() {
            "mock" => {
                let backend = match &self.script {
                    Some(script) => {
                        let path = config_dir.join(script);
                        MockBackend::from_script_file(&path)?
                    }
                    None => MockBackend::default(),
                };
                Arc::new(backend)
            }
            "http" => {
                let base_url = self.base_url.clone().ok_or_else(|| {
                    GatewayError::Config("http backend requires base_url".into())
                })?;
                let api_key = match &self.api_key_env_var {
                    Some(var) => std::env::var(var).ok(),
                    None => None,
                };
                Arc::new(HttpBackend::new(base_url, api_key))
            }
            other => {
                return Err(GatewayError::Config(format!("unknown backend kind {other:?}")))
            }
        };
        Ok(Gateway::new(backend, cache_dir, self.request_budget, retry))
    }
}

//! HTTP backend speaking the chat-completions JSON protocol.
//!
//! Endpoints used, relative to the configured base URL (which normally
//! ends in `/v1`):
//!
//! * `POST {base}/chat/completions` for chat
//! * `POST {base}/embeddings` for embeddings
//! * `POST {base}/completions` with `echo` + `logprobs` for token scoring;
//!   any local sidecar replying with the same JSON shape works too.

use std::time::Duration;

use serde_json::{json, Value};

use crate::backend::Backend;
use crate::error::GatewayError;
use crate::request::{ChatRequest, EmbedRequest, ScoreRequest};

#[derive(Debug)]
pub struct HttpBackend {
    base_url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> HttpBackend {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(180))
            .build();
        HttpBackend { base_url: base_url.into().trim_end_matches('/').to_string(), api_key, agent }
    }

    fn post(&self, path: &str, body: Value) -> Result<Value, GatewayError> {
        let url = format!("{}{}", self.base_url, path);
        let mut request = self.agent.post(&url).set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            request = request.set("Authorization", &format!("Bearer {key}"));
        }
        match request.send_json(body) {
            Ok(response) => response
                .into_json::<Value>()
                .map_err(|e| GatewayError::InvalidResponse(e.to_string())),
            Err(ureq::Error::Status(status, response)) => {
                let retry_after_ms = response
                    .header("retry-after")
                    .and_then(|v| v.parse::<u64>().ok())
                    .map(|secs| secs * 1000)
                    .unwrap_or(1000);
                let body = response.into_string().unwrap_or_default();
                Err(match status {
                    429 => GatewayError::RateLimited { retry_after_ms },
                    500..=599 => {
                        GatewayError::Transport { attempts: 1, message: format!("{status}: {body}") }
                    }
                    _ if body.contains("content_filter") || body.contains("content_policy") => {
                        GatewayError::Refusal(body)
                    }
                    _ => GatewayError::Api { status, message: body },
                })
            }
            Err(ureq::Error::Transport(err)) => {
                Err(GatewayError::Transport { attempts: 1, message: err.to_string() })
            }
        }
    }
}

impl Backend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn chat(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        let messages: Vec<Value> = req
            .messages
            .iter()
            .map(|m| json!({ "role": m.role.as_str(), "content": m.content }))
            .collect();
        let mut body = json!({
            "model": req.model_id,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        if let Some(seed) = req.seed {
            body["seed"] = json!(seed);
        }
        let value = self.post("/chat/completions", body)?;
        let choice = value
            .get("choices")
            .and_then(|c| c.get(0))
            .ok_or(GatewayError::EmptyResponse)?;
        if choice.get("finish_reason").and_then(|r| r.as_str()) == Some("content_filter") {
            return Err(GatewayError::Refusal("content filter".into()));
        }
        choice
            .pointer("/message/content")
            .and_then(|c| c.as_str())
            .map(|s| s.to_string())
            .ok_or(GatewayError::EmptyResponse)
    }

    fn score(&self, req: &ScoreRequest) -> Result<Vec<f64>, GatewayError> {
        let body = json!({
            "model": req.model_id,
            "prompt": req.text,
            "max_tokens": 0,
            "echo": true,
            "logprobs": 0,
        });
        let value = self.post("/completions", body)?;
        let logprobs = value
            .pointer("/choices/0/logprobs/token_logprobs")
            .and_then(|v| v.as_array())
            .ok_or(GatewayError::EmptyResponse)?;
        // The first echoed token has no conditional probability and comes
        // back null; skip nulls.
        Ok(logprobs.iter().filter_map(|v| v.as_f64()).collect())
    }

    fn embed(&self, req: &EmbedRequest) -> Result<Vec<Vec<f64>>, GatewayError> {
        let body = json!({
            "model": req.model_id,
            "input": req.texts,
        });
        let value = self.post("/embeddings", body)?;
        let data = value
            .get("data")
            .and_then(|d| d.as_array())
            .ok_or(GatewayError::EmptyResponse)?;
        data.iter()
            .map(|entry| {
                entry
                    .get("embedding")
                    .and_then(|e| e.as_array())
                    .map(|xs| xs.iter().filter_map(|x| x.as_f64()).collect::<Vec<f64>>())
                    .ok_or_else(|| {
                        GatewayError::InvalidResponse("embedding entry without vector".into())
                    })
            })
            .collect()
    }
}

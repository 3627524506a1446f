//! The gateway proper: cache, retry, concurrency bound, and response
//! validation wrapped around a backend.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::backend::Backend;
use crate::cache::{CacheKey, DiskCache};
use crate::config::RetryConfig;
use crate::error::GatewayError;
use crate::request::{ChatRequest, EmbedRequest, ScoreRequest};
use crate::semaphore::Semaphore;

pub struct Gateway {
    backend: Arc<dyn Backend>,
    cache: Option<DiskCache>,
    semaphore: Semaphore,
    retry: RetryConfig,
    backend_calls: AtomicU64,
    cache_hits: AtomicU64,
}

impl Gateway {
    pub fn new(
        backend: Arc<dyn Backend>,
        cache_dir: Option<&Path>,
        request_budget: usize,
        retry: RetryConfig,
    ) -> Gateway {
        let cache = cache_dir.and_then(|dir| DiskCache::open(dir).ok());
        Gateway {
            backend,
            cache,
            semaphore: Semaphore::new(request_budget),
            retry,
            backend_calls: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
        }
    }

    /// Backend invocations performed (cache hits excluded, every retry
    /// attempt counted).
    pub fn backend_calls(&self) -> u64 {
        self.backend_calls.load(Ordering::SeqCst)
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits.load(Ordering::SeqCst)
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    pub fn chat(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        req.validate()?;
        let key = CacheKey::for_chat(req);
        if let Some(text) = self.cache_lookup::<String>(&key) {
            return Ok(text);
        }
        let reply = self.with_retries(|| {
            let _permit = self.semaphore.acquire();
            self.backend_calls.fetch_add(1, Ordering::SeqCst);
            self.backend.chat(req)
        })?;
        self.cache_store(&key, &reply);
        Ok(reply)
    }

    /// Per-token natural-log probabilities for the backend's tokenization
    /// of the text. Values are validated to be ≤ 0 and non-empty.
    pub fn score_logprobs(&self, req: &ScoreRequest) -> Result<Vec<f64>, GatewayError> {
        req.validate()?;
        let key = CacheKey::for_score(req);
        if let Some(scores) = self.cache_lookup::<Vec<f64>>(&key) {
            return Ok(scores);
        }
        let scores = self.with_retries(|| {
            let _permit = self.semaphore.acquire();
            self.backend_calls.fetch_add(1, Ordering::SeqCst);
            self.backend.score(req)
        })?;
        if scores.is_empty() {
            return Err(GatewayError::EmptyResponse);
        }
        if let Some(&bad) = scores.iter().find(|&&lp| lp > 0.0) {
            return Err(GatewayError::InvalidResponse(format!(
                "positive log probability {bad}"
            )));
        }
        self.cache_store(&key, &scores);
        Ok(scores)
    }

    /// One unit-norm vector per input text. Normalization happens here, so
    /// downstream cosine math never depends on backend behavior.
    pub fn embed(&self, req: &EmbedRequest) -> Result<Vec<Vec<f64>>, GatewayError> {
        req.validate()?;
        let key = CacheKey::for_embed(req);
        if let Some(vectors) = self.cache_lookup::<Vec<Vec<f64>>>(&key) {
            return Ok(vectors);
        }
        let mut vectors = self.with_retries(|| {
            let _permit = self.semaphore.acquire();
            self.backend_calls.fetch_add(1, Ordering::SeqCst);
            self.backend.embed(req)
        })?;
        if vectors.len() != req.texts.len() {
            return Err(GatewayError::InvalidResponse(format!(
                "{} texts but {} vectors",
                req.texts.len(),
                vectors.len()
            )));
        }
        let dim = vectors.first().map(|v| v.len()).unwrap_or(0);
        for v in &mut vectors {
            if v.len() != dim {
                return Err(GatewayError::DimensionMismatch { expected: dim, got: v.len() });
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(GatewayError::InvalidResponse("zero embedding vector".into()));
            }
            for x in v.iter_mut() {
                *x /= norm;
            }
        }
        self.cache_store(&key, &vectors);
        Ok(vectors)
    }

    fn cache_lookup<T: serde::de::DeserializeOwned>(&self, key: &CacheKey) -> Option<T> {
        let cache = self.cache.as_ref()?;
        let bytes = cache.get(key)?;
        match serde_json::from_slice(&bytes) {
            Ok(value) => {
                self.cache_hits.fetch_add(1, Ordering::SeqCst);
                Some(value)
            }
            Err(_) => None,
        }
    }

    fn cache_store<T: serde::Serialize>(&self, key: &CacheKey, value: &T) {
        if let Some(cache) = &self.cache {
            if let Ok(bytes) = serde_json::to_vec(value) {
                let _ = cache.put(key, &bytes);
            }
        }
    }

    fn with_retries<T>(
        &self,
        call: impl Fn() -> Result<T, GatewayError>,
    ) -> Result<T, GatewayError> {
        let max_attempts = self.retry.max_attempts.max(1);
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            match call() {
                Ok(value) => return Ok(value),
                Err(err) if err.is_retryable() && attempt < max_attempts => {
                    let delay = match &err {
                        GatewayError::RateLimited { retry_after_ms } => *retry_after_ms,
                        _ => self.retry.base_delay_ms.saturating_mul(1 << (attempt - 1)),
                    };
                    std::thread::sleep(std::time::Duration::from_millis(delay));
                }
                Err(GatewayError::Transport { message, .. }) => {
                    return Err(GatewayError::Transport { attempts: attempt, message })
                }
                Err(err) => return Err(err),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mock::{MockBackend, MockScript, ScriptRule};
    use crate::request::Message;
    use std::sync::atomic::AtomicU32;

    fn retry_fast() -> RetryConfig {
        RetryConfig { max_attempts: 3, base_delay_ms: 1 }
    }

    fn chat_req(text: &str) -> ChatRequest {
        ChatRequest {
            model_id: "m".into(),
            messages: vec![Message::user(text)],
            temperature: 0.7,
            max_tokens: 64,
            seed: Some(1),
        }
    }

    #[test]
    fn cache_hit_skips_backend() {
        let dir = tempfile::tempdir().unwrap();
        let backend = Arc::new(MockBackend::default());
        let gateway =
            Gateway::new(backend.clone(), Some(&dir.path().join("cache")), 2, retry_fast());
        let req = chat_req("hello there");
        let first = gateway.chat(&req).unwrap();
        assert_eq!(backend.calls(), 1);
        let second = gateway.chat(&req).unwrap();
        assert_eq!(first, second);
        assert_eq!(backend.calls(), 1);
        assert_eq!(gateway.cache_hits(), 1);
    }

    #[test]
    fn scripted_reply_is_exact() {
        let mut backend = MockBackend::default();
        backend.push_rule(ScriptRule {
            contains: "ping".into(),
            reply: Some("pong".into()),
            ..Default::default()
        });
        let gateway = Gateway::new(Arc::new(backend), None, 2, retry_fast());
        assert_eq!(gateway.chat(&chat_req("ping")).unwrap(), "pong");
    }

    struct FlakyBackend {
        failures: AtomicU32,
        calls: AtomicU32,
    }

    impl Backend for FlakyBackend {
        fn name(&self) -> &str {
            "flaky"
        }
        fn chat(&self, _req: &ChatRequest) -> Result<String, GatewayError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            if self.failures.load(Ordering::SeqCst) > 0 {
                self.failures.fetch_sub(1, Ordering::SeqCst);
                return Err(GatewayError::Transport { attempts: 1, message: "flaky".into() });
            }
            Ok("recovered".into())
        }
    }

    #[test]
    fn two_transport_failures_then_success() {
        let backend =
            Arc::new(FlakyBackend { failures: AtomicU32::new(2), calls: AtomicU32::new(0) });
        let gateway = Gateway::new(backend.clone(), None, 1, retry_fast());
        let reply = gateway.chat(&chat_req("x")).unwrap();
        assert_eq!(reply, "recovered");
        assert_eq!(backend.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn persistent_transport_failure_reports_attempts() {
        let backend =
            Arc::new(FlakyBackend { failures: AtomicU32::new(10), calls: AtomicU32::new(0) });
        let gateway = Gateway::new(backend, None, 1, retry_fast());
        match gateway.chat(&chat_req("x")).unwrap_err() {
            GatewayError::Transport { attempts, .. } => assert_eq!(attempts, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    struct RateLimitedOnce {
        remaining: AtomicU32,
    }

    impl Backend for RateLimitedOnce {
        fn name(&self) -> &str {
            "limited"
        }
        fn chat(&self, _req: &ChatRequest) -> Result<String, GatewayError> {
            if self.remaining.load(Ordering::SeqCst) > 0 {
                self.remaining.fetch_sub(1, Ordering::SeqCst);
                return Err(GatewayError::RateLimited { retry_after_ms: 1 });
            }
            Ok("after backoff".into())
        }
    }

    #[test]
    fn rate_limit_waits_and_retries() {
        let backend = Arc::new(RateLimitedOnce { remaining: AtomicU32::new(1) });
        let gateway = Gateway::new(backend, None, 1, retry_fast());
        assert_eq!(gateway.chat(&chat_req("x")).unwrap(), "after backoff");
        assert_eq!(gateway.backend_calls(), 2);
    }

    #[test]
    fn refusal_is_not_retried() {
        let mut backend = MockBackend::default();
        backend.push_rule(ScriptRule {
            contains: "x".into(),
            refusal: Some("no".into()),
            ..Default::default()
        });
        let backend = Arc::new(backend);
        let gateway = Gateway::new(backend.clone(), None, 1, retry_fast());
        assert!(matches!(gateway.chat(&chat_req("x")).unwrap_err(), GatewayError::Refusal(_)));
        assert_eq!(backend.calls(), 1);
    }

    #[test]
    fn request_budget_bounds_in_flight_calls() {
        let backend = Arc::new(MockBackend::new(MockScript {
            latency_ms: 5,
            ..MockScript::default()
        }));
        let gateway = Gateway::new(backend.clone(), None, 2, retry_fast());
        let prompts: Vec<String> = (0..12).map(|i| format!("prompt {i}")).collect();
        let results = crate::semaphore::bounded_map(&prompts, 12, |_, p| gateway.chat(&chat_req(p)));
        assert!(results.iter().all(|r| r.is_ok()));
        assert!(backend.max_in_flight() <= 2, "max {}", backend.max_in_flight());
        assert_eq!(backend.calls(), 12);
    }

    #[test]
    fn embeddings_come_back_unit_norm() {
        let gateway = Gateway::new(Arc::new(MockBackend::default()), None, 2, retry_fast());
        let req = EmbedRequest {
            model_id: "m".into(),
            texts: vec!["alpha".into(), "beta".into()],
        };
        let vectors = gateway.embed(&req).unwrap();
        assert_eq!(vectors.len(), 2);
        assert_eq!(vectors[0].len(), vectors[1].len());
        for v in &vectors {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
        // Identical text twice gives the identical vector.
        let again = gateway
            .embed(&EmbedRequest { model_id: "m".into(), texts: vec!["alpha".into()] })
            .unwrap();
        assert_eq!(again[0], vectors[0]);
    }

    struct EmptyScorer;
    impl Backend for EmptyScorer {
        fn name(&self) -> &str {
            "empty"
        }
        fn chat(&self, _req: &ChatRequest) -> Result<String, GatewayError> {
            Ok(String::new())
        }
        fn score(&self, _req: &ScoreRequest) -> Result<Vec<f64>, GatewayError> {
            Ok(Vec::new())
        }
    }

    #[test]
    fn empty_token_scores_are_an_error() {
        let gateway = Gateway::new(Arc::new(EmptyScorer), None, 1, retry_fast());
        let req = ScoreRequest { model_id: "m".into(), text: "words".into() };
        assert!(matches!(gateway.score_logprobs(&req).unwrap_err(), GatewayError::EmptyResponse));
    }

    #[test]
    fn unsupported_capability_surfaces() {
        struct ChatOnly;
        impl Backend for ChatOnly {
            fn name(&self) -> &str {
                "chat-only"
            }
            fn chat(&self, _req: &ChatRequest) -> Result<String, GatewayError> {
                Ok("ok".into())
            }
        }
        let gateway = Gateway::new(Arc::new(ChatOnly), None, 1, retry_fast());
        let req = ScoreRequest { model_id: "m".into(), text: "words".into() };
        assert!(matches!(
            gateway.score_logprobs(&req).unwrap_err(),
            GatewayError::UnsupportedCapability(_)
        ));
    }

    #[test]
    fn mock_uniform_scorer_through_gateway() {
        let gateway = Gateway::new(Arc::new(MockBackend::default()), None, 1, retry_fast());
        let req = ScoreRequest { model_id: "m".into(), text: "one two three four five".into() };
        let scores = gateway.score_logprobs(&req).unwrap();
        assert_eq!(scores.len(), 5);
        assert!(scores.iter().all(|&lp| (lp - (0.01f64).ln()).abs() < 1e-12));
    }
}

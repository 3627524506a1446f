use thiserror::Error;

#[derive(Debug, Error)]
pub enum GatewayError {
    /// Network-level failure; retryable with backoff.
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },

    /// Server asked us to slow down; retryable after the given delay.
    #[error("rate limited (retry after {retry_after_ms} ms)")]
    RateLimited { retry_after_ms: u64 },

    /// The model declined to answer. Never retried.
    #[error("backend refused the request: {0}")]
    Refusal(String),

    /// The configured backend cannot serve this request kind.
    #[error("backend does not support {0}")]
    UnsupportedCapability(&'static str),

    /// Backend returned vectors of differing lengths.
    #[error("ragged embedding response: expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Backend returned nothing where content was required.
    #[error("backend returned an empty response")]
    EmptyResponse,

    /// Backend returned something malformed.
    #[error("invalid backend response: {0}")]
    InvalidResponse(String),

    /// The request violates a precondition (empty messages, empty text).
    #[error("invalid request: {0}")]
    InvalidRequest(String),

    /// Non-retryable API error (bad key, unknown model, ...).
    #[error("api error {status}: {message}")]
    Api { status: u16, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cache io error: {0}")]
    CacheIo(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl GatewayError {
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            GatewayError::Transport { .. } | GatewayError::RateLimited { .. }
        )
    }
}

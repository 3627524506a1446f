//! Single chokepoint for all model interactions: chat completion, token
//! log-probability scoring, and text embedding.
//!
//! Every call goes through one [`Gateway`] per pipeline stage, which adds
//! a content-addressed disk cache, retry with exponential backoff, a
//! bounded-concurrency semaphore, and embedding normalization on top of a
//! pluggable [`Backend`]. Two backends ship: an HTTP client for the
//! chat-completions JSON protocol and a fully deterministic mock for
//! offline runs and tests.

mod backend;
mod cache;
mod config;
mod error;
mod gateway;
mod http;
mod jsonx;
mod mock;
mod request;
mod semaphore;

pub use backend::Backend;
pub use cache::{CacheKey, DiskCache};
pub use config::{RetryConfig, StageConfig};
pub use error::GatewayError;
pub use gateway::Gateway;
pub use http::HttpBackend;
pub use jsonx::extract_last_json_object;
pub use mock::{MockBackend, MockScript, ScriptRule};
pub use request::{ChatRequest, EmbedRequest, Message, Role, ScoreRequest};
pub use semaphore::{bounded_map, Semaphore};

//! The backend contract every provider implements.

use crate::error::GatewayError;
use crate::request::{ChatRequest, EmbedRequest, ScoreRequest};

/// A model provider. Capabilities are optional: the default `score` and
/// `embed` implementations report [`GatewayError::UnsupportedCapability`].
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    fn chat(&self, req: &ChatRequest) -> Result<String, GatewayError>;

    fn score(&self, _req: &ScoreRequest) -> Result<Vec<f64>, GatewayError> {
        Err(GatewayError::UnsupportedCapability("token scoring"))
    }

    fn embed(&self, _req: &EmbedRequest) -> Result<Vec<Vec<f64>>, GatewayError> {
        Err(GatewayError::UnsupportedCapability("embeddings"))
    }
}

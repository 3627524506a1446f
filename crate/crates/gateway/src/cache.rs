//! Content-addressed response cache.
//!
//! Keys digest the full canonical request (kind, model, payload,
//! temperature, seed), so equal requests always map to the same file.
//! Sampled responses are cached too: a run is reproducible, not resampled.

use std::fs;
use std::path::PathBuf;
use std::sync::Mutex;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::GatewayError;
use crate::request::{ChatRequest, EmbedRequest, ScoreRequest};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey(String);

impl CacheKey {
    fn digest(kind: &str, payload: &impl Serialize) -> CacheKey {
        let body = serde_json::to_vec(payload).expect("request serializes");
        let mut hasher = Sha256::new();
        hasher.update(kind.as_bytes());
        hasher.update([0x1f]);
        hasher.update(&body);
        CacheKey(hex::encode(hasher.finalize()))
    }

    pub fn for_chat(req: &ChatRequest) -> CacheKey {
        CacheKey::digest("chat", req)
    }
    pub fn for_score(req: &ScoreRequest) -> CacheKey {
        CacheKey::digest("score", req)
    }
    pub fn for_embed(req: &EmbedRequest) -> CacheKey {
        CacheKey::digest("embed", req)
    }

    pub fn as_hex(&self) -> &str {
        &self.0
    }
}

#[derive(Debug)]
pub struct DiskCache {
    dir: PathBuf,
    // Writes go through one lock; readers never block.
    writer: Mutex<()>,
}

impl DiskCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<DiskCache, GatewayError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(DiskCache { dir, writer: Mutex::new(()) })
    }

    fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.as_hex()))
    }

    pub fn get(&self, key: &CacheKey) -> Option<Vec<u8>> {
        fs::read(self.path_for(key)).ok()
    }

    pub fn put(&self, key: &CacheKey, bytes: &[u8]) -> Result<(), GatewayError> {
        let _guard = self.writer.lock().expect("cache writer lock");
        let tmp = self.dir.join(format!(".{}.tmp", key.as_hex()));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, self.path_for(key))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::request::Message;

    #[test]
    fn equal_requests_equal_keys() {
        let req = ChatRequest {
            model_id: "m".into(),
            messages: vec![Message::user("hello")],
            temperature: 0.7,
            max_tokens: 64,
            seed: Some(3),
        };
        assert_eq!(CacheKey::for_chat(&req), CacheKey::for_chat(&req.clone()));
        let mut other = req.clone();
        other.temperature = 0.0;
        assert_ne!(CacheKey::for_chat(&req), CacheKey::for_chat(&other));
    }

    #[test]
    fn kind_is_part_of_the_key() {
        let score = ScoreRequest { model_id: "m".into(), text: "x".into() };
        let embed = EmbedRequest { model_id: "m".into(), texts: vec!["x".into()] };
        assert_ne!(
            CacheKey::for_score(&score).as_hex(),
            CacheKey::for_embed(&embed).as_hex()
        );
    }

    #[test]
    fn roundtrip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::open(dir.path()).unwrap();
        let key = CacheKey("abc123".into());
        assert!(cache.get(&key).is_none());
        cache.put(&key, b"payload").unwrap();
        assert_eq!(cache.get(&key).unwrap(), b"payload");
    }
}

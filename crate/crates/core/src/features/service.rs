//! Adapter for an external sentence-embedding server.
//!
//! `POST {url}` with `{"texts": [...]}`; the server answers
//! `{"vectors": [[...], ...]}`, one row per input text. Vectors are returned
//! verbatim, without normalization.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{check_vector, EmbeddingProvider, EmbeddingVector, FeatureError, DEFAULT_DIM};
use crate::http::{api_key_from_env, HttpClient, RetryPolicy};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub url: String,
    pub api_key_env: Option<String>,
    pub dim: usize,
    pub batch_size: usize,
    /// Texts longer than this many characters are truncated.
    pub max_chars: usize,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub timeout_secs: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            url: "http://127.0.0.1:8081/embed".into(),
            api_key_env: None,
            dim: DEFAULT_DIM,
            batch_size: 64,
            max_chars: 2000,
            max_retries: 3,
            backoff_base_ms: 500,
            timeout_secs: 60,
        }
    }
}

pub struct ServiceEmbedder {
    url: String,
    http: HttpClient,
    dim: usize,
    batch_size: usize,
    max_chars: usize,
    truncated: AtomicUsize,
}

impl ServiceEmbedder {
    pub fn new(config: &ServiceConfig) -> Self {
        let retry = RetryPolicy {
            max_retries: config.max_retries,
            backoff_base_ms: config.backoff_base_ms,
        };
        let mut http = HttpClient::new(Duration::from_secs(config.timeout_secs), retry);
        if let Some(key) = api_key_from_env(config.api_key_env.as_deref()) {
            http = http.with_header("authorization", format!("Bearer {key}"));
        }
        ServiceEmbedder {
            url: config.url.clone(),
            http,
            dim: config.dim,
            batch_size: config.batch_size.max(1),
            max_chars: config.max_chars.max(1),
            truncated: AtomicUsize::new(0),
        }
    }

    /// Number of inputs cut to `max_chars` so far.
    pub fn truncated_count(&self) -> usize {
        self.truncated.load(Ordering::Relaxed)
    }

    fn request(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, FeatureError> {
        let payload: Vec<&str> = texts
            .iter()
            .map(|t| match t.char_indices().nth(self.max_chars) {
                Some((cut, _)) => {
                    self.truncated.fetch_add(1, Ordering::Relaxed);
                    log::warn!("truncating embedding input to {} characters", self.max_chars);
                    &t[..cut]
                }
                None => t,
            })
            .collect();
        let raw = self
            .http
            .post_json(&self.url, &serde_json::json!({ "texts": payload }))
            .map_err(|e| FeatureError::Service(e.to_string()))?;
        let v: Value = serde_json::from_str(&raw).map_err(|e| FeatureError::Service(format!("invalid JSON: {e}")))?;
        let rows = v
            .get("vectors")
            .and_then(Value::as_array)
            .ok_or_else(|| FeatureError::Service("response has no `vectors` array".into()))?;
        if rows.len() != texts.len() {
            return Err(FeatureError::RowMismatch {
                expected: texts.len(),
                got: rows.len(),
            });
        }
        rows.iter()
            .map(|row| {
                let vals = row
                    .as_array()
                    .ok_or_else(|| FeatureError::Service("vector row is not an array".into()))?
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(|| FeatureError::Service("non-numeric vector entry".into())))
                    .collect::<Result<Vec<f64>, _>>()?;
                let vec = EmbeddingVector(vals);
                check_vector(&vec, self.dim)?;
                Ok(vec)
            })
            .collect()
    }
}

impl EmbeddingProvider for ServiceEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, FeatureError> {
        if texts.iter().any(|t| t.trim().is_empty()) {
            return Err(FeatureError::EmptyText);
        }
        let mut out = Vec::with_capacity(texts.len());
        for batch in texts.chunks(self.batch_size) {
            out.extend(self.request(batch)?);
        }
        Ok(out)
    }
}

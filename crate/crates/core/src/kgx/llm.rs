//! LLM endpoint access and triple parsing.
//!
//! Wire format: `POST {base_url}/generate` with body
//! `{"model": <name>, "prompt": <text>}`, answered by `{"text": <completion>}`.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{assemble_graph, build_prompt, chunk_text, DocumentGraph, KgxError, PromptTemplate, Triple};
use crate::http::{api_key_from_env, HttpClient, HttpError, RetryPolicy};
use crate::text::collapse_whitespace;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct LlmError {
    pub message: String,
    pub transient: bool,
}

impl From<HttpError> for LlmError {
    fn from(e: HttpError) -> Self {
        LlmError {
            transient: e.is_transient(),
            message: e.to_string(),
        }
    }
}

pub trait LlmClient: Send + Sync {
    /// One completion attempt. Retrying is the caller's job.
    fn complete(&self, prompt: &str) -> Result<String, LlmError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub base_url: String,
    pub model: String,
    pub api_key_env: Option<String>,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub timeout_secs: u64,
    /// Minimum spacing between requests issued by one client.
    pub min_interval_ms: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            base_url: "http://127.0.0.1:8080".into(),
            model: "gemini-pro".into(),
            api_key_env: Some("LLM_API_KEY".into()),
            max_retries: 4,
            backoff_base_ms: 1000,
            timeout_secs: 120,
            min_interval_ms: 0,
        }
    }
}

impl LlmConfig {
    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            backoff_base_ms: self.backoff_base_ms,
        }
    }
}

pub struct HttpLlmClient {
    url: String,
    model: String,
    http: HttpClient,
    min_interval: Duration,
    last_request: Mutex<Option<Instant>>,
}

impl HttpLlmClient {
    pub fn new(config: &LlmConfig) -> Self {
        let single_attempt = RetryPolicy {
            max_retries: 0,
            backoff_base_ms: 0,
        };
        let mut http = HttpClient::new(Duration::from_secs(config.timeout_secs), single_attempt);
        if let Some(key) = api_key_from_env(config.api_key_env.as_deref()) {
            http = http.with_header("authorization", format!("Bearer {key}"));
        }
        HttpLlmClient {
            url: format!("{}/generate", config.base_url.trim_end_matches('/')),
            model: config.model.clone(),
            http,
            min_interval: Duration::from_millis(config.min_interval_ms),
            last_request: Mutex::new(None),
        }
    }

    fn pace(&self) {
        if self.min_interval.is_zero() {
            return;
        }
        let mut last = self.last_request.lock().expect("rate limiter poisoned");
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < self.min_interval {
                std::thread::sleep(self.min_interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }
}

impl LlmClient for HttpLlmClient {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        self.pace();
        let body = serde_json::json!({ "model": self.model, "prompt": prompt });
        let raw = self.http.post_json(&self.url, &body)?;
        let v: Value = serde_json::from_str(&raw).map_err(|e| LlmError {
            message: format!("endpoint returned invalid JSON: {e}"),
            transient: false,
        })?;
        v.get("text")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| LlmError {
                message: "endpoint response has no string `text` field".into(),
                transient: false,
            })
    }
}

/// Triples parsed from one response, with the number of dropped elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChunkTriples {
    pub triples: Vec<Triple>,
    /// Elements missing a field or with an empty field.
    pub warnings: usize,
    /// Well-formed elements whose head equals their tail.
    pub self_loops: usize,
}

fn strip_code_fence(raw: &str) -> &str {
    let s = raw.trim();
    let Some(rest) = s.strip_prefix("```") else {
        return s;
    };
    // Drop the info string (e.g. "json") on the opening line.
    let body = rest.split_once('\n').map_or("", |(_, b)| b);
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

/// Parse a completion as a JSON array of `{"node_1", "edge", "node_2"}`
/// objects. Elements with missing or empty fields are counted and dropped.
pub fn parse_triples(raw: &str) -> Result<ChunkTriples, KgxError> {
    let not_json = |detail: String| KgxError::NotJson {
        raw: raw.to_string(),
        detail,
    };
    let value: Value = serde_json::from_str(strip_code_fence(raw)).map_err(|e| not_json(e.to_string()))?;
    let items = value.as_array().ok_or_else(|| not_json("top level is not an array".into()))?;
    let mut out = ChunkTriples::default();
    for item in items {
        let field = |k: &str| {
            item.get(k)
                .and_then(Value::as_str)
                .map(collapse_whitespace)
                .filter(|s| !s.is_empty())
        };
        match (field("node_1"), field("edge"), field("node_2")) {
            (Some(h), Some(r), Some(t)) => {
                let triple = Triple::new(h, r, t);
                if triple.is_self_loop() {
                    out.self_loops += 1;
                } else {
                    out.triples.push(triple);
                }
            }
            _ => out.warnings += 1,
        }
    }
    if out.warnings > 0 {
        log::warn!("dropped {} malformed triple object(s)", out.warnings);
    }
    Ok(out)
}

/// Send one prompt, retrying transient failures with exponential backoff,
/// and parse the triples in the response.
pub fn extract_chunk(client: &dyn LlmClient, prompt: &str, retry: &RetryPolicy) -> Result<ChunkTriples, KgxError> {
    if prompt.trim().is_empty() {
        return Err(KgxError::EmptyPrompt);
    }
    let mut attempts = 0;
    let response = retry
        .run(
            || {
                attempts += 1;
                client.complete(prompt)
            },
            |e| e.transient,
        )
        .map_err(|last| {
            if last.transient {
                KgxError::RetriesExhausted { attempts, last }
            } else {
                KgxError::Llm(last)
            }
        })?;
    parse_triples(&response)
}

/// Extraction result for a whole document.
#[derive(Debug, Clone)]
pub struct DocumentExtraction {
    pub graph: DocumentGraph,
    pub warnings: usize,
}

/// Chunk, prompt, parse and assemble one document.
pub fn extract_document(
    client: &dyn LlmClient,
    doc_id: &str,
    text: &str,
    template: &PromptTemplate,
    chunk_size: usize,
    overlap: usize,
    retry: &RetryPolicy,
) -> Result<DocumentExtraction, KgxError> {
    let plan = chunk_text(text, chunk_size, overlap)?;
    let mut per_chunk = Vec::with_capacity(plan.boundaries.len());
    let mut warnings = 0;
    for chunk in plan.chunks(text) {
        if chunk.trim().is_empty() {
            continue;
        }
        let parsed = extract_chunk(client, &build_prompt(chunk, template), retry)?;
        warnings += parsed.warnings;
        per_chunk.push(parsed.triples);
    }
    Ok(DocumentExtraction {
        graph: assemble_graph(doc_id, &per_chunk),
        warnings,
    })
}

//! Client for a scholarly search API.
//!
//! Two endpoints are used:
//!
//! * `GET {base}/paper/search?query=..&offset=..&limit=..` returning
//!   `{"data": [{"paperId": .., "references": [{"paperId": ..}]}], "next": ..}`
//! * `GET {base}/paper/{id}/text` returning `{"paperId": .., "text": ..}`;
//!   a 404 or a null `text` means no open-access text.
//!
//! A `base_url` that is not `http(s)://` names a fixture directory laid out
//! as `search/<subject-slug>.json` and `text/<paper-id>.json` with the same
//! JSON bodies, so everything runs offline.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Document;
use crate::http::{api_key_from_env, HttpClient, HttpError, RetryPolicy};

const PAGE_SIZE: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScholarlyConfig {
    pub base_url: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    /// Concurrent text requests.
    pub concurrency: usize,
}

impl Default for ScholarlyConfig {
    fn default() -> Self {
        ScholarlyConfig {
            base_url: "https://api.semanticscholar.org/graph/v1".into(),
            api_key_env: Some("S2_API_KEY".into()),
            timeout_secs: 30,
            max_retries: 3,
            backoff_base_ms: 500,
            concurrency: 4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("request to {url} failed (status {status:?}): {message}")]
    Http {
        url: String,
        status: Option<u16>,
        message: String,
    },
    #[error("malformed API response from {url}: field `{field}`: {detail}")]
    Malformed {
        url: String,
        field: String,
        detail: String,
    },
    #[error("fixture I/O error on {path}: {source}")]
    Fixture {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("limit must be at least 1")]
    ZeroLimit,
}

impl FetchError {
    /// Network and auth failures may succeed on a later attempt.
    pub fn is_retriable(&self) -> bool {
        matches!(self, FetchError::Http { .. })
    }

    pub fn status(&self) -> Option<u16> {
        match self {
            FetchError::Http { status, .. } => *status,
            _ => None,
        }
    }
}

enum Source {
    Http { base: String, client: HttpClient },
    Fixture(PathBuf),
}

pub struct ScholarlyClient {
    source: Source,
    concurrency: usize,
}

#[derive(Debug, Clone)]
struct Candidate {
    id: String,
    references: Vec<String>,
}

struct SearchPage {
    candidates: Vec<Candidate>,
    next: Option<usize>,
}

impl ScholarlyClient {
    pub fn new(config: &ScholarlyConfig) -> Self {
        let base = config.base_url.trim_end_matches('/');
        let source = if base.starts_with("http://") || base.starts_with("https://") {
            let retry = RetryPolicy {
                max_retries: config.max_retries,
                backoff_base_ms: config.backoff_base_ms,
            };
            let mut client = HttpClient::new(Duration::from_secs(config.timeout_secs), retry);
            if let Some(key) = api_key_from_env(config.api_key_env.as_deref()) {
                client = client.with_header("x-api-key", key);
            }
            Source::Http {
                base: base.to_string(),
                client,
            }
        } else {
            Source::Fixture(PathBuf::from(base.strip_prefix("file://").unwrap_or(base)))
        };
        ScholarlyClient {
            source,
            concurrency: config.concurrency.max(1),
        }
    }

    fn search_page(&self, subject: &str, offset: usize) -> Result<SearchPage, FetchError> {
        let (url, body) = match &self.source {
            Source::Http { base, client } => {
                let url = format!("{base}/paper/search");
                let (off, lim) = (offset.to_string(), PAGE_SIZE.to_string());
                let query = [
                    ("query", subject),
                    ("offset", off.as_str()),
                    ("limit", lim.as_str()),
                    ("fields", "paperId,references.paperId"),
                ];
                let body = client.get_text(&url, &query).map_err(|e| http_err(&url, e))?;
                (url, body)
            }
            Source::Fixture(dir) => {
                let path = dir.join("search").join(format!("{}.json", subject_slug(subject)));
                let body = read_fixture(&path)?;
                (path.display().to_string(), body)
            }
        };
        let mut page = parse_search(&url, &body)?;
        if let Source::Fixture(_) = self.source {
            // Fixture files hold the full result list; emulate paging.
            let total = page.candidates.len();
            let end = (offset + PAGE_SIZE).min(total);
            page.candidates = page.candidates.drain(offset.min(total)..end).collect();
            page.next = (end < total).then_some(end);
        }
        Ok(page)
    }

    fn paper_text(&self, id: &str) -> Result<Option<String>, FetchError> {
        let (url, body) = match &self.source {
            Source::Http { base, client } => {
                let url = format!("{base}/paper/{id}/text");
                match client.get_text(&url, &[]) {
                    Ok(body) => (url, body),
                    Err(HttpError::Status { status: 404, .. }) => return Ok(None),
                    Err(e) => return Err(http_err(&url, e)),
                }
            }
            Source::Fixture(dir) => {
                let path = dir.join("text").join(format!("{id}.json"));
                if !path.exists() {
                    return Ok(None);
                }
                (path.display().to_string(), read_fixture(&path)?)
            }
        };
        parse_text(&url, &body)
    }
}

/// Fetch up to `limit` documents with non-empty text for `subject`, in API
/// order. Documents without text are skipped. References that do not resolve
/// within the fetched set are recorded as external citations.
pub fn fetch_subject(client: &ScholarlyClient, subject: &str, limit: usize) -> Result<Vec<Document>, FetchError> {
    if limit == 0 {
        return Err(FetchError::ZeroLimit);
    }
    let mut docs: Vec<(Candidate, String)> = Vec::new();
    let mut offset = 0;
    'pages: loop {
        let page = client.search_page(subject, offset)?;
        for batch in page.candidates.chunks(client.concurrency) {
            let texts = fetch_texts(client, batch)?;
            for (cand, text) in batch.iter().zip(texts) {
                match text {
                    Some(t) if !t.trim().is_empty() => docs.push((cand.clone(), t)),
                    _ => log::debug!("skipping {}: no open-access text", cand.id),
                }
                if docs.len() == limit {
                    break 'pages;
                }
            }
        }
        match page.next {
            Some(next) if next > offset => offset = next,
            _ => break,
        }
    }

    let fetched: BTreeSet<&str> = docs.iter().map(|(c, _)| c.id.as_str()).collect();
    let out = docs
        .iter()
        .map(|(cand, text)| {
            let mut doc = Document::new(cand.id.clone(), subject, text.clone());
            for r in cand.references.iter().filter(|r| **r != cand.id) {
                if fetched.contains(r.as_str()) {
                    doc.cites.insert(r.clone());
                } else {
                    doc.external_cites.insert(r.clone());
                }
            }
            doc
        })
        .collect();
    Ok(out)
}

fn fetch_texts(client: &ScholarlyClient, batch: &[Candidate]) -> Result<Vec<Option<String>>, FetchError> {
    if batch.len() == 1 {
        return Ok(vec![client.paper_text(&batch[0].id)?]);
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = batch
            .iter()
            .map(|c| s.spawn(move || client.paper_text(&c.id)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("text fetch thread panicked"))
            .collect()
    })
}

fn http_err(url: &str, e: HttpError) -> FetchError {
    FetchError::Http {
        url: url.to_string(),
        status: e.status(),
        message: e.to_string(),
    }
}

fn read_fixture(path: &Path) -> Result<String, FetchError> {
    std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            FetchError::Http {
                url: path.display().to_string(),
                status: Some(404),
                message: "fixture not found".into(),
            }
        } else {
            FetchError::Fixture {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

fn subject_slug(subject: &str) -> String {
    subject
        .chars()
        .map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

fn malformed(url: &str, field: &str, detail: impl Into<String>) -> FetchError {
    FetchError::Malformed {
        url: url.to_string(),
        field: field.to_string(),
        detail: detail.into(),
    }
}

fn parse_search(url: &str, body: &str) -> Result<SearchPage, FetchError> {
    let v: Value = serde_json::from_str(body).map_err(|e| malformed(url, "<body>", e.to_string()))?;
    let data = v
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed(url, "data", "missing or not an array"))?;
    let mut candidates = Vec::with_capacity(data.len());
    for (i, item) in data.iter().enumerate() {
        let id = item
            .get("paperId")
            .and_then(Value::as_str)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| malformed(url, &format!("data[{i}].paperId"), "missing or not a string"))?;
        let references = match item.get("references") {
            None | Some(Value::Null) => Vec::new(),
            Some(Value::Array(refs)) => refs
                .iter()
                .filter_map(|r| r.get("paperId").and_then(Value::as_str))
                .map(str::to_string)
                .collect(),
            Some(_) => return Err(malformed(url, &format!("data[{i}].references"), "not an array")),
        };
        candidates.push(Candidate {
            id: id.to_string(),
            references,
        });
    }
    let next = match v.get("next") {
        None | Some(Value::Null) => None,
        Some(n) => Some(
            n.as_u64()
                .ok_or_else(|| malformed(url, "next", "not a nonnegative integer"))? as usize,
        ),
    };
    Ok(SearchPage { candidates, next })
}

fn parse_text(url: &str, body: &str) -> Result<Option<String>, FetchError> {
    let v: Value = serde_json::from_str(body).map_err(|e| malformed(url, "<body>", e.to_string()))?;
    match v.get("text") {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(malformed(url, "text", "not a string")),
    }
}

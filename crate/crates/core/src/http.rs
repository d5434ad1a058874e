//! Blocking JSON-over-HTTP plumbing shared by the scholarly API client, the
//! LLM endpoint and the embedding service adapter.

use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HttpError {
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
}

impl HttpError {
    pub fn status(&self) -> Option<u16> {
        match self {
            HttpError::Status { status, .. } => Some(*status),
            HttpError::Transport(_) => None,
        }
    }

    /// Rate limiting, server errors and transport failures are worth retrying.
    pub fn is_transient(&self) -> bool {
        match self {
            HttpError::Status { status, .. } => *status == 429 || *status >= 500,
            HttpError::Transport(_) => true,
        }
    }
}

/// Exponential backoff schedule: attempt `k` (0-based) waits `base * 2^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub backoff_base_ms: u64,
}

impl RetryPolicy {
    pub fn delay(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.backoff_base_ms.saturating_mul(1u64 << attempt.min(16)))
    }

    /// Run `op` until it succeeds, fails permanently, or retries run out.
    pub fn run<T, E>(
        &self,
        mut op: impl FnMut() -> Result<T, E>,
        is_transient: impl Fn(&E) -> bool,
    ) -> Result<T, E> {
        let mut attempt = 0;
        loop {
            match op() {
                Ok(v) => return Ok(v),
                Err(e) if attempt < self.max_retries && is_transient(&e) => {
                    std::thread::sleep(self.delay(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

pub(crate) struct HttpClient {
    agent: ureq::Agent,
    headers: Vec<(String, String)>,
    retry: RetryPolicy,
}

impl HttpClient {
    pub fn new(timeout: Duration, retry: RetryPolicy) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpClient {
            agent,
            headers: Vec::new(),
            retry,
        }
    }

    pub fn with_header(mut self, name: &str, value: String) -> Self {
        self.headers.push((name.to_string(), value));
        self
    }

    pub fn get_text(&self, url: &str, query: &[(&str, &str)]) -> Result<String, HttpError> {
        self.retry.run(
            || {
                let mut req = self.agent.get(url);
                for (k, v) in query {
                    req = req.query(*k, *v);
                }
                for (k, v) in &self.headers {
                    req = req.header(k.as_str(), v.as_str());
                }
                finish(req.call())
            },
            HttpError::is_transient,
        )
    }

    pub fn post_json(&self, url: &str, body: &serde_json::Value) -> Result<String, HttpError> {
        self.retry.run(
            || {
                let mut req = self.agent.post(url);
                for (k, v) in &self.headers {
                    req = req.header(k.as_str(), v.as_str());
                }
                finish(req.send_json(body))
            },
            HttpError::is_transient,
        )
    }
}

fn finish(res: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> Result<String, HttpError> {
    let mut resp = res.map_err(|e| HttpError::Transport(e.to_string()))?;
    let status = resp.status().as_u16();
    let body = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| HttpError::Transport(e.to_string()))?;
    if (200..300).contains(&status) {
        Ok(body)
    } else {
        Err(HttpError::Status { status, body })
    }
}

/// Resolve an optional API key from the environment variable named in config.
pub(crate) fn api_key_from_env(var: Option<&str>) -> Option<String> {
    var.and_then(|name| std::env::var(name).ok()).filter(|k| !k.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    #[test]
    fn retries_only_transient_failures() {
        let policy = RetryPolicy { max_retries: 3, backoff_base_ms: 0 };
        let calls = Cell::new(0);
        let out: Result<(), HttpError> = policy.run(
            || {
                calls.set(calls.get() + 1);
                Err(HttpError::Status { status: 503, body: String::new() })
            },
            HttpError::is_transient,
        );
        assert!(out.is_err());
        assert_eq!(calls.get(), 4);

        calls.set(0);
        let out: Result<(), HttpError> = policy.run(
            || {
                calls.set(calls.get() + 1);
                Err(HttpError::Status { status: 401, body: String::new() })
            },
            HttpError::is_transient,
        );
        assert_eq!(out.unwrap_err().status(), Some(401));
        assert_eq!(calls.get(), 1);
    }

    #[test]
    fn backoff_doubles() {
        let p = RetryPolicy { max_retries: 5, backoff_base_ms: 100 };
        assert_eq!(p.delay(0), Duration::from_millis(100));
        assert_eq!(p.delay(3), Duration::from_millis(800));
    }
}

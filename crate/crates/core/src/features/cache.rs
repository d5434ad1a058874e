use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::{EmbeddingProvider, EmbeddingVector, FeatureError};
use crate::text::normalize_key;

#[derive(Serialize, Deserialize)]
struct CacheLine {
    key: String,
    v: Vec<f64>,
}

/// Memoizing wrapper keyed by normalized text, optionally persisted to an
/// append-only `embeddings.jsonl` file.
pub struct CachedProvider<P> {
    inner: P,
    memory: RwLock<HashMap<String, EmbeddingVector>>,
    disk: Option<(PathBuf, Mutex<fs::File>)>,
}

impl<P: EmbeddingProvider> CachedProvider<P> {
    pub fn in_memory(inner: P) -> Self {
        CachedProvider {
            inner,
            memory: RwLock::new(HashMap::new()),
            disk: None,
        }
    }

    /// Load existing entries from `path` (if present) and append new ones.
    /// Entries whose dimension differs from the provider's are ignored.
    pub fn with_disk(inner: P, path: &Path) -> Result<Self, FeatureError> {
        let cache_err = |detail: String| FeatureError::Cache {
            path: path.to_path_buf(),
            detail,
        };
        let mut memory = HashMap::new();
        if path.exists() {
            let file = fs::File::open(path).map_err(|e| cache_err(e.to_string()))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| cache_err(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheLine =
                    serde_json::from_str(&line).map_err(|e| cache_err(format!("line {}: {e}", i + 1)))?;
                if rec.v.len() == inner.dim() {
                    memory.insert(rec.key, EmbeddingVector(rec.v));
                }
            }
        }
        let file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| cache_err(e.to_string()))?;
        Ok(CachedProvider {
            inner,
            memory: RwLock::new(memory),
            disk: Some((path.to_path_buf(), Mutex::new(file))),
        })
    }

    pub fn len(&self) -> usize {
        self.memory.read().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: EmbeddingProvider> EmbeddingProvider for CachedProvider<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, FeatureError> {
        let keys: Vec<String> = texts.iter().map(|t| normalize_key(t)).collect();
        let mut out: Vec<Option<EmbeddingVector>> = {
            let memory = self.memory.read().expect("cache poisoned");
            keys.iter().map(|k| memory.get(k).cloned()).collect()
        };
        // First occurrence of each missing key.
        let mut missing: Vec<usize> = Vec::new();
        for (i, slot) in out.iter().enumerate() {
            if slot.is_none() && !missing.iter().any(|&j| keys[j] == keys[i]) {
                missing.push(i);
            }
        }
        if !missing.is_empty() {
            let query: Vec<&str> = missing.iter().map(|&i| texts[i]).collect();
            let fresh = self.inner.embed_batch(&query)?;
            let mut memory = self.memory.write().expect("cache poisoned");
            let mut lines = String::new();
            for (&i, v) in missing.iter().zip(fresh) {
                if !memory.contains_key(&keys[i]) && self.disk.is_some() {
                    let rec = CacheLine {
                        key: keys[i].clone(),
                        v: v.0.clone(),
                    };
                    lines.push_str(&serde_json::to_string(&rec).expect("finite vectors serialize"));
                    lines.push('\n');
                }
                memory.insert(keys[i].clone(), v);
            }
            if let Some((path, file)) = &self.disk {
                let mut f = file.lock().expect("cache file poisoned");
                f.write_all(lines.as_bytes()).map_err(|e| FeatureError::Cache {
                    path: path.clone(),
                    detail: e.to_string(),
                })?;
            }
            for (i, slot) in out.iter_mut().enumerate() {
                if slot.is_none() {
                    *slot = memory.get(&keys[i]).cloned();
                }
            }
        }
        Ok(out.into_iter().map(|v| v.expect("every key resolved")).collect())
    }
}

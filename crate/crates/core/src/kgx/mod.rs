//! Knowledge-graph extraction: chunk a document, prompt an LLM with a
//! one-shot template, parse triple JSON and assemble a deduplicated
//! per-document graph.

mod chunk;
mod graph;
mod llm;
mod mock;
mod prompt;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use chunk::{chunk_text, ChunkPlan, DEFAULT_CHUNK_SIZE, DEFAULT_OVERLAP};
pub use graph::{append_graphs, assemble_graph, read_graphs, DocumentGraph, Edge};
pub use llm::{
    extract_chunk, extract_document, parse_triples, ChunkTriples, DocumentExtraction, HttpLlmClient, LlmClient,
    LlmConfig, LlmError,
};
pub use crate::http::RetryPolicy;
pub use mock::mock_extract;
pub use prompt::{build_prompt, PromptTemplate, DEFAULT_TEMPLATE};

#[derive(Debug, thiserror::Error)]
pub enum KgxError {
    #[error("invalid chunking: chunk_size {chunk_size}, overlap {overlap} (need chunk_size >= 1 and overlap < chunk_size)")]
    InvalidChunking { chunk_size: usize, overlap: usize },
    #[error("prompt template has no {{chunk}} placeholder")]
    MissingPlaceholder,
    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("LLM request failed after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: LlmError },
    #[error("LLM request failed: {0}")]
    Llm(LlmError),
    #[error("LLM response is not a JSON array of triples ({detail}): {raw}")]
    NotJson { raw: String, detail: String },
    #[error("sidecar file {0} not found")]
    MissingSidecar(PathBuf),
    #[error("{path}:{line}: expected head|relation|tail, found {fields} field(s)")]
    SidecarLine { path: PathBuf, line: usize, fields: usize },
    #[error("{path}:{line}: empty head or tail")]
    SidecarEmptyNode { path: PathBuf, line: usize },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed graph record: {detail}")]
    GraphRecord { path: PathBuf, line: usize, detail: String },
}

/// One extracted assertion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

impl Triple {
    pub fn new(head: impl Into<String>, relation: impl Into<String>, tail: impl Into<String>) -> Self {
        Triple {
            head: head.into(),
            relation: relation.into(),
            tail: tail.into(),
        }
    }

    /// Head equals tail under label normalization.
    pub fn is_self_loop(&self) -> bool {
        crate::text::normalize_key(&self.head) == crate::text::normalize_key(&self.tail)
    }
}

//! Node and chunk features from a pluggable sentence-embedding provider.

mod cache;
mod hash;
mod service;

use ndarray::Array2;

use crate::kgx::DocumentGraph;

pub use cache::CachedProvider;
pub use hash::HashEmbedder;
pub use service::{ServiceConfig, ServiceEmbedder};

pub const DEFAULT_DIM: usize = 384;

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("embedding service failed: {0}")]
    Service(String),
    #[error("embedding service returned {got} vectors for {expected} texts")]
    RowMismatch { expected: usize, got: usize },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("embedding contains a non-finite value")]
    NonFinite,
    #[error("node {index} ({label:?}): {source}")]
    Node {
        index: usize,
        label: String,
        #[source]
        source: Box<FeatureError>,
    },
    #[error("graph {0:?} has no nodes")]
    EmptyGraph(String),
    #[error("embedding cache {path}: {detail}")]
    Cache { path: std::path::PathBuf, detail: String },
}

/// A fixed-dimension real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(pub Vec<f64>);

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Source of text embeddings. Implementations must be deterministic per
/// (configuration, text) and safe to call from several threads.
pub trait EmbeddingProvider: Send + Sync {
    fn dim(&self) -> usize;

    /// Embed a batch of non-empty texts, row-aligned with the input.
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, FeatureError>;
}

fn check_vector(v: &EmbeddingVector, dim: usize) -> Result<(), FeatureError> {
    if v.dim() != dim {
        return Err(FeatureError::DimensionMismatch {
            expected: dim,
            got: v.dim(),
        });
    }
    if v.0.iter().any(|x| !x.is_finite()) {
        return Err(FeatureError::NonFinite);
    }
    Ok(())
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for Box<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, FeatureError> {
        (**self).embed_batch(texts)
    }
}

pub fn embed_text(provider: &dyn EmbeddingProvider, text: &str) -> Result<EmbeddingVector, FeatureError> {
    if text.trim().is_empty() {
        return Err(FeatureError::EmptyText);
    }
    let mut out = provider.embed_batch(&[text])?;
    if out.len() != 1 {
        return Err(FeatureError::RowMismatch {
            expected: 1,
            got: out.len(),
        });
    }
    let v = out.pop().expect("one row");
    check_vector(&v, provider.dim())?;
    Ok(v)
}

/// Node features for one graph: row `i` embeds node label `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(pub Array2<f64>);

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }
}

pub fn featurize_graph(provider: &dyn EmbeddingProvider, graph: &DocumentGraph) -> Result<FeatureMatrix, FeatureError> {
    if graph.nodes.is_empty() {
        return Err(FeatureError::EmptyGraph(graph.doc_id.clone()));
    }
    let node_err = |index: usize, source: FeatureError| FeatureError::Node {
        index,
        label: graph.nodes[index].clone(),
        source: Box::new(source),
    };
    if let Some(i) = graph.nodes.iter().position(|n| n.trim().is_empty()) {
        return Err(node_err(i, FeatureError::EmptyText));
    }
    let labels: Vec<&str> = graph.nodes.iter().map(String::as_str).collect();
    let vectors = provider.embed_batch(&labels)?;
    if vectors.len() != labels.len() {
        return Err(FeatureError::RowMismatch {
            expected: labels.len(),
            got: vectors.len(),
        });
    }
    let dim = provider.dim();
    let mut m = Array2::zeros((labels.len(), dim));
    for (i, v) in vectors.iter().enumerate() {
        check_vector(v, dim).map_err(|e| node_err(i, e))?;
        m.row_mut(i).assign(&ndarray::ArrayView1::from(v.as_slice()));
    }
    Ok(FeatureMatrix(m))
}

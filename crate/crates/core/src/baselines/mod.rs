//! Comparison scorers: n-gram text reuse, LDA topic divergence and summed
//! chunk-embedding distance.

mod docemb;
mod lda;
mod reuse;

use std::path::PathBuf;

pub use docemb::{cosine_distance, doc_embedding_score, document_vector, DOC_CHUNK_CHARS};
pub use lda::{kl_score, tokenize, KlDirection, LdaConfig, LdaModel, TopicDistribution, LDA_FORMAT, LDA_VERSION};
pub use reuse::{text_reuse_score, trim_for_reuse, ReuseMatch, ReuseResult, DEFAULT_MIN_NGRAM, TRIM_HEAD, TRIM_TAIL};

use crate::features::FeatureError;

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("empty text")]
    EmptyText,
    #[error("no vocabulary left after tokenization")]
    EmptyVocabulary,
    #[error("invalid LDA config: {0}")]
    Config(String),
    #[error("distributions have different lengths: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("distribution entry {index} is {value}; KL needs strictly positive entries")]
    NonPositive { index: usize, value: f64 },
    #[error("summed document embedding has zero norm")]
    ZeroNorm,
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error("{path}: {detail}")]
    File { path: PathBuf, detail: String },
}

/// The four scored methods, with their orientation adapters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    KnowledgeGraph,
    TextReuse,
    Lda,
    DocEmbedding,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::KnowledgeGraph, Method::TextReuse, Method::Lda, Method::DocEmbedding];

    pub fn name(self) -> &'static str {
        match self {
            Method::KnowledgeGraph => "kg",
            Method::TextReuse => "text_reuse",
            Method::Lda => "lda",
            Method::DocEmbedding => "doc_embedding",
        }
    }

    /// Map a raw method output to "higher = more similar". Cosine
    /// similarity and reuse counts pass through; divergence and distance
    /// are negated.
    pub fn orient(self, raw: f64) -> f64 {
        match self {
            Method::KnowledgeGraph | Method::TextReuse => raw,
            Method::Lda | Method::DocEmbedding => -raw,
        }
    }
}

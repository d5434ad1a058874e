//! Citation-labeled pair sampling and contrastive training of the encoder.

mod adam;
mod checkpoint;
mod loss;
mod pairs;
mod trainer;

use std::path::PathBuf;

pub use adam::{adam_step, adam_update, AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use loss::{cosine_embedding_loss, cosine_similarity, PairLoss};
pub use pairs::{
    negatives_for, read_pairs, sample_pairs, split_pairs, write_pairs, PairLabel, PairSample, PairSampling,
    NEGATIVE_TO_POSITIVE_RATIO,
};
pub use trainer::{
    embed_document, prepare_graphs, read_loss_csv, train, write_loss_csv, EpochLoss, PreparedGraph, TrainConfig,
    TrainOutcome, Trainer,
};

use crate::corpus::CorpusError;
use crate::encoder::EncoderError;
use crate::features::FeatureError;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("a pair needs two distinct documents, got {0:?} twice")]
    SelfPair(String),
    #[error("corpus has no subject with at least two documents")]
    NoPairableSubject,
    #[error("cannot split an empty pair set")]
    EmptyPairs,
    #[error("no usable training pairs")]
    EmptyTrainSet,
    #[error("zero-norm embedding reached the loss (empty or degenerate graph)")]
    ZeroNorm,
    #[error("embedding lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-finite gradient in tensor {tensor}")]
    NonFiniteGradient { tensor: &'static str },
    #[error("no graph for document {0:?}")]
    MissingGraph(String),
    #[error("pair ({doc_a}, {doc_b}): {source}")]
    Pair {
        doc_a: String,
        doc_b: String,
        #[source]
        source: Box<TrainError>,
    },
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {detail}")]
    File { path: PathBuf, detail: String },
}

impl TrainError {
    pub(crate) fn file(path: &std::path::Path, detail: impl ToString) -> Self {
        TrainError::File {
            path: path.to_path_buf(),
            detail: detail.to_string(),
        }
    }
}

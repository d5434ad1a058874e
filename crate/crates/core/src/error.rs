use crate::{baselines, corpus, encoder, evaluation, features, kgx, training};

/// Umbrella error for callers that drive several stages.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error(transparent)]
    Fetch(#[from] corpus::FetchError),
    #[error(transparent)]
    Extraction(#[from] kgx::KgxError),
    #[error(transparent)]
    Features(#[from] features::FeatureError),
    #[error(transparent)]
    Encoder(#[from] encoder::EncoderError),
    #[error(transparent)]
    Training(#[from] training::TrainError),
    #[error(transparent)]
    Baseline(#[from] baselines::BaselineError),
    #[error(transparent)]
    Evaluation(#[from] evaluation::EvalError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

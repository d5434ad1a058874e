//! Knowledge-graph embeddings for detecting text-level influence between
//! documents.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! * [`corpus`]: subject-grouped documents with citation links.
//! * [`kgx`]: per-document knowledge graphs extracted by an LLM (or a
//!   deterministic sidecar reader for offline runs).
//! * [`features`]: fixed-dimension node features from an embedding provider.
//! * [`encoder`]: a three-layer graph-convolutional encoder with exact
//!   reverse-mode gradients.
//! * [`training`]: citation-labeled pair sampling and contrastive training.
//! * [`baselines`]: text reuse, LDA topic divergence and summed chunk
//!   embeddings.
//! * [`evaluation`]: rank-sum test, ROC/AUC and F1 at the Youden threshold.

pub mod baselines;
pub mod corpus;
pub mod encoder;
pub mod evaluation;
pub mod features;
pub(crate) mod http;
pub mod kgx;
pub mod synthetic;
pub mod text;
pub mod training;

mod error;

pub use error::{Error, Result};

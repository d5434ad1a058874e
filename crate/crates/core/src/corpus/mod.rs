//! Subject-grouped document corpus with citation links.

mod scholarly;
mod store;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use scholarly::{fetch_subject, FetchError, ScholarlyClient, ScholarlyConfig};
pub use store::{load_corpus, save_corpus, DOCUMENTS_FILE};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus directory {0} does not exist")]
    MissingDirectory(PathBuf),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("invalid document {id:?}: {reason}")]
    InvalidDocument { id: String, reason: String },
    #[error("unknown document id {0:?}")]
    UnknownId(String),
}

/// A corpus article.
///
/// `cites` holds references that resolve inside the corpus; references to
/// documents outside it live in `external_cites` and never produce pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub subject: String,
    pub text: String,
    #[serde(default)]
    pub cites: BTreeSet<String>,
    #[serde(default)]
    pub external_cites: BTreeSet<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, subject: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            subject: subject.into(),
            text: text.into(),
            cites: BTreeSet::new(),
            external_cites: BTreeSet::new(),
        }
    }

    pub fn citing<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.cites.extend(ids.into_iter().map(Into::into));
        self
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let invalid = |reason: &str| CorpusError::InvalidDocument {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.id.is_empty() {
            return Err(invalid("empty id"));
        }
        if self.subject.is_empty() {
            return Err(invalid("empty subject"));
        }
        if self.cites.contains(&self.id) || self.external_cites.contains(&self.id) {
            return Err(invalid("document cites itself"));
        }
        Ok(())
    }
}

/// Immutable collection of documents keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: BTreeMap<String, Document>,
    subjects: BTreeSet<String>,
}

impl Corpus {
    /// Validate documents and resolve citations: ids that do not resolve in
    /// the corpus move to `external_cites`, external ids that do resolve move
    /// back to `cites`.
    pub fn from_documents(docs: impl IntoIterator<Item = Document>) -> Result<Self, CorpusError> {
        let mut documents = BTreeMap::new();
        for doc in docs {
            doc.validate()?;
            if documents.contains_key(&doc.id) {
                return Err(CorpusError::DuplicateId(doc.id));
            }
            documents.insert(doc.id.clone(), doc);
        }
        let ids: BTreeSet<String> = documents.keys().cloned().collect();
        for doc in documents.values_mut() {
            let all: BTreeSet<String> = doc.cites.iter().chain(&doc.external_cites).cloned().collect();
            let (internal, external): (BTreeSet<_>, BTreeSet<_>) =
                all.into_iter().partition(|id| ids.contains(id));
            doc.cites = internal;
            doc.external_cites = external;
        }
        let subjects = documents.values().map(|d| d.subject.clone()).collect();
        Ok(Corpus { documents, subjects })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.get(id)
    }

    /// Documents in id order.
    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.documents.values()
    }

    pub fn subjects(&self) -> &BTreeSet<String> {
        &self.subjects
    }

    /// Ids of documents in `subject`, sorted.
    pub fn subject_members(&self, subject: &str) -> Vec<&str> {
        self.documents
            .values()
            .filter(|d| d.subject == subject)
            .map(|d| d.id.as_str())
            .collect()
    }

    /// True iff either document cites the other.
    pub fn citation_exists(&self, a: &str, b: &str) -> Result<bool, CorpusError> {
        let da = self.get(a).ok_or_else(|| CorpusError::UnknownId(a.to_string()))?;
        let db = self.get(b).ok_or_else(|| CorpusError::UnknownId(b.to_string()))?;
        Ok(da.cites.contains(b) || db.cites.contains(a))
    }

    /// Per-subject document counts, in subject order.
    pub fn subject_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for d in self.documents.values() {
            *counts.entry(d.subject.as_str()).or_insert(0) += 1;
        }
        counts
    }
}

//! Rank-sum significance, ROC/AUC and thresholded F1 over per-method pair
//! scores, plus the report files.
//!
//! Every scorer feeds this module with "higher = more similar" scores.

mod ranksum;
mod report;
mod roc;

use std::collections::BTreeSet;
use std::path::PathBuf;

pub use ranksum::{neg_log10_normal_sf, rank_sum_exact_p, rank_sum_normal_p, rank_sum_test, PValueMethod, RankSumResult, EXACT_MAX_PRODUCT, EXACT_MAX_TOTAL};
pub use report::{
    build_report, read_report_csv, read_scores, roc_file_name, write_report_csv, write_roc_csv, write_roc_svg,
    write_scores, EvaluationReport, MethodReport, ReportRow, REPORT_HEADER,
};
pub use roc::{auc, max_f1_sweep, optimal_threshold, roc_curve, Classification, RocPoint};

use crate::training::PairLabel;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{method}: need at least one positive and one negative pair ({positives} positive, {negatives} negative)")]
    SingleClass {
        method: String,
        positives: usize,
        negatives: usize,
    },
    #[error("{method}: non-finite score for pair {pair_id}")]
    NonFinite { method: String, pair_id: String },
    #[error("{method}: pair {pair_id} scored twice")]
    DuplicatePair { method: String, pair_id: String },
    #[error("empty score list")]
    Empty,
    #[error("{method} scored a different pair set than {reference}: {detail}")]
    PairSetMismatch {
        method: String,
        reference: String,
        detail: String,
    },
    #[error("no methods to report")]
    NoMethods,
    #[error("{path}: {detail}")]
    File { path: PathBuf, detail: String },
}

impl EvalError {
    pub(crate) fn file(path: &std::path::Path, detail: impl ToString) -> Self {
        EvalError::File {
            path: path.to_path_buf(),
            detail: detail.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredEntry {
    pub pair_id: String,
    pub label: PairLabel,
    pub score: f64,
}

/// One method's orientation-normalized scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPairs {
    pub method: String,
    pub entries: Vec<ScoredEntry>,
}

impl ScoredPairs {
    pub fn new(method: impl Into<String>) -> Self {
        ScoredPairs {
            method: method.into(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, pair_id: impl Into<String>, label: PairLabel, score: f64) {
        self.entries.push(ScoredEntry {
            pair_id: pair_id.into(),
            label,
            score,
        });
    }

    /// Build from parallel score lists; pair ids are synthesized.
    pub fn from_groups(method: impl Into<String>, positives: &[f64], negatives: &[f64]) -> Self {
        let mut s = ScoredPairs::new(method);
        for (i, &x) in positives.iter().enumerate() {
            s.push(format!("p{i}"), PairLabel::Positive, x);
        }
        for (i, &x) in negatives.iter().enumerate() {
            s.push(format!("n{i}"), PairLabel::Negative, x);
        }
        s
    }

    /// Scores split by label, after checking finiteness, uniqueness and
    /// that both classes are present.
    pub fn groups(&self) -> Result<(Vec<f64>, Vec<f64>), EvalError> {
        let mut seen = BTreeSet::new();
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for e in &self.entries {
            if !e.score.is_finite() {
                return Err(EvalError::NonFinite {
                    method: self.method.clone(),
                    pair_id: e.pair_id.clone(),
                });
            }
            if !seen.insert(e.pair_id.as_str()) {
                return Err(EvalError::DuplicatePair {
                    method: self.method.clone(),
                    pair_id: e.pair_id.clone(),
                });
            }
            match e.label {
                PairLabel::Positive => pos.push(e.score),
                PairLabel::Negative => neg.push(e.score),
            }
        }
        if pos.is_empty() || neg.is_empty() {
            return Err(EvalError::SingleClass {
                method: self.method.clone(),
                positives: pos.len(),
                negatives: neg.len(),
            });
        }
        Ok((pos, neg))
    }
}

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::corpus::Corpus;

/// Negatives per positive in the reference sampling (13,500 : 8,500).
pub const NEGATIVE_TO_POSITIVE_RATIO: f64 = 13_500.0 / 8_500.0;

/// Negative count matching the reference ratio for `n_positive` positives.
pub fn negatives_for(n_positive: usize) -> usize {
    (n_positive as f64 * NEGATIVE_TO_POSITIVE_RATIO).round() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairLabel {
    Positive,
    Negative,
}

impl PairLabel {
    pub fn is_positive(self) -> bool {
        self == PairLabel::Positive
    }
}

/// Unordered same-subject document pair. Stored with `doc_a < doc_b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairSample {
    pub doc_a: String,
    pub doc_b: String,
    pub label: PairLabel,
    pub subject: String,
}

impl PairSample {
    pub fn new(a: &str, b: &str, label: PairLabel, subject: &str) -> Result<Self, TrainError> {
        if a == b {
            return Err(TrainError::SelfPair(a.to_string()));
        }
        let (doc_a, doc_b) = if a < b { (a, b) } else { (b, a) };
        Ok(PairSample {
            doc_a: doc_a.to_string(),
            doc_b: doc_b.to_string(),
            label,
            subject: subject.to_string(),
        })
    }

    /// Stable identifier for the unordered pair.
    pub fn key(&self) -> String {
        format!("{}|{}", self.doc_a, self.doc_b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSampling {
    pub pairs: Vec<PairSample>,
    pub positive_shortfall: usize,
    pub negative_shortfall: usize,
}

/// Draw positives (same subject, citation in either direction) and
/// negatives (same subject, no citation) uniformly without replacement.
/// Positives come first in the result. A stratum smaller than requested is
/// returned whole and the shortfall recorded.
pub fn sample_pairs(corpus: &Corpus, n_positive: usize, n_negative: usize, seed: u64) -> Result<PairSampling, TrainError> {
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    let mut pairable = false;
    for subject in corpus.subjects() {
        let members = corpus.subject_members(subject);
        pairable |= members.len() >= 2;
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                let label = if corpus.citation_exists(a, b)? {
                    PairLabel::Positive
                } else {
                    PairLabel::Negative
                };
                let pair = PairSample::new(a, b, label, subject)?;
                match label {
                    PairLabel::Positive => positives.push(pair),
                    PairLabel::Negative => negatives.push(pair),
                }
            }
        }
    }
    if !pairable {
        return Err(TrainError::NoPairableSubject);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |mut pool: Vec<PairSample>, n: usize, what: &str| -> (Vec<PairSample>, usize) {
        let shortfall = n.saturating_sub(pool.len());
        if shortfall > 0 {
            log::warn!("requested {n} {what} pairs, only {} available", pool.len());
        }
        let (chosen, _) = pool.partial_shuffle(&mut rng, n);
        (chosen.to_vec(), shortfall)
    };
    let (mut pairs, positive_shortfall) = draw(positives, n_positive, "positive");
    let (neg, negative_shortfall) = draw(negatives, n_negative, "negative");
    pairs.extend(neg);
    Ok(PairSampling {
        pairs,
        positive_shortfall,
        negative_shortfall,
    })
}

/// Stratified, seeded train/test split. Each label keeps
/// `round(fraction * count)` pairs for training.
pub fn split_pairs(
    pairs: &[PairSample],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<PairSample>, Vec<PairSample>), TrainError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(TrainError::Config(format!("train_fraction {train_fraction} outside (0, 1)")));
    }
    if pairs.is_empty() {
        return Err(TrainError::EmptyPairs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [PairLabel::Positive, PairLabel::Negative] {
        let mut stratum: Vec<PairSample> = pairs.iter().filter(|p| p.label == label).cloned().collect();
        stratum.shuffle(&mut rng);
        let n_train = (train_fraction * stratum.len() as f64).round() as usize;
        test.extend(stratum.split_off(n_train));
        train.extend(stratum);
    }
    Ok((train, test))
}

pub fn write_pairs(path: &Path, pairs: &[PairSample]) -> Result<(), TrainError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| TrainError::file(path, e))?;
    for p in pairs {
        w.serialize(p).map_err(|e| TrainError::file(path, e))?;
    }
    if pairs.is_empty() {
        w.write_record(["doc_a", "doc_b", "label", "subject"])
            .map_err(|e| TrainError::file(path, e))?;
    }
    w.flush().map_err(|e| TrainError::file(path, e))
}

pub fn read_pairs(path: &Path) -> Result<Vec<PairSample>, TrainError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| TrainError::file(path, e))?;
    let mut out = Vec::new();
    for rec in r.deserialize::<PairSample>() {
        let p = rec.map_err(|e| TrainError::file(path, e))?;
        out.push(PairSample::new(&p.doc_a, &p.doc_b, p.label, &p.subject)?);
    }
    Ok(out)
}

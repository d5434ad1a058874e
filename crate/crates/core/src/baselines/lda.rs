use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BaselineError;

pub const LDA_FORMAT: &str = "kginfluence-lda";
pub const LDA_VERSION: u32 = 1;

const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any", "are", "as", "at",
    "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could", "did", "do",
    "does", "doing", "down", "during", "each", "et", "al", "few", "for", "from", "further", "had", "has", "have",
    "having", "he", "her", "here", "hers", "him", "his", "how", "however", "i", "if", "in", "into", "is", "it", "its",
    "itself", "may", "me", "might", "more", "most", "must", "my", "no", "nor", "not", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "out", "over", "own", "same", "she", "should", "so", "some", "such", "than",
    "that", "the", "their", "theirs", "them", "then", "there", "these", "they", "this", "those", "through", "thus",
    "to", "too", "under", "until", "up", "upon", "us", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "within", "without", "would", "you", "your",
];

/// Lowercase alphanumeric words, minus stopwords, pure numbers and single
/// characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| w.chars().count() > 1 && !w.chars().all(|c| c.is_ascii_digit()))
        .map(str::to_lowercase)
        .filter(|w| !STOPWORDS.contains(&w.as_str()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub infer_iterations: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 500,
            alpha: 0.1,
            beta: 0.01,
            iterations: 200,
            infer_iterations: 50,
            seed: 0,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.topics < 2 {
            return Err(BaselineError::Config(format!("need at least 2 topics, got {}", self.topics)));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(BaselineError::Config("alpha and beta must be positive".into()));
        }
        Ok(())
    }
}

/// Per-document topic proportions; strictly positive, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicDistribution(pub Vec<f64>);

impl TopicDistribution {
    pub fn argmax(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// Fitted collapsed-Gibbs LDA: vocabulary and topic-word counts.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub config: LdaConfig,
    pub vocab: Vec<String>,
    index: HashMap<String, usize>,
    /// `word_topic[w * K + k]`
    word_topic: Vec<u32>,
    topic_totals: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct LdaFile {
    format: String,
    version: u32,
    config: LdaConfig,
    vocab: Vec<String>,
    /// Non-zero `(word, topic, count)` entries.
    counts: Vec<(u32, u32, u32)>,
}

struct Sampler {
    k: usize,
    alpha: f64,
    beta: f64,
    v_beta: f64,
    probs: Vec<f64>,
}

impl Sampler {
    fn new(cfg: &LdaConfig, vocab: usize) -> Self {
        Sampler {
            k: cfg.topics,
            alpha: cfg.alpha,
            beta: cfg.beta,
            v_beta: vocab as f64 * cfg.beta,
            probs: vec![0.0; cfg.topics],
        }
    }

    fn draw(&mut self, rng: &mut ChaCha8Rng, doc_topic: &[u32], word_topic: &[u32], totals: &[u64]) -> usize {
        let mut sum = 0.0;
        for t in 0..self.k {
            sum += (doc_topic[t] as f64 + self.alpha) * (word_topic[t] as f64 + self.beta)
                / (totals[t] as f64 + self.v_beta);
            self.probs[t] = sum;
        }
        let u = rng.random::<f64>() * sum;
        self.probs.partition_point(|&c| c <= u).min(self.k - 1)
    }
}

impl LdaModel {
    /// Fit on the given documents with collapsed Gibbs sampling.
    pub fn fit<S: AsRef<str>>(texts: &[S], config: LdaConfig) -> Result<Self, BaselineError> {
        config.validate()?;
        let k = config.topics;
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut vocab = Vec::new();
        let docs: Vec<Vec<usize>> = texts
            .iter()
            .map(|t| {
                tokenize(t.as_ref())
                    .into_iter()
                    .map(|w| {
                        *index.entry(w.clone()).or_insert_with(|| {
                            vocab.push(w);
                            vocab.len() - 1
                        })
                    })
                    .collect()
            })
            .collect();
        if vocab.is_empty() {
            return Err(BaselineError::EmptyVocabulary);
        }
        let v = vocab.len();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut word_topic = vec![0u32; v * k];
        let mut totals = vec![0u64; k];
        let mut doc_topic: Vec<Vec<u32>> = vec![vec![0; k]; docs.len()];
        let mut z: Vec<Vec<usize>> = Vec::with_capacity(docs.len());
        for (d, words) in docs.iter().enumerate() {
            let zs: Vec<usize> = words.iter().map(|_| rng.random_range(0..k)).collect();
            for (&w, &t) in words.iter().zip(&zs) {
                word_topic[w * k + t] += 1;
                totals[t] += 1;
                doc_topic[d][t] += 1;
            }
            z.push(zs);
        }
        let mut sampler = Sampler::new(&config, v);
        for _ in 0..config.iterations {
            for (d, words) in docs.iter().enumerate() {
                for (i, &w) in words.iter().enumerate() {
                    let old = z[d][i];
                    word_topic[w * k + old] -= 1;
                    totals[old] -= 1;
                    doc_topic[d][old] -= 1;
                    let new = sampler.draw(&mut rng, &doc_topic[d], &word_topic[w * k..(w + 1) * k], &totals);
                    word_topic[w * k + new] += 1;
                    totals[new] += 1;
                    doc_topic[d][new] += 1;
                    z[d][i] = new;
                }
            }
        }
        Ok(LdaModel {
            config,
            vocab,
            index,
            word_topic,
            topic_totals: totals,
        })
    }

    pub fn topics(&self) -> usize {
        self.config.topics
    }

    /// Fold in a document against the fixed topic-word counts. Words
    /// outside the vocabulary are ignored; a document with no known words
    /// gets the uniform distribution.
    pub fn infer(&self, text: &str) -> TopicDistribution {
        let k = self.config.topics;
        let words: Vec<usize> = tokenize(text).iter().filter_map(|w| self.index.get(w).copied()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(1);
        let mut doc_topic = vec![0u32; k];
        let mut z: Vec<usize> = words.iter().map(|_| rng.random_range(0..k)).collect();
        for &t in &z {
            doc_topic[t] += 1;
        }
        let mut sampler = Sampler::new(&self.config, self.vocab.len());
        for _ in 0..self.config.infer_iterations {
            for (i, &w) in words.iter().enumerate() {
                doc_topic[z[i]] -= 1;
                let new = sampler.draw(&mut rng, &doc_topic, &self.word_topic[w * k..(w + 1) * k], &self.topic_totals);
                doc_topic[new] += 1;
                z[i] = new;
            }
        }
        let denom = words.len() as f64 + k as f64 * self.config.alpha;
        TopicDistribution(doc_topic.iter().map(|&c| (c as f64 + self.config.alpha) / denom).collect())
    }

    pub fn save(&self, path: &Path) -> Result<(), BaselineError> {
        let k = self.config.topics;
        let counts = self
            .word_topic
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| ((i / k) as u32, (i % k) as u32, c))
            .collect();
        let file = LdaFile {
            format: LDA_FORMAT.into(),
            version: LDA_VERSION,
            config: self.config,
            vocab: self.vocab.clone(),
            counts,
        };
        let err = |e: &dyn std::fmt::Display| BaselineError::File {
            path: path.to_path_buf(),
            detail: e.to_string(),
        };
        let json = serde_json::to_vec(&file).map_err(|e| err(&e))?;
        std::fs::write(path, json).map_err(|e| err(&e))
    }

    pub fn load(path: &Path) -> Result<Self, BaselineError> {
        let err = |detail: String| BaselineError::File {
            path: path.to_path_buf(),
            detail,
        };
        let bytes = std::fs::read(path).map_err(|e| err(e.to_string()))?;
        let file: LdaFile = serde_json::from_slice(&bytes).map_err(|e| err(e.to_string()))?;
        if file.format != LDA_FORMAT || file.version != LDA_VERSION {
            return Err(err(format!("unsupported model {} v{}", file.format, file.version)));
        }
        file.config.validate()?;
        let (k, v) = (file.config.topics, file.vocab.len());
        let mut word_topic = vec![0u32; v * k];
        let mut totals = vec![0u64; k];
        for (w, t, c) in file.counts {
            let (w, t) = (w as usize, t as usize);
            if w >= v || t >= k {
                return Err(err(format!("count entry ({w}, {t}) out of range")));
            }
            word_topic[w * k + t] = c;
            totals[t] += c as u64;
        }
        let index = file.vocab.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(LdaModel {
            config: file.config,
            vocab: file.vocab,
            index,
            word_topic,
            topic_totals: totals,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KlDirection {
    /// `KL(p||q) + KL(q||p)`
    #[default]
    Symmetric,
    /// `KL(p||q)`
    Forward,
    /// `KL(q||p)`
    Reverse,
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * (a / b).ln()).sum()
}

/// KL divergence in nats between two strictly positive distributions.
pub fn kl_score(p: &TopicDistribution, q: &TopicDistribution, direction: KlDirection) -> Result<f64, BaselineError> {
    if p.0.len() != q.0.len() {
        return Err(BaselineError::DimensionMismatch(p.0.len(), q.0.len()));
    }
    for dist in [p, q] {
        if let Some((index, &value)) = dist.0.iter().enumerate().find(|(_, &x)| x.is_nan() || x <= 0.0) {
            return Err(BaselineError::NonPositive { index, value });
        }
    }
    let d = match direction {
        KlDirection::Symmetric => kl(&p.0, &q.0) + kl(&q.0, &p.0),
        KlDirection::Forward => kl(&p.0, &q.0),
        KlDirection::Reverse => kl(&q.0, &p.0),
    };
    Ok(d.max(0.0))
}

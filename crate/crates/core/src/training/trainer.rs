use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, cosine_embedding_loss, AdamConfig, AdamState, Checkpoint, PairSample, TrainError};
use crate::encoder::{backward, forward, init_weights, normalize_adjacency, EncoderConfig, EncoderWeights, GraphEmbedding};
use crate::features::{featurize_graph, EmbeddingProvider, FeatureMatrix};
use crate::kgx::DocumentGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub margin: f64,
    pub train_fraction: f64,
    pub batch_size: usize,
    /// L2 penalty added to the gradient. The reference setup uses none.
    pub weight_decay: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    /// Emit a checkpoint every this many epochs; 0 means only at the end.
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 80,
            learning_rate: 0.05,
            margin: 0.5,
            train_fraction: 0.8,
            batch_size: 1,
            weight_decay: 0.0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            checkpoint_every: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return bad(format!("margin must lie in (0, 1), got {}", self.margin));
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction must lie in (0, 1), got {}", self.train_fraction));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad(format!("weight_decay must be non-negative, got {}", self.weight_decay));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        if self.adam_epsilon.is_nan() || self.adam_epsilon <= 0.0 {
            return bad("adam_epsilon must be positive".into());
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

/// A document graph ready for the encoder. Graphs without nodes carry no
/// features; graphs without edges are excluded from training.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    pub doc_id: String,
    adj: Array2<f64>,
    features: Option<FeatureMatrix>,
    edge_count: usize,
}

impl PreparedGraph {
    pub fn new(graph: &DocumentGraph, features: Option<FeatureMatrix>) -> Result<Self, TrainError> {
        if let Some(f) = &features {
            if f.rows() != graph.node_count() {
                return Err(TrainError::Config(format!(
                    "{}: {} feature rows for {} nodes",
                    graph.doc_id,
                    f.rows(),
                    graph.node_count()
                )));
            }
        }
        Ok(PreparedGraph {
            doc_id: graph.doc_id.clone(),
            adj: normalize_adjacency(graph),
            features,
            edge_count: graph.edges.len(),
        })
    }

    pub fn is_usable(&self) -> bool {
        self.edge_count > 0 && self.features.is_some()
    }

    pub fn embed(&self, weights: &EncoderWeights) -> Result<GraphEmbedding, TrainError> {
        let features = self.features.as_ref().ok_or_else(|| TrainError::MissingGraph(self.doc_id.clone()))?;
        Ok(forward(weights, &self.adj, features)?.0)
    }
}

/// Featurize every graph. Graphs without nodes are kept but unusable.
pub fn prepare_graphs(
    graphs: &[DocumentGraph],
    provider: &dyn EmbeddingProvider,
) -> Result<BTreeMap<String, PreparedGraph>, TrainError> {
    let mut out = BTreeMap::new();
    for g in graphs {
        let features = if g.nodes.is_empty() {
            None
        } else {
            Some(featurize_graph(provider, g)?)
        };
        out.insert(g.doc_id.clone(), PreparedGraph::new(g, features)?);
    }
    Ok(out)
}

pub fn embed_document(weights: &EncoderWeights, graph: &PreparedGraph) -> Result<GraphEmbedding, TrainError> {
    graph.embed(weights)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub weights: EncoderWeights,
    pub history: Vec<EpochLoss>,
    pub excluded_pairs: usize,
}

pub struct Trainer {
    encoder: EncoderConfig,
    config: TrainConfig,
    weights: EncoderWeights,
    optimizer: AdamState,
    epochs_completed: usize,
    history: Vec<EpochLoss>,
}

type Graphs = BTreeMap<String, PreparedGraph>;

fn lookup<'a>(graphs: &'a Graphs, id: &str) -> Result<&'a PreparedGraph, TrainError> {
    graphs.get(id).ok_or_else(|| TrainError::MissingGraph(id.to_string()))
}

fn with_pair<T>(pair: &PairSample, r: Result<T, TrainError>) -> Result<T, TrainError> {
    r.map_err(|e| TrainError::Pair {
        doc_a: pair.doc_a.clone(),
        doc_b: pair.doc_b.clone(),
        source: Box::new(e),
    })
}

/// Keep pairs whose graphs are both usable. Unknown documents are errors.
fn usable_pairs<'a>(graphs: &Graphs, pairs: &'a [PairSample]) -> Result<(Vec<&'a PairSample>, usize), TrainError> {
    let mut kept = Vec::with_capacity(pairs.len());
    for p in pairs {
        let ok = lookup(graphs, &p.doc_a)?.is_usable() && lookup(graphs, &p.doc_b)?.is_usable();
        if ok {
            kept.push(p);
        }
    }
    let excluded = pairs.len() - kept.len();
    Ok((kept, excluded))
}

impl Trainer {
    pub fn new(encoder: EncoderConfig, config: TrainConfig) -> Result<Self, TrainError> {
        config.validate()?;
        let weights = init_weights(&encoder)?;
        let optimizer = AdamState::new(&weights);
        Ok(Trainer {
            encoder,
            config,
            weights,
            optimizer,
            epochs_completed: 0,
            history: Vec::new(),
        })
    }

    pub fn from_checkpoint(ckpt: Checkpoint) -> Result<Self, TrainError> {
        ckpt.train.validate()?;
        ckpt.encoder.validate()?;
        Ok(Trainer {
            encoder: ckpt.encoder,
            config: ckpt.train,
            weights: ckpt.weights,
            optimizer: ckpt.optimizer,
            epochs_completed: ckpt.epochs_completed,
            history: ckpt.history,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(
            self.encoder,
            self.config,
            self.epochs_completed,
            self.weights.clone(),
            self.optimizer.clone(),
            self.history.clone(),
        )
    }

    pub fn weights(&self) -> &EncoderWeights {
        &self.weights
    }

    pub fn history(&self) -> &[EpochLoss] {
        &self.history
    }

    pub fn epochs_completed(&self) -> usize {
        self.epochs_completed
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    fn pair_gradient(&self, graphs: &Graphs, pair: &PairSample) -> Result<(f64, EncoderWeights), TrainError> {
        let ga = lookup(graphs, &pair.doc_a)?;
        let gb = lookup(graphs, &pair.doc_b)?;
        let missing = |g: &PreparedGraph| TrainError::MissingGraph(g.doc_id.clone());
        let fa = ga.features.as_ref().ok_or_else(|| missing(ga))?;
        let fb = gb.features.as_ref().ok_or_else(|| missing(gb))?;
        let (ea, ca) = forward(&self.weights, &ga.adj, fa)?;
        let (eb, cb) = forward(&self.weights, &gb.adj, fb)?;
        let l = cosine_embedding_loss(ea.as_slice(), eb.as_slice(), pair.label, self.config.margin)?;
        // Both siamese branches share weights, so their gradients add.
        let mut grad = backward(&self.weights, &ca, &l.grad_a)?;
        grad.add_assign(&backward(&self.weights, &cb, &l.grad_b)?);
        Ok((l.loss, grad))
    }

    fn pair_loss(&self, graphs: &Graphs, pair: &PairSample) -> Result<f64, TrainError> {
        let ea = lookup(graphs, &pair.doc_a)?.embed(&self.weights)?;
        let eb = lookup(graphs, &pair.doc_b)?.embed(&self.weights)?;
        Ok(cosine_embedding_loss(ea.as_slice(), eb.as_slice(), pair.label, self.config.margin)?.loss)
    }

    fn apply(&mut self, mut grad: EncoderWeights, batch_len: usize) -> Result<(), TrainError> {
        let scale = 1.0 / batch_len as f64;
        let wd = self.config.weight_decay;
        for (g, w) in grad.tensors_mut().into_iter().zip(self.weights.tensors()) {
            for (gi, wi) in g.iter_mut().zip(w) {
                *gi = *gi * scale + wd * wi;
            }
        }
        adam_step(&mut self.weights, &grad, &mut self.optimizer, &self.config.adam())
    }

    /// Run one epoch; the visiting order depends only on the seed and the
    /// epoch index, so a resumed run replays the same sequence.
    fn epoch(&mut self, graphs: &Graphs, train: &[&PairSample], test: &[&PairSample]) -> Result<EpochLoss, TrainError> {
        let epoch = self.epochs_completed + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(epoch as u64);
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut rng);

        let mut total = 0.0;
        for batch in order.chunks(self.config.batch_size) {
            let mut acc: Option<EncoderWeights> = None;
            for &i in batch {
                let pair = train[i];
                let (loss, grad) = with_pair(pair, self.pair_gradient(graphs, pair))?;
                total += loss;
                match acc.as_mut() {
                    Some(a) => a.add_assign(&grad),
                    None => acc = Some(grad),
                }
            }
            let grad = acc.expect("non-empty batch");
            self.apply(grad, batch.len()).map_err(|e| match batch {
                [i] => TrainError::Pair {
                    doc_a: train[*i].doc_a.clone(),
                    doc_b: train[*i].doc_b.clone(),
                    source: Box::new(e),
                },
                _ => e,
            })?;
        }
        let test_loss = if test.is_empty() {
            None
        } else {
            let mut sum = 0.0;
            for p in test {
                sum += with_pair(p, self.pair_loss(graphs, p))?;
            }
            Some(sum / test.len() as f64)
        };
        self.epochs_completed = epoch;
        let record = EpochLoss {
            epoch,
            train_loss: total / train.len() as f64,
            test_loss,
        };
        self.history.push(record.clone());
        Ok(record)
    }

    /// Train for `epochs` more epochs, calling `on_checkpoint` every
    /// `checkpoint_every` epochs and once at the end.
    pub fn run_epochs(
        &mut self,
        graphs: &Graphs,
        train: &[PairSample],
        test: &[PairSample],
        epochs: usize,
        on_checkpoint: &mut dyn FnMut(&Checkpoint) -> Result<(), TrainError>,
    ) -> Result<usize, TrainError> {
        let (train, excluded_train) = usable_pairs(graphs, train)?;
        let (test, excluded_test) = usable_pairs(graphs, test)?;
        let excluded = excluded_train + excluded_test;
        if excluded > 0 {
            log::warn!("excluded {excluded} pairs touching empty graphs");
        }
        if train.is_empty() {
            return Err(TrainError::EmptyTrainSet);
        }
        let mut last_saved = None;
        for _ in 0..epochs {
            let rec = self.epoch(graphs, &train, &test)?;
            log::info!(
                "epoch {} train_loss {:.6} test_loss {}",
                rec.epoch,
                rec.train_loss,
                rec.test_loss.map_or("-".to_string(), |t| format!("{t:.6}"))
            );
            let every = self.config.checkpoint_every;
            if every > 0 && self.epochs_completed.is_multiple_of(every) {
                on_checkpoint(&self.checkpoint())?;
                last_saved = Some(self.epochs_completed);
            }
        }
        if last_saved != Some(self.epochs_completed) {
            on_checkpoint(&self.checkpoint())?;
        }
        Ok(excluded)
    }
}

/// Train from scratch for `config.epochs` epochs.
pub fn train(
    encoder: EncoderConfig,
    config: TrainConfig,
    graphs: &Graphs,
    train: &[PairSample],
    test: &[PairSample],
) -> Result<TrainOutcome, TrainError> {
    let mut trainer = Trainer::new(encoder, config)?;
    let excluded_pairs = trainer.run_epochs(graphs, train, test, config.epochs, &mut |_| Ok(()))?;
    Ok(TrainOutcome {
        weights: trainer.weights,
        history: trainer.history,
        excluded_pairs,
    })
}

pub fn write_loss_csv(path: &Path, history: &[EpochLoss]) -> Result<(), TrainError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| TrainError::file(path, e))?;
    w.write_record(["epoch", "train_loss", "test_loss"]).map_err(|e| TrainError::file(path, e))?;
    for h in history {
        let test = h.test_loss.map(|t| t.to_string()).unwrap_or_default();
        w.write_record([h.epoch.to_string(), h.train_loss.to_string(), test])
            .map_err(|e| TrainError::file(path, e))?;
    }
    w.flush().map_err(|e| TrainError::file(path, e))
}

pub fn read_loss_csv(path: &Path) -> Result<Vec<EpochLoss>, TrainError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| TrainError::file(path, e))?;
    r.deserialize()
        .map(|rec| rec.map_err(|e| TrainError::file(path, e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::HashEmbedder;
    use crate::synthetic::{generate, SyntheticConfig};
    use crate::training::{sample_pairs, split_pairs, PairLabel};

    struct Fixture {
        graphs: Graphs,
        train: Vec<PairSample>,
        test: Vec<PairSample>,
    }

    fn fixture() -> Fixture {
        let data = generate(&SyntheticConfig {
            documents: 16,
            motifs: 4,
            ..Default::default()
        });
        let pairs = sample_pairs(&data.corpus, 10, 16, 3).unwrap().pairs;
        let (train, test) = split_pairs(&pairs, 0.8, 3).unwrap();
        let graphs = prepare_graphs(&data.graphs, &HashEmbedder::new(16, 1)).unwrap();
        Fixture { graphs, train, test }
    }

    fn encoder() -> EncoderConfig {
        EncoderConfig::new(16, 12, 6, 5)
    }

    fn config(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            seed: 9,
            checkpoint_every: 0,
            ..Default::default()
        }
    }

    #[test]
    fn zero_epochs_keeps_initial_weights() {
        let f = fixture();
        let mut t = Trainer::new(encoder(), config(1)).unwrap();
        let init = init_weights(&encoder()).unwrap();
        t.run_epochs(&f.graphs, &f.train, &f.test, 0, &mut |_| Ok(())).unwrap();
        assert_eq!(t.weights(), &init);
        assert!(t.history().is_empty());
    }

    #[test]
    fn history_length_and_nonnegative_losses() {
        let f = fixture();
        let out = train(encoder(), config(3), &f.graphs, &f.train, &f.test).unwrap();
        assert_eq!(out.history.len(), 3);
        assert_eq!(out.history.iter().map(|h| h.epoch).collect::<Vec<_>>(), vec![1, 2, 3]);
        for h in &out.history {
            assert!(h.train_loss >= 0.0 && h.test_loss.unwrap() >= 0.0);
        }
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let f = fixture();
        let run = || {
            let mut t = Trainer::new(encoder(), config(3)).unwrap();
            t.run_epochs(&f.graphs, &f.train, &f.test, 3, &mut |_| Ok(())).unwrap();
            serde_json::to_string(&t.checkpoint()).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn resume_equals_uninterrupted() {
        let f = fixture();
        let mut straight = Trainer::new(encoder(), config(4)).unwrap();
        straight.run_epochs(&f.graphs, &f.train, &f.test, 4, &mut |_| Ok(())).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        let mut first = Trainer::new(encoder(), config(4)).unwrap();
        first.run_epochs(&f.graphs, &f.train, &f.test, 2, &mut |c| c.save(&path)).unwrap();
        drop(first);
        let mut resumed = Trainer::from_checkpoint(Checkpoint::load(&path).unwrap()).unwrap();
        assert_eq!(resumed.epochs_completed(), 2);
        resumed.run_epochs(&f.graphs, &f.train, &f.test, 2, &mut |_| Ok(())).unwrap();
        assert_eq!(
            serde_json::to_string(&resumed.checkpoint()).unwrap(),
            serde_json::to_string(&straight.checkpoint()).unwrap()
        );
    }

    #[test]
    fn checkpoint_cadence() {
        let f = fixture();
        let mut cfg = config(5);
        cfg.checkpoint_every = 2;
        let mut t = Trainer::new(encoder(), cfg).unwrap();
        let mut seen = Vec::new();
        t.run_epochs(&f.graphs, &f.train, &f.test, 5, &mut |c| {
            seen.push(c.epochs_completed);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, vec![2, 4, 5]);
    }

    #[test]
    fn empty_graph_pairs_are_excluded() {
        let mut f = fixture();
        let hollow = DocumentGraph {
            doc_id: "hollow".into(),
            nodes: vec!["lonely".into()],
            edges: vec![],
        };
        let feats = featurize_graph(&HashEmbedder::new(16, 1), &hollow).unwrap();
        f.graphs.insert("hollow".into(), PreparedGraph::new(&hollow, Some(feats)).unwrap());
        f.graphs.insert("void".into(), PreparedGraph::new(&DocumentGraph::empty("void"), None).unwrap());
        let other = f.train[0].doc_a.clone();
        f.train.push(PairSample::new("hollow", &other, PairLabel::Negative, "s").unwrap());
        f.test.push(PairSample::new("void", &other, PairLabel::Negative, "s").unwrap());
        let out = train(encoder(), config(1), &f.graphs, &f.train, &f.test).unwrap();
        assert_eq!(out.excluded_pairs, 2);
    }

    #[test]
    fn unknown_document_and_empty_train_set() {
        let f = fixture();
        let ghost = vec![PairSample::new("ghost", &f.train[0].doc_a, PairLabel::Positive, "s").unwrap()];
        assert!(matches!(
            train(encoder(), config(1), &f.graphs, &ghost, &[]),
            Err(TrainError::MissingGraph(id)) if id == "ghost"
        ));
        assert!(matches!(train(encoder(), config(1), &f.graphs, &[], &f.test), Err(TrainError::EmptyTrainSet)));
    }

    #[test]
    fn config_validation() {
        for bad in [
            TrainConfig { margin: 1.0, ..Default::default() },
            TrainConfig { margin: 0.0, ..Default::default() },
            TrainConfig { train_fraction: 1.0, ..Default::default() },
            TrainConfig { epochs: 0, ..Default::default() },
            TrainConfig { learning_rate: 0.0, ..Default::default() },
            TrainConfig { batch_size: 0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
        assert!(TrainConfig::default().validate().is_ok());
    }

    fn pair_cosine(t: &Trainer, graphs: &Graphs, p: &PairSample) -> f64 {
        let a = graphs[&p.doc_a].embed(t.weights()).unwrap();
        let b = graphs[&p.doc_b].embed(t.weights()).unwrap();
        crate::training::cosine_similarity(a.as_slice(), b.as_slice()).unwrap()
    }

    /// A tiny plain gradient step must move the cosine the right way.
    #[test]
    fn gradient_direction() {
        let f = fixture();
        let mut t = Trainer::new(encoder(), config(1)).unwrap();
        for label in [PairLabel::Positive, PairLabel::Negative] {
            let base = f.train.iter().find(|p| p.label == label).unwrap();
            let mut pair = base.clone();
            pair.label = label;
            let before = pair_cosine(&t, &f.graphs, &pair);
            if label == PairLabel::Negative {
                assert!(before > t.config.margin, "negative pair must be unclamped for this check");
            }
            let (_, grad) = t.pair_gradient(&f.graphs, &pair).unwrap();
            let eta = 1e-6;
            let norm2: f64 = grad.tensors().iter().flat_map(|g| g.iter()).map(|g| g * g).sum();
            let saved = t.weights.clone();
            for (w, g) in t.weights.tensors_mut().into_iter().zip(grad.tensors()) {
                for (wi, gi) in w.iter_mut().zip(g) {
                    *wi -= eta * gi;
                }
            }
            let after = pair_cosine(&t, &f.graphs, &pair);
            // First order: loss drops by eta * |g|^2.
            let expected = eta * norm2;
            match label {
                PairLabel::Positive => assert!(after - before >= 0.0 && (after - before - expected).abs() < 0.1 * expected),
                PairLabel::Negative => assert!(before - after >= 0.0 && (before - after - expected).abs() < 0.1 * expected),
            }
            t.weights = saved;
        }
    }
}

//! Library-level pipeline: synthetic corpus through pairs, training and
//! report, twice with the same seed.

use kginfluence::baselines::Method;
use kginfluence::encoder::EncoderConfig;
use kginfluence::evaluation::{build_report, ScoredPairs};
use kginfluence::features::HashEmbedder;
use kginfluence::synthetic::{generate, SyntheticConfig};
use kginfluence::training::{
    cosine_similarity, embed_document, prepare_graphs, sample_pairs, split_pairs, train, TrainConfig,
};

fn run(seed: u64) -> (Vec<f64>, f64) {
    let data = generate(&SyntheticConfig {
        documents: 60,
        seed,
        ..SyntheticConfig::default()
    });
    let pairs = sample_pairs(&data.corpus, 30, 45, seed).unwrap().pairs;
    let (tr, te) = split_pairs(&pairs, 0.8, seed).unwrap();
    let graphs = prepare_graphs(&data.graphs, &HashEmbedder::new(16, seed)).unwrap();
    let cfg = TrainConfig {
        epochs: 5,
        seed,
        ..TrainConfig::default()
    };
    let out = train(EncoderConfig::new(16, 16, 8, seed), cfg, &graphs, &tr, &te).unwrap();
    let mut scored = ScoredPairs::new(Method::KnowledgeGraph.name());
    for p in &te {
        let a = embed_document(&out.weights, &graphs[&p.doc_a]).unwrap();
        let b = embed_document(&out.weights, &graphs[&p.doc_b]).unwrap();
        scored.push(p.key(), p.label, cosine_similarity(a.as_slice(), b.as_slice()).unwrap());
    }
    let report = build_report(&[scored]).unwrap();
    (out.history.iter().map(|h| h.train_loss).collect(), report.methods[0].auc)
}

#[test]
fn same_seed_same_results() {
    let (loss_a, auc_a) = run(4);
    let (loss_b, auc_b) = run(4);
    assert_eq!(loss_a.len(), 5);
    assert_eq!(loss_a, loss_b);
    assert_eq!(auc_a, auc_b);
}

#[test]
fn different_seed_changes_training() {
    assert_ne!(run(4).0, run(5).0);
}

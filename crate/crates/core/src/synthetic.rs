//! Planted-motif benchmark data.
//!
//! Every document carries one "concept motif": a small fixed subgraph with
//! shared node labels and edges, padded with document-specific noise nodes.
//! Documents with the same motif cite each other and nothing else, so the
//! citation-derived positive pairs are exactly the same-motif pairs.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document};
use crate::kgx::{assemble_graph, DocumentGraph, Triple};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub documents: usize,
    pub motifs: usize,
    pub motif_nodes: usize,
    /// Extra edges per motif beyond its spanning chain.
    pub motif_extra_edges: usize,
    pub noise_nodes: usize,
    pub subjects: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            documents: 120,
            motifs: 20,
            motif_nodes: 5,
            motif_extra_edges: 2,
            noise_nodes: 3,
            subjects: 2,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub corpus: Corpus,
    pub triples: BTreeMap<String, Vec<Triple>>,
    pub graphs: Vec<DocumentGraph>,
    pub motif_of: BTreeMap<String, usize>,
}

const RELATIONS: [&str; 6] = ["supports", "causes", "reduces", "depends on", "contradicts", "measures"];
const SYLLABLES: [&str; 16] = [
    "ka", "lo", "re", "nu", "ti", "sa", "mor", "vel", "dan", "pri", "ost", "lum", "ber", "ca", "fen", "gri",
];

fn word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(2..=3);
    (0..n).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect()
}

fn motif(rng: &mut ChaCha8Rng, m: usize, cfg: &SyntheticConfig) -> Vec<Triple> {
    let labels: Vec<String> = (0..cfg.motif_nodes)
        .map(|j| format!("{} {} m{m}c{j}", word(rng), word(rng)))
        .collect();
    let rel = |rng: &mut ChaCha8Rng| *RELATIONS.choose(rng).expect("non-empty");
    let mut out: Vec<Triple> = labels.windows(2).map(|w| Triple::new(&w[0], rel(rng), &w[1])).collect();
    if labels.len() > 2 {
        for _ in 0..cfg.motif_extra_edges {
            let a = rng.random_range(0..labels.len());
            let b = (a + rng.random_range(2..labels.len())) % labels.len();
            out.push(Triple::new(&labels[a], rel(rng), &labels[b]));
        }
    }
    out
}

fn render_text(triples: &[Triple]) -> String {
    triples
        .iter()
        .map(|t| format!("We find that {} {} {}.", t.head, t.relation, t.tail))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn generate(cfg: &SyntheticConfig) -> SyntheticDataset {
    assert!(cfg.motifs > 0 && cfg.subjects > 0 && cfg.motif_nodes > 0, "degenerate synthetic config");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let motifs: Vec<Vec<Triple>> = (0..cfg.motifs).map(|m| motif(&mut rng, m, cfg)).collect();
    let motif_labels: Vec<Vec<String>> = motifs
        .iter()
        .map(|ts| {
            let mut v: Vec<String> = ts.iter().flat_map(|t| [t.head.clone(), t.tail.clone()]).collect();
            v.sort();
            v.dedup();
            v
        })
        .collect();

    let mut docs = Vec::new();
    let mut triples = BTreeMap::new();
    let mut motif_of = BTreeMap::new();
    let mut by_motif: Vec<Vec<String>> = vec![Vec::new(); cfg.motifs];
    for i in 0..cfg.documents {
        let m = i % cfg.motifs;
        let id = format!("syn{i:04}");
        let mut ts = motifs[m].clone();
        for j in 0..cfg.noise_nodes {
            let noise = format!("{} detail {id}n{j}", word(&mut rng));
            let anchor = motif_labels[m].choose(&mut rng).expect("non-empty motif");
            let rel = *RELATIONS.choose(&mut rng).expect("non-empty");
            ts.push(Triple::new(anchor, rel, &noise));
        }
        let subject = format!("subject {}", m % cfg.subjects);
        let doc = Document::new(&id, subject, render_text(&ts)).citing(by_motif[m].iter().cloned());
        by_motif[m].push(id.clone());
        docs.push(doc);
        motif_of.insert(id.clone(), m);
        triples.insert(id, ts);
    }
    let corpus = Corpus::from_documents(docs).expect("generated corpus is valid");
    let graphs = triples.iter().map(|(id, ts)| assemble_graph(id, std::slice::from_ref(ts))).collect();
    SyntheticDataset {
        corpus,
        triples,
        graphs,
        motif_of,
    }
}

impl SyntheticDataset {
    /// Write one `<doc_id>.triples` sidecar per document for the mock extractor.
    pub fn write_sidecars(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (id, ts) in &self.triples {
            let body: String = ts
                .iter()
                .map(|t| format!("{}|{}|{}\n", t.head, t.relation, t.tail))
                .collect();
            std::fs::write(dir.join(format!("{id}.triples")), body)?;
        }
        Ok(())
    }
}

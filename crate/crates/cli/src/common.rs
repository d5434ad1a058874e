use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::{Context, Result};
use kginfluence::features::{CachedProvider, EmbeddingProvider, HashEmbedder, ServiceEmbedder};
use kginfluence::kgx::{read_graphs, DocumentGraph};
use kginfluence::training::{prepare_graphs, read_pairs, split_pairs, PairSample, PreparedGraph};

use crate::config::{ProviderKind, RunConfig};

pub type Provider = CachedProvider<Box<dyn EmbeddingProvider>>;

pub const EMBEDDING_CACHE: &str = "embeddings.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// Hash features are memoized in memory; service features also on disk.
pub fn make_provider(cfg: &RunConfig) -> Result<Provider> {
    Ok(match cfg.features.provider {
        ProviderKind::Hash => CachedProvider::in_memory(Box::new(HashEmbedder::new(cfg.features.dim, cfg.seed)) as Box<dyn EmbeddingProvider>),
        ProviderKind::Service => {
            let dir = &cfg.paths.cache_dir;
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            CachedProvider::with_disk(
                Box::new(ServiceEmbedder::new(&cfg.features.service)) as Box<dyn EmbeddingProvider>,
                &dir.join(EMBEDDING_CACHE),
            )?
        }
    })
}

pub fn load_graphs(path: &Path) -> Result<Vec<DocumentGraph>> {
    if !path.exists() {
        anyhow::bail!("graphs file {} not found (run `extract` first)", path.display());
    }
    Ok(read_graphs(path)?)
}

pub fn load_pairs(path: &Path) -> Result<Vec<PairSample>> {
    if !path.exists() {
        anyhow::bail!("pairs file {} not found (run `sample-pairs` first)", path.display());
    }
    Ok(read_pairs(path)?)
}

pub fn split(cfg: &RunConfig, pairs: &[PairSample]) -> Result<(Vec<PairSample>, Vec<PairSample>)> {
    Ok(split_pairs(pairs, cfg.train.train_fraction, cfg.seed)?)
}

/// Featurize only the graphs some pair refers to.
pub fn prepare_for(
    graphs: &[DocumentGraph],
    pairs: &[&[PairSample]],
    provider: &Provider,
) -> Result<BTreeMap<String, PreparedGraph>> {
    let needed: BTreeSet<&str> = pairs
        .iter()
        .flat_map(|ps| ps.iter())
        .flat_map(|p| [p.doc_a.as_str(), p.doc_b.as_str()])
        .collect();
    let selected: Vec<DocumentGraph> = graphs.iter().filter(|g| needed.contains(g.doc_id.as_str())).cloned().collect();
    Ok(prepare_graphs(&selected, provider)?)
}

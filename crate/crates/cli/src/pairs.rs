use anyhow::Result;
use kginfluence::corpus::load_corpus;
use kginfluence::training::{sample_pairs, write_pairs};

use crate::config::{parent_dir, RunConfig};

pub fn run(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(&cfg.paths.corpus_dir)?;
    let (n_pos, n_neg) = (cfg.sampling.n_positive, cfg.n_negative());
    let s = sample_pairs(&corpus, n_pos, n_neg, cfg.seed)?;
    if s.positive_shortfall + s.negative_shortfall > 0 {
        eprintln!(
            "warning: shortfall of {} positive and {} negative pairs",
            s.positive_shortfall, s.negative_shortfall
        );
    }
    let dir = parent_dir(&cfg.paths.pairs_file);
    std::fs::create_dir_all(&dir)?;
    write_pairs(&cfg.paths.pairs_file, &s.pairs)?;
    cfg.echo_into(&dir)?;
    let positives = s.pairs.iter().filter(|p| p.label.is_positive()).count();
    println!(
        "wrote {} pairs ({} positive, {} negative) to {}",
        s.pairs.len(),
        positives,
        s.pairs.len() - positives,
        cfg.paths.pairs_file.display()
    );
    Ok(())
}

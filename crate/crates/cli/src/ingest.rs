use std::collections::BTreeSet;

use anyhow::{Context, Result};
use kginfluence::corpus::{fetch_subject, save_corpus, Corpus, ScholarlyClient};

use crate::config::RunConfig;

pub fn run(cfg: &RunConfig) -> Result<()> {
    let client = ScholarlyClient::new(&cfg.ingest.source);
    if cfg.ingest.subjects.is_empty() {
        log::warn!("no subjects configured");
    }
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for subject in &cfg.ingest.subjects {
        let fetched = fetch_subject(&client, subject, cfg.ingest.limit_per_subject)
            .with_context(|| format!("fetching subject {subject:?}"))?;
        if fetched.is_empty() {
            log::warn!("subject {subject:?} returned no documents with text");
        }
        for d in fetched {
            if seen.insert(d.id.clone()) {
                docs.push(d);
            } else {
                log::warn!("document {} already ingested under another subject; keeping the first", d.id);
            }
        }
    }
    if docs.is_empty() {
        log::warn!("writing an empty corpus store");
    }
    let corpus = Corpus::from_documents(docs)?;
    let dir = &cfg.paths.corpus_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    save_corpus(&corpus, dir)?;
    cfg.echo_into(dir)?;
    println!("ingested {} documents into {}", corpus.len(), dir.display());
    for (subject, n) in corpus.subject_counts() {
        println!("  {subject}: {n}");
    }
    Ok(())
}

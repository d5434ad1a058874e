use std::collections::BTreeSet;

use anyhow::{bail, Context, Result};
use kginfluence::corpus::{load_corpus, Document};
use kginfluence::kgx::{
    append_graphs, assemble_graph, extract_document, mock_extract, read_graphs, DocumentGraph, HttpLlmClient,
    PromptTemplate,
};
use rayon::prelude::*;

use crate::config::{parent_dir, RunConfig};

/// Documents per batch appended to the store; bounds lost work on a crash.
const BATCH: usize = 32;

enum Extractor {
    Mock,
    Llm(HttpLlmClient, PromptTemplate),
}

fn extract_one(cfg: &RunConfig, ex: &Extractor, doc: &Document) -> Result<DocumentGraph> {
    match ex {
        Extractor::Mock => {
            let sidecar = cfg.extract.sidecar_dir.join(format!("{}.triples", doc.id));
            let triples = mock_extract(&doc.text, &sidecar)?;
            Ok(assemble_graph(&doc.id, &[triples]))
        }
        Extractor::Llm(client, template) => {
            let retry = cfg.extract.llm.retry_policy();
            let out = extract_document(
                client,
                &doc.id,
                &doc.text,
                template,
                cfg.extract.chunk_size,
                cfg.extract.overlap,
                &retry,
            )?;
            if out.warnings > 0 {
                log::warn!("{}: {} malformed triples dropped", doc.id, out.warnings);
            }
            Ok(out.graph)
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(&cfg.paths.corpus_dir)?;
    let store = &cfg.paths.graphs_file;
    let dir = parent_dir(store);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    cfg.echo_into(&dir)?;
    let done: BTreeSet<String> = if store.exists() {
        read_graphs(store)?.into_iter().map(|g| g.doc_id).collect()
    } else {
        BTreeSet::new()
    };
    let todo: Vec<&Document> = corpus.documents().filter(|d| !done.contains(&d.id)).collect();
    log::info!("skipped: {}", corpus.len() - todo.len());

    let ex = if cfg.extract.mock {
        Extractor::Mock
    } else {
        let template = match &cfg.extract.template {
            Some(p) => PromptTemplate::from_file(p)?,
            None => PromptTemplate::default(),
        };
        Extractor::Llm(HttpLlmClient::new(&cfg.extract.llm), template)
    };

    let (mut written, mut empty) = (0, 0);
    let mut failures = Vec::new();
    for batch in todo.chunks(BATCH) {
        let results: Vec<(&Document, Result<DocumentGraph>)> =
            batch.par_iter().map(|d| (*d, extract_one(cfg, &ex, d))).collect();
        let mut ok = Vec::new();
        for (doc, r) in results {
            match r {
                Ok(g) => {
                    if g.is_flagged_empty() {
                        log::warn!("{}: empty graph", doc.id);
                        empty += 1;
                    }
                    ok.push(g);
                }
                Err(e) => failures.push((doc.id.clone(), e)),
            }
        }
        append_graphs(store, &ok)?;
        written += ok.len();
    }
    println!("extracted {written} graphs ({empty} empty) into {}", store.display());
    if !failures.is_empty() {
        for (id, e) in &failures {
            eprintln!("failed: {id}: {e:#}");
        }
        bail!("{} documents failed extraction", failures.len());
    }
    Ok(())
}

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use kginfluence::baselines::{
    cosine_distance, document_vector, kl_score, text_reuse_score, trim_for_reuse, LdaModel, Method,
};
use kginfluence::corpus::{load_corpus, Corpus};
use kginfluence::evaluation::{
    build_report, read_scores, write_report_csv, write_roc_csv, write_roc_svg, write_scores, EvaluationReport,
};
use kginfluence::training::{cosine_similarity, embed_document, Checkpoint, PairSample};
use rayon::prelude::*;

use crate::common::{load_graphs, load_pairs, make_provider, prepare_for, split, CHECKPOINT_FILE};
use crate::config::RunConfig;
use crate::EvalSplit;

pub const LDA_FILE: &str = "lda.json";
pub const REPORT_FILE: &str = "report.csv";
pub const SVG_FILE: &str = "roc.svg";

pub fn scores_file(method: Method) -> String {
    format!("scores_{}.csv", method.name())
}

fn text<'a>(corpus: &'a Corpus, id: &str) -> Result<&'a str> {
    corpus
        .get(id)
        .map(|d| d.text.as_str())
        .with_context(|| format!("document {id} is in the pair file but not in the corpus"))
}

pub fn run(cfg: &RunConfig, which: EvalSplit, allow_train_eval: bool) -> Result<()> {
    if which != EvalSplit::Test && !allow_train_eval {
        bail!("refusing to score training pairs; pass --allow-train-eval to override");
    }
    let out = &cfg.paths.output_dir;
    let ckpt_path = out.join(CHECKPOINT_FILE);
    if !ckpt_path.exists() {
        bail!("checkpoint {} not found (run `train` first)", ckpt_path.display());
    }
    let ckpt = Checkpoint::load(&ckpt_path)?;
    let corpus = load_corpus(&cfg.paths.corpus_dir)?;
    let graphs = load_graphs(&cfg.paths.graphs_file)?;
    let pairs = load_pairs(&cfg.paths.pairs_file)?;
    let (train, test) = split(cfg, &pairs)?;
    let selected: Vec<PairSample> = match which {
        EvalSplit::Test => test,
        EvalSplit::Train => train,
        EvalSplit::All => pairs,
    };
    let provider = make_provider(cfg)?;
    let prepared = prepare_for(&graphs, &[&selected], &provider)?;

    // Every method is scored on the same pairs, so pairs the KG method
    // cannot embed are dropped for all of them.
    let usable = |id: &str| prepared.get(id).is_some_and(|g| g.is_usable());
    let (eval, dropped): (Vec<PairSample>, Vec<PairSample>) =
        selected.into_iter().partition(|p| usable(&p.doc_a) && usable(&p.doc_b));
    if !dropped.is_empty() {
        log::warn!("excluded {} pairs with an empty or missing graph", dropped.len());
    }
    if eval.is_empty() {
        bail!("no evaluable pairs left");
    }
    cfg.echo_into(out)?;

    let mut embeddings = BTreeMap::new();
    for p in &eval {
        for id in [&p.doc_a, &p.doc_b] {
            if !embeddings.contains_key(id) {
                embeddings.insert(id.clone(), embed_document(&ckpt.weights, &prepared[id])?);
            }
        }
    }
    let kg = eval
        .iter()
        .map(|p| {
            cosine_similarity(embeddings[&p.doc_a].as_slice(), embeddings[&p.doc_b].as_slice())
                .with_context(|| format!("kg score for {}", p.key()))
        })
        .collect::<Result<Vec<_>>>()?;

    let min_ngram = cfg.baselines.min_ngram;
    let reuse = eval
        .par_iter()
        .map(|p| {
            let (a, b) = (text(&corpus, &p.doc_a)?, text(&corpus, &p.doc_b)?);
            let score = if cfg.baselines.trim {
                text_reuse_score(&trim_for_reuse(a), &trim_for_reuse(b), min_ngram).score
            } else {
                text_reuse_score(a, b, min_ngram).score
            };
            Ok(score as f64)
        })
        .collect::<Result<Vec<_>>>()?;

    let texts: Vec<&str> = corpus.documents().map(|d| d.text.as_str()).collect();
    let lda = LdaModel::fit(&texts, cfg.baselines.lda).context("fitting LDA")?;
    lda.save(&out.join(LDA_FILE))?;
    let mut topics = BTreeMap::new();
    let mut doc_vectors = BTreeMap::new();
    for p in &eval {
        for id in [&p.doc_a, &p.doc_b] {
            if !topics.contains_key(id) {
                let t = text(&corpus, id)?;
                topics.insert(id.clone(), lda.infer(t));
                doc_vectors.insert(id.clone(), document_vector(&provider, t)?);
            }
        }
    }
    let lda_scores = eval
        .iter()
        .map(|p| Ok(kl_score(&topics[&p.doc_a], &topics[&p.doc_b], cfg.baselines.kl_direction)?))
        .collect::<Result<Vec<_>>>()?;
    let doc_scores = eval
        .iter()
        .map(|p| Ok(cosine_distance(&doc_vectors[&p.doc_a], &doc_vectors[&p.doc_b])?))
        .collect::<Result<Vec<_>>>()?;

    let raw = [
        (Method::KnowledgeGraph, kg),
        (Method::TextReuse, reuse),
        (Method::Lda, lda_scores),
        (Method::DocEmbedding, doc_scores),
    ];
    for (method, scores) in raw {
        let oriented: Vec<f64> = scores.into_iter().map(|s| method.orient(s)).collect();
        write_scores(&out.join(scores_file(method)), &eval, &oriented)?;
    }
    log::info!("scored {} pairs", eval.len());
    report(cfg)
}

pub fn report(cfg: &RunConfig) -> Result<()> {
    let out = &cfg.paths.output_dir;
    let mut scored = Vec::new();
    for method in Method::ALL {
        let path = out.join(scores_file(method));
        if path.exists() {
            scored.push(read_scores(&path, method.name())?);
        }
    }
    if scored.is_empty() {
        bail!("no score files in {} (run `evaluate` first)", out.display());
    }
    let report = build_report(&scored)?;
    write_report_csv(&out.join(REPORT_FILE), &report)?;
    write_roc_csv(out, &report)?;
    if cfg.evaluate.svg {
        write_roc_svg(&out.join(SVG_FILE), &report)?;
    }
    cfg.echo_into(out)?;
    print_table(&report);
    Ok(())
}

fn print_table(report: &EvaluationReport) {
    println!(
        "{:<14} {:>8} {:>12} {:>8} {:>10} {:>10} {:>10}",
        "method", "auc", "-log10 p", "u", "threshold", "f1", "f1_max"
    );
    for m in &report.methods {
        println!(
            "{:<14} {:>8.4} {:>12.4} {:>8.1} {:>10.4} {:>10.4} {:>10.4}",
            m.method, m.auc, m.rank_sum.neg_log10_p, m.rank_sum.u, m.youden.threshold, m.youden.f1, m.max_f1.f1
        );
    }
}

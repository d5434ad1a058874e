//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Each check compares library output against an
//! oracle computed here, independently of the library code under test.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kginfluence::baselines::{
    doc_embedding_score, kl_score, text_reuse_score, KlDirection, LdaConfig, LdaModel,
};
use kginfluence::corpus::{save_corpus, Corpus, Document};
use kginfluence::encoder::{backward, forward, init_weights, normalize_edges, EncoderConfig, EncoderWeights};
use kginfluence::evaluation::{rank_sum_normal_p, rank_sum_test, roc_curve, ScoredPairs};
use kginfluence::features::{FeatureMatrix, HashEmbedder};
use kginfluence::synthetic::{generate, SyntheticConfig};
use kginfluence::training::{
    cosine_embedding_loss, cosine_similarity, embed_document, negatives_for, prepare_graphs, sample_pairs,
    split_pairs, train, PairLabel, TrainConfig,
};
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> (usize, Vec<(usize, usize)>) {
    let n = rng.random_range(1..=max_nodes);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.5) {
                edges.push((i, j));
            }
        }
    }
    (n, edges)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------- 1

fn gradient_check() -> Check {
    let start = Instant::now();
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for g in 0..20 {
        let cfg = EncoderConfig::new(5, 7, 4, g);
        let mut w = init_weights(&cfg).map_err(|e| e.to_string())?;
        // Non-zero biases so their gradients are exercised away from init.
        w.b1 = Array1::from_shape_fn(7, |_| rng.random_range(-0.3..0.3));
        w.b2 = Array1::from_shape_fn(7, |_| rng.random_range(-0.3..0.3));
        w.b3 = Array1::from_shape_fn(4, |_| rng.random_range(-0.3..0.3));
        let (n, edges) = random_graph(&mut rng, 6);
        let adj = normalize_edges(n, edges);
        let x = FeatureMatrix(random_matrix(&mut rng, n, 5));
        let u: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let objective = |w: &EncoderWeights| dot(forward(w, &adj, &x).unwrap().0.as_slice(), &u);

        let (_, cache) = forward(&w, &adj, &x).map_err(|e| e.to_string())?;
        let analytic = backward(&w, &cache, &u).map_err(|e| e.to_string())?;
        for (t, grad) in analytic.tensors().iter().enumerate() {
            for (i, &a) in grad.iter().enumerate() {
                let mut plus = w.clone();
                plus.tensors_mut()[t][i] += h;
                let mut minus = w.clone();
                minus.tensors_mut()[t][i] -= h;
                let numeric = (objective(&plus) - objective(&minus)) / (2.0 * h);
                let scale = a.abs().max(numeric.abs());
                // Entries that are zero both ways (dead ReLU paths) have no
                // meaningful relative error; require agreement to 1e-9 instead.
                let err = if scale < 1e-9 { 0.0 } else { (a - numeric).abs() / scale };
                if scale < 1e-9 && (a - numeric).abs() > 1e-9 {
                    return Err(format!("graph {g} tensor {t}[{i}]: {a} vs {numeric}"));
                }
                worst = worst.max(err);
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(worst < 1e-4, || format!("max relative error {worst:.3e}"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} entries, max relative error {worst:.2e}, {elapsed:.2?}"))
}

// ---------------------------------------------------------------- 2

fn loss_identities() -> Check {
    let e = [0.3, -1.2, 0.7, 2.0];
    let same = cosine_embedding_loss(&e, &e, PairLabel::Positive, 0.5).map_err(|e| e.to_string())?;
    ensure(same.loss.abs() <= 1e-12, || format!("positive e1=e2 loss {}", same.loss))?;

    let (a, b) = ([1.0, 2.0, 0.0, -1.0], [2.0, -1.0, 5.0, 0.0]);
    ensure(dot(&a, &b) == 0.0, || "fixture vectors not orthogonal".into())?;
    let orth = cosine_embedding_loss(&a, &b, PairLabel::Negative, 0.5).map_err(|e| e.to_string())?;
    ensure(orth.loss.abs() <= 1e-12, || format!("negative orthogonal loss {}", orth.loss))?;
    ensure(
        orth.grad_a.iter().chain(&orth.grad_b).all(|&g| g == 0.0),
        || format!("clamped gradient not zero: {:?} {:?}", orth.grad_a, orth.grad_b),
    )?;

    let neg_same = cosine_embedding_loss(&e, &e, PairLabel::Negative, 0.5).map_err(|e| e.to_string())?;
    ensure((neg_same.loss - 0.5).abs() <= 1e-12, || format!("negative e1=e2 loss {}", neg_same.loss))?;

    // Anything with cos below the margin sits in the clamped regime.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut clamped = 0;
    while clamped < 200 {
        let p: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cos = dot(&p, &q) / (dot(&p, &p).sqrt() * dot(&q, &q).sqrt());
        if cos >= 0.5 {
            continue;
        }
        let r = cosine_embedding_loss(&p, &q, PairLabel::Negative, 0.5).map_err(|e| e.to_string())?;
        ensure(r.loss == 0.0, || format!("clamped loss {}", r.loss))?;
        ensure(r.grad_a.iter().chain(&r.grad_b).all(|&g| g == 0.0), || "clamped gradient not exactly zero".into())?;
        clamped += 1;
    }
    Ok("3 identities to 1e-12; 200 clamped negatives with exactly zero gradient".into())
}

// ---------------------------------------------------------------- 3

fn permutation_invariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = EncoderConfig::new(24, 32, 16, 5);
    let w = init_weights(&cfg).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (n, edges) = random_graph(&mut rng, 12);
        let x = random_matrix(&mut rng, n, 24);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        // New node i is old node perm[i].
        let mut inverse = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let edges_p: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (inverse[a], inverse[b])).collect();
        let x_p = Array2::from_shape_fn((n, 24), |(i, j)| x[[perm[i], j]]);
        let e = forward(&w, &normalize_edges(n, edges), &FeatureMatrix(x)).map_err(|e| e.to_string())?.0;
        let e_p = forward(&w, &normalize_edges(n, edges_p), &FeatureMatrix(x_p)).map_err(|e| e.to_string())?.0;
        for (a, b) in e.as_slice().iter().zip(e_p.as_slice()) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst < 1e-9, || format!("max L-inf change {worst:.3e}"))?;
    Ok(format!("100 graphs, max L-inf change {worst:.2e}"))
}

// ---------------------------------------------------------------- 4

fn pairwise_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for p in pos {
        for q in neg {
            wins += if p > q {
                1.0
            } else if p == q {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

/// U of the first `n1` entries of `pooled` via pairwise comparison.
fn u_of(first: &[f64], second: &[f64]) -> f64 {
    pairwise_auc(first, second) * (first.len() * second.len()) as f64
}

/// P(U >= observed) over every split of the pooled sample into groups of
/// the observed sizes.
fn exact_enumeration_p(pos: &[f64], neg: &[f64]) -> f64 {
    let pooled: Vec<f64> = pos.iter().chain(neg).copied().collect();
    let n = pooled.len();
    let observed = u_of(pos, neg);
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != pos.len() {
            continue;
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (i, &v) in pooled.iter().enumerate() {
            if mask & (1 << i) != 0 { a.push(v) } else { b.push(v) }
        }
        total += 1;
        if u_of(&a, &b) >= observed - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

fn random_scores(rng: &mut ChaCha8Rng, n: usize, shift: f64, tied: bool) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let v: f64 = rng.random_range(0.0..1.0) + shift;
            if tied {
                (v * 5.0).round()
            } else {
                v
            }
        })
        .collect()
}

fn statistics_oracles() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    let mut auc_worst: f64 = 0.0;
    for k in 0..1000 {
        let (n1, n2) = (rng.random_range(1..40), rng.random_range(1..40));
        let tied = k % 2 == 0;
        let pos = random_scores(&mut rng, n1, 0.2, tied);
        let neg = random_scores(&mut rng, n2, 0.0, tied);
        let (_, auc) = roc_curve(&ScoredPairs::from_groups("m", &pos, &neg)).map_err(|e| e.to_string())?;
        auc_worst = auc_worst.max((auc - pairwise_auc(&pos, &neg)).abs());
    }
    ensure(auc_worst <= 1e-12, || format!("AUC trapezoid vs pairwise differ by {auc_worst:.3e}"))?;

    let mut exact_worst: f64 = 0.0;
    let mut cases = 0;
    for n1 in 1..=8 {
        for n2 in 1..=8 {
            for rep in 0..3 {
                let tied = rep == 2;
                let pos = random_scores(&mut rng, n1, 0.3, tied);
                let neg = random_scores(&mut rng, n2, 0.0, tied);
                if pos.iter().chain(&neg).all(|&v| v == pos[0]) {
                    continue;
                }
                let p = rank_sum_test(&pos, &neg).map_err(|e| e.to_string())?.p;
                exact_worst = exact_worst.max((p - exact_enumeration_p(&pos, &neg)).abs());
                cases += 1;
            }
        }
    }
    ensure(exact_worst <= 0.01, || format!("rank-sum vs exact enumeration differ by {exact_worst:.4}"))?;

    let mut perm_worst: f64 = 0.0;
    let draws = 100_000;
    for (i, shift) in [0.0, 0.1, 0.2, 0.35].into_iter().enumerate() {
        let pos = random_scores(&mut rng, 15, shift, false);
        let neg = random_scores(&mut rng, 15, 0.0, false);
        let observed = u_of(&pos, &neg);
        let mut pooled: Vec<f64> = pos.iter().chain(&neg).copied().collect();
        let mut perm_rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let mut hits = 0;
        for _ in 0..draws {
            pooled.shuffle(&mut perm_rng);
            if u_of(&pooled[..15], &pooled[15..]) >= observed - 1e-9 {
                hits += 1;
            }
        }
        let p_perm = hits as f64 / draws as f64;
        let p = rank_sum_test(&pos, &neg).map_err(|e| e.to_string())?.p;
        let (p_normal, _) = rank_sum_normal_p(&pos, &neg).ok_or("normal path unavailable")?;
        perm_worst = perm_worst.max((p - p_perm).abs()).max((p_normal - p_perm).abs());
    }
    ensure(perm_worst <= 0.01, || format!("rank-sum vs permutation test differ by {perm_worst:.4}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "AUC diff {auc_worst:.1e}; exact diff {exact_worst:.1e} over {cases} cases; permutation diff {perm_worst:.4}; {elapsed:.2?}"
    ))
}

// ---------------------------------------------------------------- 5

fn synthetic_benchmark() -> Check {
    let start = Instant::now();
    let seed = 0;
    let data = generate(&SyntheticConfig {
        seed,
        ..SyntheticConfig::default()
    });
    let sampled = sample_pairs(&data.corpus, 97, 153, seed).map_err(|e| e.to_string())?;
    let (train_pairs, test_pairs) = split_pairs(&sampled.pairs, 0.8, seed).map_err(|e| e.to_string())?;
    ensure(train_pairs.len() == 200 && test_pairs.len() == 50, || {
        format!("split {} / {}", train_pairs.len(), test_pairs.len())
    })?;
    let provider = HashEmbedder::new(64, seed);
    let graphs = prepare_graphs(&data.graphs, &provider).map_err(|e| e.to_string())?;
    let config = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    ensure(
        config.margin == 0.5 && config.learning_rate == 0.05 && config.epochs == 80 && config.train_fraction == 0.8,
        || "defaults are not the reference hyperparameters".into(),
    )?;
    let outcome = train(EncoderConfig::new(64, 64, 32, seed), config, &graphs, &train_pairs, &test_pairs)
        .map_err(|e| e.to_string())?;

    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for p in &test_pairs {
        let a = embed_document(&outcome.weights, &graphs[&p.doc_a]).map_err(|e| e.to_string())?;
        let b = embed_document(&outcome.weights, &graphs[&p.doc_b]).map_err(|e| e.to_string())?;
        let s = cosine_similarity(a.as_slice(), b.as_slice()).map_err(|e| e.to_string())?;
        if p.label.is_positive() { pos.push(s) } else { neg.push(s) }
    }
    let auc = pairwise_auc(&pos, &neg);
    let first = outcome.history.first().ok_or("empty history")?.train_loss;
    let last = outcome.history.last().ok_or("empty history")?.train_loss;
    let elapsed = start.elapsed();
    ensure(auc >= 0.90, || format!("held-out AUC {auc:.4}"))?;
    ensure(last <= 0.5 * first, || format!("loss {first:.4} -> {last:.4}"))?;
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!("held-out AUC {auc:.4}; loss {first:.4} -> {last:.2e}; {elapsed:.2?}"))
}

// ---------------------------------------------------------------- 6

fn random_word(rng: &mut ChaCha8Rng) -> String {
    (0..7).map(|_| rng.random_range(b'a'..=b'z') as char).collect()
}

fn has_shared_ngram(a: &[String], b: &[String], n: usize) -> bool {
    a.windows(n).any(|wa| b.windows(n).any(|wb| wa == wb))
}

fn baseline_sanity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let vocab: Vec<String> = (0..3000).map(|_| random_word(&mut rng)).collect();
    let doc = |rng: &mut ChaCha8Rng, len: usize| -> Vec<String> {
        (0..len).map(|_| vocab[rng.random_range(0..vocab.len())].clone()).collect()
    };
    let (mut planted_hits, mut clean_zeros) = (0, 0);
    for k in 0..40 {
        let a = doc(&mut rng, 200);
        let mut b = doc(&mut rng, 200);
        let planted = k % 2 == 0;
        if planted {
            let len = rng.random_range(5..15);
            let from = rng.random_range(0..a.len() - len);
            let to = rng.random_range(0..b.len() - len);
            b[to..to + len].clone_from_slice(&a[from..from + len]);
        }
        let oracle = has_shared_ngram(&a, &b, 5);
        let score = text_reuse_score(&a.join(" "), &b.join(" "), 5).score;
        ensure((score >= 1) == oracle, || format!("fixture {k}: score {score}, oracle {oracle}"))?;
        ensure(planted == oracle, || format!("fixture {k}: planted {planted}, oracle {oracle}"))?;
        if planted { planted_hits += 1 } else { clean_zeros += 1 }
    }

    let topics: Vec<Vec<String>> = (0..2).map(|_| (0..40).map(|_| random_word(&mut rng)).collect()).collect();
    let topic_doc = |rng: &mut ChaCha8Rng, t: usize| -> String {
        (0..80).map(|_| topics[t][rng.random_range(0..40)].as_str()).collect::<Vec<_>>().join(" ")
    };
    let train_docs: Vec<String> = (0..40).map(|i| topic_doc(&mut rng, i % 2)).collect();
    let model = LdaModel::fit(
        &train_docs,
        LdaConfig {
            topics: 2,
            iterations: 200,
            ..LdaConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let held_out: Vec<(usize, _)> = (0..20).map(|i| (i % 2, model.infer(&topic_doc(&mut rng, i % 2)))).collect();
    let (mut below, mut comparisons) = (0, 0);
    for (i, (ti, pi)) in held_out.iter().enumerate() {
        for (j, (tj, pj)) in held_out.iter().enumerate() {
            if i == j || ti != tj {
                continue;
            }
            let same = kl_score(pi, pj, KlDirection::Symmetric).map_err(|e| e.to_string())?;
            for (tk, pk) in &held_out {
                if tk == ti {
                    continue;
                }
                let cross = kl_score(pi, pk, KlDirection::Symmetric).map_err(|e| e.to_string())?;
                comparisons += 1;
                if same < cross {
                    below += 1;
                }
            }
        }
    }
    let frac = below as f64 / comparisons as f64;
    ensure(frac >= 0.9, || format!("same-topic KL below cross-topic in {frac:.3}"))?;

    let provider = HashEmbedder::new(64, 0);
    let text = train_docs[0].repeat(20);
    let self_score = doc_embedding_score(&provider, &text, &text).map_err(|e| e.to_string())?;
    ensure(self_score == 0.0, || format!("doc_embedding(a, a) = {self_score:e}"))?;
    Ok(format!(
        "reuse: {planted_hits} planted found, {clean_zeros} clean at 0; LDA same<cross in {:.1}% of {comparisons}; doc_embedding(a,a)=0",
        100.0 * frac
    ))
}

// ---------------------------------------------------------------- 7

fn cli(config: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_kginfluence"))
        .arg("--config")
        .arg(config)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn run_config(root: &Path, corpus: &str, epochs: usize) -> String {
    let p = |rel: &str| root.join(rel).display().to_string();
    format!(
        "seed = 3\n[paths]\ncorpus_dir = {:?}\ngraphs_file = {:?}\npairs_file = {:?}\ncache_dir = {:?}\noutput_dir = {:?}\n\
         [ingest]\nsubjects = [\"alpha\"]\nlimit_per_subject = 5\n[ingest.source]\nbase_url = {:?}\n\
         [extract]\nmock = true\nsidecar_dir = {:?}\n[features]\ndim = 32\n[encoder]\nin_dim = 32\nhidden_dim = 32\nout_dim = 16\n\
         [train]\nepochs = {epochs}\ncheckpoint_every = 2\n[sampling]\nn_positive = 30\nn_negative = 48\n\
         [baselines.lda]\ntopics = 4\niterations = 20\ninfer_iterations = 10\n",
        p(corpus),
        p("graphs/graphs.jsonl"),
        p("pairs/pairs.csv"),
        p("cache"),
        p("out"),
        p("fixture"),
        p("sidecars"),
    )
}

fn determinism_and_provenance() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let data = generate(&SyntheticConfig {
        documents: 60,
        ..SyntheticConfig::default()
    });
    save_corpus(&data.corpus, &root.join("corpus")).map_err(|e| e.to_string())?;
    data.write_sidecars(&root.join("sidecars")).map_err(|e| e.to_string())?;
    let fixture = root.join("fixture");
    std::fs::create_dir_all(fixture.join("search")).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(fixture.join("text")).map_err(|e| e.to_string())?;
    std::fs::write(fixture.join("search/alpha.json"), r#"{"data":[{"paperId":"f1","references":[]}]}"#)
        .map_err(|e| e.to_string())?;
    std::fs::write(fixture.join("text/f1.json"), r#"{"text":"fixture body"}"#).map_err(|e| e.to_string())?;

    let config = root.join("run.toml");
    let write = |corpus: &str, epochs: usize| std::fs::write(&config, run_config(root, corpus, epochs));
    let checkpoint = root.join("out/checkpoint.json");
    let read_ckpt = || std::fs::read(&checkpoint).map_err(|e| e.to_string());

    write("ingested", 6).map_err(|e| e.to_string())?;
    cli(&config, &["ingest"])?;
    write("corpus", 6).map_err(|e| e.to_string())?;
    cli(&config, &["extract"])?;
    cli(&config, &["sample-pairs"])?;
    cli(&config, &["train"])?;
    let first = read_ckpt()?;
    cli(&config, &["train"])?;
    ensure(read_ckpt()? == first, || "two identical train runs differ".into())?;

    write("corpus", 3).map_err(|e| e.to_string())?;
    cli(&config, &["train"])?;
    write("corpus", 6).map_err(|e| e.to_string())?;
    cli(&config, &["train", "--resume"])?;
    ensure(read_ckpt()? == first, || "resumed checkpoint differs from uninterrupted".into())?;

    cli(&config, &["evaluate"])?;
    let dirs: Vec<PathBuf> = ["ingested", "graphs", "pairs", "out"].iter().map(|d| root.join(d)).collect();
    for d in &dirs {
        ensure(d.join("config.toml").is_file(), || format!("{} lacks config.toml", d.display()))?;
    }
    Ok(format!("bit-identical reruns and resume; config echoed in {} output dirs", dirs.len()))
}

// ---------------------------------------------------------------- 8

fn pair_sampling_contract() -> Check {
    let cites: &[(&str, &[&str])] = &[
        ("s0d0", &[]),
        ("s0d1", &["s0d0"]),
        ("s0d2", &["s0d0", "ext9"]),
        ("s0d3", &["s0d2"]),
        ("s1d0", &["s0d0"]),
        ("s1d1", &["s1d0"]),
        ("s1d2", &[]),
        ("s1d3", &["s1d2"]),
        ("s2d0", &[]),
        ("s2d1", &["s2d0", "s1d1"]),
        ("s2d2", &[]),
        ("s2d3", &["s2d1"]),
    ];
    let docs: Vec<Document> = cites
        .iter()
        .map(|(id, refs)| Document::new(*id, &id[..2], format!("text of {id}")).citing(refs.iter().copied()))
        .collect();
    let corpus = Corpus::from_documents(docs).map_err(|e| e.to_string())?;

    let mut expected = BTreeSet::new();
    for (i, (a, ra)) in cites.iter().enumerate() {
        for (b, rb) in &cites[i + 1..] {
            if a[..2] != b[..2] {
                continue;
            }
            let linked = ra.contains(b) || rb.contains(a);
            expected.insert((a.to_string(), b.to_string(), linked));
        }
    }
    let n_pos = expected.iter().filter(|e| e.2).count();
    let n_neg = expected.len() - n_pos;
    ensure(n_pos == 7 && n_neg == 11, || format!("fixture has {n_pos}/{n_neg}"))?;
    ensure(negatives_for(n_pos) == n_neg, || format!("negatives_for(7) = {}", negatives_for(7)))?;

    for seed in 0..5 {
        let s = sample_pairs(&corpus, n_pos, negatives_for(n_pos), seed).map_err(|e| e.to_string())?;
        ensure(s.positive_shortfall == 0 && s.negative_shortfall == 0, || "unexpected shortfall".into())?;
        let got: BTreeSet<(String, String, bool)> =
            s.pairs.iter().map(|p| (p.doc_a.clone(), p.doc_b.clone(), p.label.is_positive())).collect();
        ensure(got.len() == s.pairs.len(), || "duplicate pairs sampled".into())?;
        ensure(got == expected, || format!("seed {seed}: sampled set differs from enumeration"))?;
        ensure(s.pairs.iter().all(|p| p.subject == p.doc_a[..2]), || "wrong subject tag".into())?;
    }
    Ok(format!("{n_pos} positives and {n_neg} negatives match enumeration (ratio {:.2})", n_neg as f64 / n_pos as f64))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 gradient correctness", gradient_check),
        ("2 loss identities", loss_identities),
        ("3 permutation invariance", permutation_invariance),
        ("4 statistics oracles", statistics_oracles),
        ("5 synthetic separability", synthetic_benchmark),
        ("6 baseline sanity", baseline_sanity),
        ("7 determinism and provenance", determinism_and_provenance),
        ("8 pair-sampling contract", pair_sampling_contract),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

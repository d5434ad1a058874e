use super::{EvalError, ScoredPairs};

/// ROC vertex. `threshold` is the score at which the vertex is reached
/// (`+inf` for the (0,0) anchor); pairs with `score >= threshold` are
/// predicted positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
}

/// One vertex per distinct score, descending, anchored at (0,0) and (1,1).
pub fn roc_curve(scored: &ScoredPairs) -> Result<(Vec<RocPoint>, f64), EvalError> {
    let (pos, neg) = scored.groups()?;
    let (np, nn) = (pos.len(), neg.len());
    let mut all: Vec<(f64, bool)> = pos.iter().map(|&s| (s, true)).chain(neg.iter().map(|&s| (s, false))).collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
        tp: 0,
        fp: 0,
    }];
    let (mut tp, mut fp) = (0, 0);
    for group in all.chunk_by(|a, b| a.0 == b.0) {
        for &(_, positive) in group {
            if positive {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push(RocPoint {
            fpr: fp as f64 / nn as f64,
            tpr: tp as f64 / np as f64,
            threshold: group[0].0,
            tp,
            fp,
        });
    }
    let area = auc(&points);
    Ok((points, area))
}

/// Trapezoid area under a ROC polyline.
pub fn auc(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn classify(scored: &ScoredPairs, threshold: f64) -> Classification {
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for e in &scored.entries {
        match (e.label.is_positive(), e.score >= threshold) {
            (true, true) => tp += 1,
            (true, false) => fn_ += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    let f1 = if tp == 0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Classification {
        threshold,
        tp,
        fp,
        fn_,
        tn,
        precision,
        recall,
        f1,
    }
}

fn best_vertex(points: &[RocPoint], key: impl Fn(&RocPoint) -> f64) -> Result<&RocPoint, EvalError> {
    // Skip the (0,0) anchor; vertices run from high to low threshold, so a
    // strict comparison keeps the higher threshold on ties.
    let mut best: Option<(&RocPoint, f64)> = None;
    for p in points.iter().filter(|p| p.threshold.is_finite()) {
        let k = key(p);
        if best.is_none_or(|(_, b)| k > b) {
            best = Some((p, k));
        }
    }
    best.map(|(p, _)| p).ok_or(EvalError::Empty)
}

/// Threshold maximizing Youden's J = TPR - FPR, with its confusion counts.
pub fn optimal_threshold(points: &[RocPoint], scored: &ScoredPairs) -> Result<Classification, EvalError> {
    let v = best_vertex(points, |p| p.tpr - p.fpr)?;
    Ok(classify(scored, v.threshold))
}

/// Threshold with the highest F1 over all ROC vertices.
pub fn max_f1_sweep(points: &[RocPoint], scored: &ScoredPairs) -> Result<Classification, EvalError> {
    let v = best_vertex(points, |p| classify(scored, p.threshold).f1)?;
    Ok(classify(scored, v.threshold))
}

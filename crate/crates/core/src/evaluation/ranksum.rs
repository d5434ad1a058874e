use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::EvalError;

/// Exact enumeration is used when `n1 * n2` is at most this...
pub const EXACT_MAX_PRODUCT: usize = 20;
/// ...or when the combined sample is this small. The normal approximation
/// is off by more than 0.01 for some small unbalanced samples, e.g. (3, 7).
pub const EXACT_MAX_TOTAL: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSumResult {
    /// Mann-Whitney U of the positive group.
    pub u: f64,
    pub p: f64,
    pub neg_log10_p: f64,
    pub method: PValueMethod,
    /// Every score identical; p is fixed at 0.5.
    pub degenerate: bool,
}

/// Midranks (1-based) of `values`, ties sharing their average rank.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn combined(pos: &[f64], neg: &[f64]) -> Vec<f64> {
    pos.iter().chain(neg).copied().collect()
}

fn u_statistic(pos: &[f64], ranks: &[f64]) -> f64 {
    let n1 = pos.len() as f64;
    ranks[..pos.len()].iter().sum::<f64>() - n1 * (n1 + 1.0) / 2.0
}

/// Exact one-sided p = P(U >= observed) under random assignment of the
/// observed midranks, by dynamic programming over subset sums.
pub fn rank_sum_exact_p(pos: &[f64], neg: &[f64]) -> f64 {
    let all = combined(pos, neg);
    let ranks = midranks(&all);
    // Doubled midranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let observed: usize = doubled[..pos.len()].iter().sum();
    let k = pos.len();
    let max_sum: usize = doubled.iter().sum();
    // counts[j][s]: number of j-subsets with doubled-rank sum s.
    let mut counts = vec![vec![0.0f64; max_sum + 1]; k + 1];
    counts[0][0] = 1.0;
    for &d in &doubled {
        for j in (1..=k).rev() {
            let (lower, upper) = counts.split_at_mut(j);
            for s in (d..=max_sum).rev() {
                upper[0][s] += lower[j - 1][s - d];
            }
        }
    }
    let total: f64 = counts[k].iter().sum();
    let tail: f64 = counts[k][observed..].iter().sum();
    tail / total
}

/// `-log10 P(Z > z)` for a standard normal, accurate far into the tail.
pub fn neg_log10_normal_sf(z: f64) -> f64 {
    if z < 30.0 {
        let sf = Normal::standard().sf(z);
        return -sf.log10();
    }
    -ln_sf_asymptotic(z) / std::f64::consts::LN_10
}

/// Log of the normal upper tail via the asymptotic Mills-ratio series;
/// the double-precision tail underflows past z of about 38.
fn ln_sf_asymptotic(z: f64) -> f64 {
    let z2 = z * z;
    let (mut series, mut term) = (1.0, 1.0);
    for k in 1..8 {
        term *= -((2 * k - 1) as f64) / z2;
        series += term;
    }
    -z2 / 2.0 - z.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln()
}

/// Normal approximation with tie-corrected variance and continuity
/// correction. Returns `(p, -log10 p)`, or `None` when the variance is zero.
pub fn rank_sum_normal_p(pos: &[f64], neg: &[f64]) -> Option<(f64, f64)> {
    let all = combined(pos, neg);
    let ranks = midranks(&all);
    let u = u_statistic(pos, &ranks);
    let (n1, n2) = (pos.len() as f64, neg.len() as f64);
    let n = n1 + n2;
    let mut sorted = all.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|a, b| a == b) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return None;
    }
    let z = (u - n1 * n2 / 2.0 - 0.5) / var.sqrt();
    let nl = neg_log10_normal_sf(z);
    Some((10f64.powf(-nl), nl))
}

/// One-sided Mann-Whitney test that positive scores exceed negative ones.
pub fn rank_sum_test(pos: &[f64], neg: &[f64]) -> Result<RankSumResult, EvalError> {
    if pos.is_empty() || neg.is_empty() {
        return Err(EvalError::Empty);
    }
    let all = combined(pos, neg);
    let ranks = midranks(&all);
    let u = u_statistic(pos, &ranks);
    let degenerate = all.iter().all(|&x| x == all[0]);
    let exact = pos.len() * neg.len() <= EXACT_MAX_PRODUCT || pos.len() + neg.len() <= EXACT_MAX_TOTAL;
    let method = if exact { PValueMethod::Exact } else { PValueMethod::Normal };
    if degenerate {
        return Ok(RankSumResult {
            u,
            p: 0.5,
            neg_log10_p: -(0.5f64).log10(),
            method,
            degenerate,
        });
    }
    let (p, neg_log10_p) = if exact {
        let p = rank_sum_exact_p(pos, neg);
        (p, -p.log10())
    } else {
        rank_sum_normal_p(pos, neg).expect("non-degenerate input has positive variance")
    };
    Ok(RankSumResult {
        u,
        p,
        neg_log10_p,
        method,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_value_example() {
        let r = rank_sum_test(&[2.0, 3.0], &[0.0, 1.0]).unwrap();
        assert_eq!(r.method, PValueMethod::Exact);
        assert_eq!(r.u, 4.0);
        assert!((r.p - 1.0 / 6.0).abs() < 1e-12);
        assert!((r.neg_log10_p - 0.77815125).abs() < 1e-6);
    }

    #[test]
    fn identical_groups_give_half() {
        let v: Vec<f64> = (0..30).map(|i| (i * 7 % 13) as f64).collect();
        let r = rank_sum_test(&v, &v).unwrap();
        assert_eq!(r.u, 450.0);
        assert_eq!(r.method, PValueMethod::Normal);
        assert!((r.p - 0.5).abs() < 0.01, "{}", r.p);
        let small = [0.1, 0.5, 0.9, 1.3, 2.0, 2.5];
        let r = rank_sum_test(&small, &small).unwrap();
        assert_eq!((r.u, r.method), (18.0, PValueMethod::Exact));
        // Brute force over all 6-subsets of the 12 midranks.
        let all: Vec<f64> = small.iter().chain(&small).copied().collect();
        let ranks = midranks(&all);
        let observed: f64 = ranks[..6].iter().sum();
        let (mut hits, mut total) = (0u32, 0u32);
        for mask in 0u32..(1 << 12) {
            if mask.count_ones() == 6 {
                total += 1;
                let s: f64 = (0..12).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
                hits += (s >= observed - 1e-9) as u32;
            }
        }
        assert!((r.p - hits as f64 / total as f64).abs() < 1e-12);
        assert!(r.p > 0.5 && r.p < 0.6);
    }

    #[test]
    fn all_identical_is_degenerate() {
        let r = rank_sum_test(&[1.0; 7], &[1.0; 9]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p, 0.5);
        assert_eq!(r.u, 31.5);
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[5.0, 1.0, 5.0, 3.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn extreme_separation_stays_finite() {
        let pos: Vec<f64> = (0..3000).map(|i| 10_000.0 + i as f64).collect();
        let neg: Vec<f64> = (0..3000).map(|i| i as f64).collect();
        let r = rank_sum_test(&pos, &neg).unwrap();
        assert!(r.neg_log10_p.is_finite() && r.neg_log10_p > 300.0, "{}", r.neg_log10_p);
    }

    #[test]
    fn tail_series_matches_direct_tail() {
        for z in [10.0, 20.0, 29.9, 30.0, 35.0] {
            let direct = -Normal::standard().sf(z).log10();
            let series = -ln_sf_asymptotic(z) / std::f64::consts::LN_10;
            assert!((direct - series).abs() < 1e-9, "{z}: {direct} {series}");
        }
        assert!((neg_log10_normal_sf(0.0) - 0.5f64.log10().abs()).abs() < 1e-12);
    }

    #[test]
    fn empty_group_is_an_error() {
        assert!(rank_sum_test(&[], &[1.0]).is_err());
    }
}

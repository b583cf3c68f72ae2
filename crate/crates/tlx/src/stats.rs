//! Rank-based tests and correlation used by the workload analysis.
//!
//! Midranks are handled internally as doubled integers (a midrank of 2.5 is
//! stored as 5) so that exact null distributions can be enumerated without
//! floating-point comparisons.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::TlxError;

/// Largest effective sample size for the exact Wilcoxon distribution.
pub const WILCOXON_EXACT_MAX_N: usize = 20;
/// Largest number of conditions for the exact Friedman distribution.
pub const FRIEDMAN_EXACT_MAX_K: usize = 6;
/// Distinct rank-sum states tracked before falling back to the chi-squared tail.
pub const FRIEDMAN_EXACT_MAX_STATES: usize = 250_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    ChiSquared,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Approximation,
    #[serde(rename = "all-zero")]
    AllZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    pub statistic: Statistic,
    pub value: f64,
    pub degrees_of_freedom: Option<u32>,
    pub p_value: f64,
    pub method: Method,
    /// Number of observations the test used (rows for Friedman, non-zero
    /// differences for Wilcoxon).
    pub n: usize,
}

/// Doubled midranks of `values` (ties share the average rank).
pub fn doubled_midranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1; doubled average = i + j + 2
        for &idx in &order[i..=j] {
            ranks[idx] = (i + j + 2) as u64;
        }
        i = j + 1;
    }
    ranks
}

/// Σ(t³ − t) over tie groups of `values`.
fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        total += t * t * t - t;
        i = j + 1;
    }
    total
}

/// One participant's scores across the conditions; `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub participant: String,
    pub scores: Vec<Option<f64>>,
}

/// Friedman test over a complete block design (rows = participants,
/// columns = conditions).
///
/// The statistic is the tie-corrected Friedman chi-squared with `k − 1`
/// degrees of freedom. Its p-value comes from the exact within-row
/// permutation distribution when that distribution is small enough to
/// enumerate, and from the chi-squared upper tail otherwise.
pub fn friedman_test(blocks: &[Block]) -> Result<StatResult, TlxError> {
    let n = blocks.len();
    if n < 2 {
        return Err(TlxError::Invalid(format!(
            "friedman test needs at least 2 participants, got {n}"
        )));
    }
    let k = blocks[0].scores.len();
    if k < 3 {
        return Err(TlxError::Invalid(format!(
            "friedman test needs at least 3 conditions, got {k}"
        )));
    }
    let mut rows = Vec::with_capacity(n);
    for b in blocks {
        if b.scores.len() != k {
            return Err(TlxError::IncompleteDesign {
                participant: b.participant.clone(),
                problem: format!("has {} cells, expected {k}", b.scores.len()),
            });
        }
        let row: Option<Vec<f64>> = b.scores.iter().copied().collect();
        match row {
            Some(row) if row.iter().all(|v| v.is_finite()) => rows.push(row),
            _ => {
                return Err(TlxError::IncompleteDesign {
                    participant: b.participant.clone(),
                    problem: "has a missing cell".into(),
                })
            }
        }
    }
    Ok(friedman_rows(&rows))
}

/// [`friedman_test`] for a complete matrix; rows must all have length ≥ 3.
pub fn friedman_matrix(rows: &[Vec<f64>]) -> Result<StatResult, TlxError> {
    let blocks: Vec<Block> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| Block {
            participant: format!("row {i}"),
            scores: r.iter().copied().map(Some).collect(),
        })
        .collect();
    friedman_test(&blocks)
}

fn friedman_rows(rows: &[Vec<f64>]) -> StatResult {
    let n = rows.len();
    let k = rows[0].len();
    let nf = n as f64;
    let kf = k as f64;
    let ranked: Vec<Vec<u64>> = rows.iter().map(|r| doubled_midranks(r)).collect();
    let ties: f64 = rows.iter().map(|r| tie_term(r)).sum();
    let correction = 1.0 - ties / (nf * kf * (kf * kf - 1.0));
    let df = (k - 1) as u32;

    if correction <= 1e-12 {
        // every row constant: no information about the conditions
        return StatResult {
            statistic: Statistic::ChiSquared,
            value: 0.0,
            degrees_of_freedom: Some(df),
            p_value: 1.0,
            method: Method::Exact,
            n,
        };
    }

    let sums = column_sums(&ranked, k);
    let chi2 = chi_squared_from_doubled(&sums, n, k) / correction;
    let chi2 = chi2.max(0.0);

    let exact = if k <= FRIEDMAN_EXACT_MAX_K {
        exact_friedman_p(&ranked, &sums)
    } else {
        None
    };
    let (p_value, method) = match exact {
        Some(p) => (p, Method::Exact),
        None => {
            let dist = ChiSquared::new(df as f64).expect("df >= 2");
            (dist.sf(chi2), Method::Approximation)
        }
    };
    StatResult {
        statistic: Statistic::ChiSquared,
        value: chi2,
        degrees_of_freedom: Some(df),
        p_value: p_value.clamp(0.0, 1.0),
        method,
        n,
    }
}

fn column_sums(ranked: &[Vec<u64>], k: usize) -> Vec<u64> {
    let mut sums = vec![0; k];
    for row in ranked {
        for (s, r) in sums.iter_mut().zip(row) {
            *s += r;
        }
    }
    sums
}

/// Uncorrected Friedman statistic from doubled column rank sums.
fn chi_squared_from_doubled(doubled_sums: &[u64], n: usize, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = doubled_sums.iter().map(|&s| (s as f64 / 2.0).powi(2)).sum();
    12.0 / (nf * kf * (kf + 1.0)) * sum_sq - 3.0 * nf * (kf + 1.0)
}

/// Exact p-value under uniform, independent within-row permutations.
///
/// The tie correction is the same for every permutation, so the p-value is
/// the probability that Σ (column rank sum)² reaches the observed value.
/// Returns `None` if the state space grows past
/// [`FRIEDMAN_EXACT_MAX_STATES`].
fn exact_friedman_p(ranked: &[Vec<u64>], observed_sums: &[u64]) -> Option<f64> {
    let k = observed_sums.len();
    let observed: u64 = observed_sums.iter().map(|s| s * s).sum();
    let perms = permutations(k);

    let mut states: HashMap<Vec<u64>, f64> = HashMap::from([(vec![0; k], 1.0)]);
    for row in ranked {
        // distinct arrangements of this row's ranks, weighted by multiplicity
        let mut arrangements: HashMap<Vec<u64>, f64> = HashMap::new();
        for p in &perms {
            let arranged: Vec<u64> = p.iter().map(|&i| row[i]).collect();
            *arrangements.entry(arranged).or_default() += 1.0;
        }
        let total = perms.len() as f64;
        let mut next: HashMap<Vec<u64>, f64> = HashMap::with_capacity(states.len() * arrangements.len());
        for (state, prob) in &states {
            for (arr, count) in &arrangements {
                let key: Vec<u64> = state.iter().zip(arr).map(|(a, b)| a + b).collect();
                *next.entry(key).or_default() += prob * count / total;
            }
        }
        if next.len() > FRIEDMAN_EXACT_MAX_STATES {
            return None;
        }
        states = next;
    }
    let p: f64 = states
        .iter()
        .filter(|(sums, _)| sums.iter().map(|s| s * s).sum::<u64>() >= observed)
        .map(|(_, prob)| prob)
        .sum();
    Some(p.min(1.0))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped before ranking. With at most
/// [`WILCOXON_EXACT_MAX_N`] non-zero differences the p-value is exact
/// (enumerated null distribution of W⁺); above that, a normal approximation
/// with tie and continuity corrections is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<StatResult, TlxError> {
    if a.len() != b.len() {
        return Err(TlxError::Invalid(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(TlxError::Invalid("wilcoxon test needs at least one pair".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(TlxError::Invalid("non-finite difference".into()));
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(StatResult {
            statistic: Statistic::W,
            value: 0.0,
            degrees_of_freedom: None,
            p_value: 1.0,
            method: Method::AllZero,
            n: 0,
        });
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = doubled_midranks(&magnitudes);
    let total: u64 = ranks.iter().sum();
    let plus: u64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let w_doubled = plus.min(total - plus);
    let w = w_doubled as f64 / 2.0;

    let (p_value, method) = if n <= WILCOXON_EXACT_MAX_N {
        (exact_signed_rank_p(&ranks, w_doubled), Method::Exact)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term(&magnitudes) / 48.0;
        let p = if var <= 0.0 {
            1.0
        } else {
            let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
            2.0 * Normal::standard().sf(z)
        };
        (p, Method::Approximation)
    };
    Ok(StatResult {
        statistic: Statistic::W,
        value: w,
        degrees_of_freedom: None,
        p_value: p_value.clamp(0.0, 1.0),
        method,
        n,
    })
}

/// Two-sided exact p: 2·P(W⁺ ≤ w) under random signs, capped at 1.
fn exact_signed_rank_p(doubled_ranks: &[u64], w_doubled: u64) -> f64 {
    let total: u64 = doubled_ranks.iter().sum();
    // counts[s] = number of sign assignments whose doubled W⁺ equals s
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let tail: u64 = counts[..=w_doubled as usize].iter().sum();
    let p = 2.0 * tail as f64 / 2f64.powi(doubled_ranks.len() as i32);
    p.min(1.0)
}

/// Pearson correlation coefficient. Errors when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, TlxError> {
    if x.len() != y.len() {
        return Err(TlxError::Invalid("samples differ in length".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(TlxError::Degenerate("constant sample".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_are_doubled() {
        assert_eq!(doubled_midranks(&[10.0, 30.0, 20.0]), vec![2, 6, 4]);
        assert_eq!(doubled_midranks(&[1.0, 1.0, 2.0]), vec![3, 3, 6]);
        assert_eq!(doubled_midranks(&[5.0, 5.0, 5.0, 5.0]), vec![5, 5, 5, 5]);
    }

    #[test]
    fn friedman_identical_rankings() {
        // rank sums 3, 6, 9: 12/(3*3*4) * 126 - 3*3*4 = 42 - 36 = 6
        let r = friedman_matrix(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![0.1, 0.2, 0.3]]).unwrap();
        assert!((r.value - 6.0).abs() < 1e-12);
        assert_eq!(r.degrees_of_freedom, Some(2));
        // only the 6 arrangements that rank all rows identically reach χ² = 6
        assert!((r.p_value - 6.0 / 216.0).abs() < 1e-12);
        assert_eq!(r.method, Method::Exact);
    }

    #[test]
    fn friedman_all_ties() {
        let r = friedman_matrix(&[vec![2.0; 4], vec![7.0; 4], vec![0.0; 4]]).unwrap();
        assert_eq!((r.value, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn friedman_rejects_missing_cell() {
        let blocks = vec![
            Block {
                participant: "p1".into(),
                scores: vec![Some(1.0), Some(2.0), Some(3.0)],
            },
            Block {
                participant: "p2".into(),
                scores: vec![Some(1.0), None, Some(3.0)],
            },
        ];
        match friedman_test(&blocks).unwrap_err() {
            TlxError::IncompleteDesign { participant, .. } => assert_eq!(participant, "p2"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(friedman_matrix(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(friedman_matrix(&[vec![1.0, 2.0, 3.0]]).is_err());
    }

    #[test]
    fn friedman_large_design_uses_chi_squared() {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| (0..8).map(|j| ((i * 7 + j * 3) % 11) as f64).collect())
            .collect();
        let r = friedman_matrix(&rows).unwrap();
        assert_eq!(r.method, Method::Approximation);
        assert_eq!(r.degrees_of_freedom, Some(7));
    }

    #[test]
    fn wilcoxon_all_positive_three() {
        let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(r.value, 0.0);
        assert!((r.p_value - 0.25).abs() < 1e-15);
        assert_eq!(r.method, Method::Exact);
    }

    #[test]
    fn wilcoxon_all_zero() {
        let r = wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!((r.value, r.p_value, r.method), (0.0, 1.0, Method::AllZero));
    }

    #[test]
    fn wilcoxon_zeros_dropped_and_ties_midranked() {
        // diffs 0, 1, -1, 2: zero dropped; |d| = 1, 1, 2 -> ranks 1.5, 1.5, 3
        let r = wilcoxon_signed_rank(&[5.0, 3.0, 1.0, 4.0], &[5.0, 2.0, 2.0, 2.0]).unwrap();
        assert_eq!(r.n, 3);
        assert_eq!(r.value, 1.5);
    }

    #[test]
    fn wilcoxon_large_sample_approximates() {
        let a: Vec<f64> = (0..30).map(|i| i as f64 + 0.5).collect();
        let b: Vec<f64> = (0..30).map(|i| (i * 7 % 30) as f64).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.method, Method::Approximation);
        assert!((0.0..=1.0).contains(&r.p_value));
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 5.0]).unwrap() + 0.5).abs() < 1e-15);
        assert!(pearson(&[1.0, 2.0, 3.0], &[3.0, 3.0, 3.0]).is_err());
    }
}

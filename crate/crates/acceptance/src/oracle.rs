//! Reference computations written straight from the definitions, slow but
//! easy to check by eye.

use postedit_core::export::{ExportRecord, CSV_HEADER};
use rand::seq::SliceRandom;
use rand::Rng;

/// Midrank of every value: 1 + (number below) + (ties - 1) / 2.
pub fn midranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|x| {
            let below = xs.iter().filter(|y| *y < x).count() as f64;
            let equal = xs.iter().filter(|y| *y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Wilcoxon signed-rank on paired samples by listing all 2^n sign
/// assignments of the non-zero differences. Returns `(W, two-sided p)` with
/// W = min(W+, W-).
pub fn wilcoxon_enumeration(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    let n = d.len();
    let ranks = midranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let total: f64 = ranks.iter().sum();
    let plus: f64 = ranks.iter().zip(&d).filter(|(_, v)| **v > 0.0).map(|(r, _)| r).sum();
    let w = plus.min(total - plus);
    let mut at_most = 0u64;
    for mask in 0u64..(1 << n) {
        let w_plus: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w_plus <= w + 1e-9 {
            at_most += 1;
        }
    }
    (w, (2.0 * at_most as f64 / (1u64 << n) as f64).min(1.0))
}

/// Friedman chi-squared with the usual tie correction; rows are blocks.
pub fn friedman_chi2(rows: &[Vec<f64>]) -> f64 {
    let ranks: Vec<Vec<f64>> = rows.iter().map(|r| midranks(r)).collect();
    chi2_from_ranks(&ranks, tie_correction(rows))
}

fn tie_correction(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len() as f64;
    let k = rows[0].len() as f64;
    let mut ties = 0.0;
    for row in rows {
        for (i, x) in row.iter().enumerate() {
            if !row[..i].contains(x) {
                let t = row.iter().filter(|y| *y == x).count() as f64;
                ties += t * t * t - t;
            }
        }
    }
    1.0 - ties / (n * k * (k * k - 1.0))
}

fn chi2_from_ranks(ranks: &[Vec<f64>], correction: f64) -> f64 {
    let n = ranks.len() as f64;
    let k = ranks[0].len();
    let kf = k as f64;
    let sum_sq: f64 = (0..k).map(|j| ranks.iter().map(|r| r[j]).sum::<f64>().powi(2)).sum();
    (12.0 / (n * kf * (kf + 1.0)) * sum_sq - 3.0 * n * (kf + 1.0)) / correction
}

/// Monte Carlo permutation p for the Friedman test: shuffle every row
/// independently and count statistics at least as large as observed.
pub fn friedman_shuffle_p<R: Rng>(rows: &[Vec<f64>], shuffles: usize, rng: &mut R) -> f64 {
    let correction = tie_correction(rows);
    let mut ranks: Vec<Vec<f64>> = rows.iter().map(|r| midranks(r)).collect();
    let observed = chi2_from_ranks(&ranks, correction);
    let mut hits = 0usize;
    for _ in 0..shuffles {
        for row in ranks.iter_mut() {
            row.shuffle(rng);
        }
        if chi2_from_ranks(&ranks, correction) >= observed - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / shuffles as f64
}

/// Pearson r from the definition.
pub fn pearson_direct(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Rows a CSV export of `records` must parse back to, header included:
/// one row per span, or one row with empty span columns for a record
/// without spans.
pub fn flattened(records: &[ExportRecord]) -> Vec<Vec<String>> {
    let mut rows = vec![CSV_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for r in records {
        let head = vec![
            r.pair_id.clone(),
            r.source_lang.clone(),
            r.target_lang.clone(),
            r.source_text.clone(),
            r.mt_text.clone(),
            r.corrected_text.clone(),
            r.annotator_id.clone(),
            r.overall_score.map(|s| s.to_string()).unwrap_or_default(),
        ];
        if r.spans.is_empty() {
            rows.push(
                head.iter()
                    .cloned()
                    .chain(std::iter::repeat_n(String::new(), 8))
                    .collect(),
            );
        }
        for s in &r.spans {
            let mut row = head.clone();
            row.extend([
                s.category.to_string(),
                s.severity.to_string(),
                s.source_start.map(|v| v.to_string()).unwrap_or_default(),
                s.source_end.map(|v| v.to_string()).unwrap_or_default(),
                s.translation_start.to_string(),
                s.translation_end.to_string(),
                s.explanation.clone(),
                s.provenance.to_string(),
            ]);
            rows.push(row);
        }
    }
    rows
}

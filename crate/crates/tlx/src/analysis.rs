use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::TlxError;
use crate::record::{Condition, Dimension, Measure, TlxRecord};
use crate::stats::{pearson, Block};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    /// Sample (n − 1) standard deviation; `None` with fewer than two values.
    pub sd: Option<f64>,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Option<MeanSd> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.len() >= 2).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        });
        Some(MeanSd { mean, sd })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: Condition,
    pub n: usize,
    pub dimensions: BTreeMap<Dimension, MeanSd>,
    pub composite: MeanSd,
}

/// Per-condition mean and sample SD of every dimension and of the composite
/// workload. Conditions without records are absent.
pub fn condition_summary(records: &[TlxRecord]) -> Vec<ConditionSummary> {
    let mut by_condition: BTreeMap<Condition, Vec<&TlxRecord>> = BTreeMap::new();
    for r in records {
        by_condition.entry(r.condition).or_default().push(r);
    }
    by_condition
        .into_iter()
        .map(|(condition, rs)| {
            let column = |m: Measure| -> Vec<f64> { rs.iter().map(|r| m.of(r)).collect() };
            ConditionSummary {
                condition,
                n: rs.len(),
                dimensions: Dimension::ALL
                    .into_iter()
                    .map(|d| (d, MeanSd::of(&column(Measure::Dimension(d))).expect("non-empty group")))
                    .collect(),
                composite: MeanSd::of(&column(Measure::Composite)).expect("non-empty group"),
            }
        })
        .collect()
}

/// Symmetric 6×6 Pearson matrix over the TLX dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub dimensions: [Dimension; 6],
    pub r: [[f64; 6]; 6],
}

impl CorrelationMatrix {
    pub fn get(&self, a: Dimension, b: Dimension) -> f64 {
        self.r[a.index()][b.index()]
    }
}

/// Pearson correlations between dimensions, pooling records across all
/// conditions.
pub fn pearson_matrix(records: &[TlxRecord]) -> Result<CorrelationMatrix, TlxError> {
    if records.len() < 3 {
        return Err(TlxError::Invalid(format!(
            "correlation needs at least 3 records, got {}",
            records.len()
        )));
    }
    let columns: Vec<Vec<f64>> = Dimension::ALL
        .iter()
        .map(|&d| records.iter().map(|r| r.score(d)).collect())
        .collect();
    for (d, col) in Dimension::ALL.iter().zip(&columns) {
        if col.iter().all(|v| *v == col[0]) {
            return Err(TlxError::Degenerate(format!("dimension {d} is constant")));
        }
    }
    let mut r = [[0.0; 6]; 6];
    for i in 0..6 {
        r[i][i] = 1.0;
        for j in i + 1..6 {
            let v = pearson(&columns[i], &columns[j])?;
            r[i][j] = v;
            r[j][i] = v;
        }
    }
    Ok(CorrelationMatrix {
        dimensions: Dimension::ALL,
        r,
    })
}

/// One row per participant with a cell per requested condition, for
/// [`crate::stats::friedman_test`]. Participants are sorted by id.
pub fn blocks_for(records: &[TlxRecord], measure: Measure, conditions: &[Condition]) -> Result<Vec<Block>, TlxError> {
    let mut cells: BTreeMap<&str, HashMap<Condition, f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| conditions.contains(&r.condition)) {
        let row = cells.entry(&r.participant_id).or_default();
        if row.insert(r.condition, measure.of(r)).is_some() {
            return Err(TlxError::IncompleteDesign {
                participant: r.participant_id.clone(),
                problem: format!("has more than one {} record", r.condition),
            });
        }
    }
    Ok(cells
        .into_iter()
        .map(|(participant, row)| Block {
            participant: participant.to_string(),
            scores: conditions.iter().map(|c| row.get(c).copied()).collect(),
        })
        .collect())
}

/// Paired samples for two conditions; every participant must have both.
pub fn paired_for(
    records: &[TlxRecord],
    measure: Measure,
    first: Condition,
    second: Condition,
) -> Result<(Vec<f64>, Vec<f64>), TlxError> {
    let blocks = blocks_for(records, measure, &[first, second])?;
    let mut a = Vec::with_capacity(blocks.len());
    let mut b = Vec::with_capacity(blocks.len());
    for block in blocks {
        match (block.scores[0], block.scores[1]) {
            (Some(x), Some(y)) => {
                a.push(x);
                b.push(y);
            }
            _ => {
                return Err(TlxError::IncompleteDesign {
                    participant: block.participant,
                    problem: format!("lacks a {first} or {second} record"),
                })
            }
        }
    }
    Ok((a, b))
}

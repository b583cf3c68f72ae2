//! Plain-text tables for the CLI.

use std::fmt::Write;

use crate::analysis::{ConditionSummary, CorrelationMatrix, MeanSd};
use crate::record::Dimension;
use crate::stats::{Method, StatResult, Statistic};

fn mean_sd(m: &MeanSd) -> String {
    match m.sd {
        Some(sd) => format!("{:.2} ± {:.2}", m.mean, sd),
        None => format!("{:.2}", m.mean),
    }
}

fn render(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let pad = widths[c] - cell.chars().count();
                if c == 0 {
                    format!("{cell}{}", " ".repeat(pad))
                } else {
                    format!("{}{cell}", " ".repeat(pad))
                }
            })
            .collect();
        writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
    }
    out
}

pub fn summary_table(summaries: &[ConditionSummary]) -> String {
    let mut rows = vec![std::iter::once("condition".to_string())
        .chain(std::iter::once("n".to_string()))
        .chain(Dimension::ALL.iter().map(|d| d.to_string()))
        .chain(std::iter::once("composite".to_string()))
        .collect::<Vec<_>>()];
    for s in summaries {
        let mut row = vec![s.condition.to_string(), s.n.to_string()];
        row.extend(Dimension::ALL.iter().map(|d| mean_sd(&s.dimensions[d])));
        row.push(mean_sd(&s.composite));
        rows.push(row);
    }
    render(&rows)
}

pub fn correlation_table(m: &CorrelationMatrix) -> String {
    let mut rows = vec![std::iter::once(String::new())
        .chain(m.dimensions.iter().map(|d| d.to_string()))
        .collect::<Vec<_>>()];
    for (i, d) in m.dimensions.iter().enumerate() {
        let mut row = vec![d.to_string()];
        row.extend(m.r[i].iter().map(|v| format!("{v:.2}")));
        rows.push(row);
    }
    render(&rows)
}

pub fn stat_line(label: &str, r: &StatResult) -> String {
    let method = match r.method {
        Method::Exact => "exact",
        Method::Approximation => "approximation",
        Method::AllZero => "all-zero",
    };
    match r.statistic {
        Statistic::ChiSquared => format!(
            "{label}: chi2({}) = {:.2}, p = {:.4} [{method}, n = {}]\n",
            r.degrees_of_freedom.unwrap_or_default(),
            r.value,
            r.p_value,
            r.n
        ),
        Statistic::W => format!(
            "{label}: W = {:.1}, p = {:.4} [{method}, n = {}]\n",
            r.value, r.p_value, r.n
        ),
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use postedit_tlx::report::{correlation_table, stat_line, summary_table};
use postedit_tlx::{
    blocks_for, condition_summary, friedman_test, ingest_tlx_csv, paired_for, pearson_matrix, wilcoxon_signed_rank,
    Condition, Dimension, Measure, TlxError, DEFAULT_SCALE_MAX,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "tlx", about = "NASA-TLX workload analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(clap::Args)]
struct Common {
    /// TLX records CSV
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Upper end of the score scale (10, 20 or 100 are common)
    #[arg(long, default_value_t = DEFAULT_SCALE_MAX)]
    scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Per-condition mean ± SD for every dimension and the composite workload
    Summarize {
        #[command(flatten)]
        common: Common,
    },
    /// Pearson correlations between dimensions, pooled across conditions
    Correlate {
        #[command(flatten)]
        common: Common,
    },
    /// Friedman test across conditions, one dimension (or all when omitted)
    Friedman {
        #[command(flatten)]
        common: Common,
        /// Dimension name or "composite"
        #[arg(long)]
        dimension: Option<String>,
        /// Comma-separated conditions (default: all four)
        #[arg(long, value_delimiter = ',')]
        conditions: Vec<String>,
    },
    /// Wilcoxon signed-rank test between two conditions
    Wilcoxon {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dimension: Option<String>,
        /// Exactly two comma-separated conditions
        #[arg(long, value_delimiter = ',', required = true)]
        conditions: Vec<String>,
    },
}

fn measures(dimension: Option<&str>) -> Result<Vec<Measure>, TlxError> {
    match dimension {
        Some(d) => Ok(vec![d.parse()?]),
        None => Ok(Dimension::ALL
            .into_iter()
            .map(Measure::Dimension)
            .chain([Measure::Composite])
            .collect()),
    }
}

fn conditions(raw: &[String]) -> Result<Vec<Condition>, TlxError> {
    if raw.is_empty() {
        return Ok(Condition::ALL.to_vec());
    }
    raw.iter().map(|c| c.parse()).collect()
}

fn run(cli: Cli) -> Result<String, Box<dyn std::error::Error>> {
    let common = match &cli.command {
        Command::Summarize { common } | Command::Correlate { common } => common,
        Command::Friedman { common, .. } | Command::Wilcoxon { common, .. } => common,
    };
    let document =
        std::fs::read_to_string(&common.input).map_err(|e| format!("cannot read {}: {e}", common.input.display()))?;
    let records = ingest_tlx_csv(&document, common.scale)?;
    let as_json = matches!(common.format, Format::Json);

    let out = match &cli.command {
        Command::Summarize { .. } => {
            let summaries = condition_summary(&records);
            if as_json {
                serde_json::to_string_pretty(&summaries)?
            } else {
                summary_table(&summaries)
            }
        }
        Command::Correlate { .. } => {
            let matrix = pearson_matrix(&records)?;
            if as_json {
                serde_json::to_string_pretty(&matrix)?
            } else {
                correlation_table(&matrix)
            }
        }
        Command::Friedman {
            dimension,
            conditions: raw,
            ..
        } => {
            let conds = conditions(raw)?;
            let mut results = Vec::new();
            for m in measures(dimension.as_deref())? {
                results.push((m, friedman_test(&blocks_for(&records, m, &conds)?)?));
            }
            if as_json {
                let items: Vec<_> = results
                    .iter()
                    .map(|(m, r)| json!({"measure": m.to_string(), "result": r}))
                    .collect();
                serde_json::to_string_pretty(&items)?
            } else {
                results.iter().map(|(m, r)| stat_line(&m.to_string(), r)).collect()
            }
        }
        Command::Wilcoxon {
            dimension,
            conditions: raw,
            ..
        } => {
            let conds = conditions(raw)?;
            let [first, second] = conds[..] else {
                return Err("wilcoxon needs exactly two conditions".into());
            };
            let mut results = Vec::new();
            for m in measures(dimension.as_deref())? {
                let (a, b) = paired_for(&records, m, first, second)?;
                results.push((m, wilcoxon_signed_rank(&a, &b)?));
            }
            if as_json {
                let items: Vec<_> = results
                    .iter()
                    .map(|(m, r)| json!({"measure": m.to_string(), "conditions": [first, second], "result": r}))
                    .collect();
                serde_json::to_string_pretty(&items)?
            } else {
                results
                    .iter()
                    .map(|(m, r)| stat_line(&format!("{m} ({first} vs {second})"), r))
                    .collect()
            }
        }
    };
    Ok(out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            if !out.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

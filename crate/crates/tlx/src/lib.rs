//! NASA-TLX workload analysis for annotation-tool user studies.
//!
//! Records are one participant × condition row of six TLX scores. The crate
//! provides per-condition summaries, the unweighted composite workload
//! (Performance excluded), pooled Pearson correlations, and the Friedman
//! and Wilcoxon signed-rank tests.

pub mod analysis;
pub mod error;
pub mod record;
pub mod report;
pub mod stats;

pub use analysis::{
    blocks_for, condition_summary, paired_for, pearson_matrix, ConditionSummary, CorrelationMatrix, MeanSd,
};
pub use error::TlxError;
pub use record::{composite_workload, ingest_tlx_csv, Condition, Dimension, Measure, TlxRecord, DEFAULT_SCALE_MAX};
pub use stats::{friedman_matrix, friedman_test, pearson, wilcoxon_signed_rank, Block, Method, StatResult, Statistic};

//! TLX study records and CSV ingestion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::TlxError;

pub const DEFAULT_SCALE_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Excel,
    NoSuggestions,
    Xcomet,
    Ec1,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Excel,
        Condition::NoSuggestions,
        Condition::Xcomet,
        Condition::Ec1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Excel => "excel",
            Condition::NoSuggestions => "no_suggestions",
            Condition::Xcomet => "xcomet",
            Condition::Ec1 => "ec1",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Case-insensitive; spaces, hyphens and underscores are ignored, so
/// `"Excel"`, `"No Suggestions"` and `"EC-1"` are all accepted.
impl FromStr for Condition {
    type Err = TlxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "excel" => Ok(Condition::Excel),
            "nosuggestions" => Ok(Condition::NoSuggestions),
            "xcomet" => Ok(Condition::Xcomet),
            "ec1" => Ok(Condition::Ec1),
            _ => Err(TlxError::UnknownLabel {
                kind: "condition",
                value: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Mental,
    Physical,
    Temporal,
    Performance,
    Effort,
    Frustration,
}

impl Dimension {
    pub const ALL: [Dimension; 6] = [
        Dimension::Mental,
        Dimension::Physical,
        Dimension::Temporal,
        Dimension::Performance,
        Dimension::Effort,
        Dimension::Frustration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Mental => "mental",
            Dimension::Physical => "physical",
            Dimension::Temporal => "temporal",
            Dimension::Performance => "performance",
            Dimension::Effort => "effort",
            Dimension::Frustration => "frustration",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = TlxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        Dimension::ALL
            .into_iter()
            .find(|d| d.as_str() == key)
            .ok_or_else(|| TlxError::UnknownLabel {
                kind: "dimension",
                value: s.to_string(),
            })
    }
}

/// A per-record quantity that can be analysed: one raw dimension or the
/// composite workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Dimension(Dimension),
    Composite,
}

impl Measure {
    pub fn of(self, record: &TlxRecord) -> f64 {
        match self {
            Measure::Dimension(d) => record.score(d),
            Measure::Composite => record.composite_workload(),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Dimension(d) => d.fmt(f),
            Measure::Composite => f.write_str("composite"),
        }
    }
}

impl FromStr for Measure {
    type Err = TlxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("composite") {
            Ok(Measure::Composite)
        } else {
            s.parse().map(Measure::Dimension)
        }
    }
}

/// One participant's six TLX scores under one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TlxRecord {
    pub participant_id: String,
    pub condition: Condition,
    pub mental: f64,
    pub physical: f64,
    pub temporal: f64,
    pub performance: f64,
    pub effort: f64,
    pub frustration: f64,
}

impl TlxRecord {
    pub fn score(&self, dimension: Dimension) -> f64 {
        match dimension {
            Dimension::Mental => self.mental,
            Dimension::Physical => self.physical,
            Dimension::Temporal => self.temporal,
            Dimension::Performance => self.performance,
            Dimension::Effort => self.effort,
            Dimension::Frustration => self.frustration,
        }
    }

    pub fn scores(&self) -> [f64; 6] {
        Dimension::ALL.map(|d| self.score(d))
    }

    /// Unweighted sum of the five demand dimensions; Performance is left out.
    pub fn composite_workload(&self) -> f64 {
        self.mental + self.physical + self.temporal + self.effort + self.frustration
    }

    /// First dimension outside `[0, scale_max]` (or non-finite), if any.
    pub fn out_of_range(&self, scale_max: f64) -> Option<(Dimension, f64)> {
        Dimension::ALL
            .into_iter()
            .map(|d| (d, self.score(d)))
            .find(|(_, v)| !(v.is_finite() && (0.0..=scale_max).contains(v)))
    }
}

pub fn composite_workload(record: &TlxRecord) -> f64 {
    record.composite_workload()
}

pub const CSV_COLUMNS: [&str; 8] = [
    "participant_id",
    "condition",
    "mental",
    "physical",
    "temporal",
    "performance",
    "effort",
    "frustration",
];

/// Parse a header-driven TLX CSV export. Column order is free; extra
/// columns are ignored. `scale_max` bounds every score (default 10).
pub fn ingest_tlx_csv(document: &str, scale_max: f64) -> Result<Vec<TlxRecord>, TlxError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(document.as_bytes());
    let headers = reader.headers().map_err(|e| TlxError::Csv(e.to_string()))?.clone();
    let mut columns = [0usize; 8];
    for (slot, name) in columns.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
            .ok_or(TlxError::MissingColumn(name))?;
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| TlxError::Csv(e.to_string()))?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |i: usize| row.get(columns[i]).unwrap_or("");
        let row_err = |message: String| TlxError::Row { line, message };

        let participant_id = field(0).to_string();
        if participant_id.is_empty() {
            return Err(row_err("participant_id is empty".into()));
        }
        let condition: Condition = field(1).parse().map_err(|e: TlxError| row_err(e.to_string()))?;
        let mut scores = [0.0; 6];
        for (k, score) in scores.iter_mut().enumerate() {
            let raw = field(k + 2);
            *score = raw
                .parse()
                .map_err(|_| row_err(format!("{} is not a number: {raw:?}", CSV_COLUMNS[k + 2])))?;
        }
        let [mental, physical, temporal, performance, effort, frustration] = scores;
        let record = TlxRecord {
            participant_id,
            condition,
            mental,
            physical,
            temporal,
            performance,
            effort,
            frustration,
        };
        if let Some((dim, value)) = record.out_of_range(scale_max) {
            return Err(row_err(format!("{dim} score {value} outside [0, {scale_max}]")));
        }
        records.push(record);
    }
    Ok(records)
}

//! Service operations, independent of the HTTP layer.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use postedit_core::detection::{DetectionEngine, DetectionError, EngineRegistry, SanitizationReport};
use postedit_core::export::{self, ExportError, ExportRecord};
use postedit_core::{validate_annotation, Annotation, ErrorSpan, PairStatus, TranslationPair, Violation};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{audit, pair_snapshot_hash, AuditReport, CachedDetection, Store, StoreError, StoredAnnotationDoc};

pub const MAX_PAGE_SIZE: usize = 500;
pub const DEFAULT_PAGE_SIZE: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairInput {
    pub pair_id: String,
    /// Optional; must match the dataset in the request path when present.
    #[serde(default)]
    pub dataset_id: Option<String>,
    pub source_lang: String,
    pub target_lang: String,
    pub source_text: String,
    pub mt_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairProblem {
    pub index: usize,
    pub pair_id: String,
    pub problems: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0}")]
    BadRequest(String),
    #[error("unknown engine {requested:?}")]
    UnknownEngine {
        requested: Option<String>,
        available: Vec<String>,
    },
    #[error("{0}")]
    NotFound(String),
    #[error("pair ids already exist with different content")]
    PairConflict { pair_ids: Vec<String> },
    #[error("expected version {expected}, current version is {current_version}")]
    VersionConflict { expected: u64, current_version: u64 },
    #[error("invalid pairs; nothing was stored")]
    InvalidPairs { pairs: Vec<PairProblem> },
    #[error("annotation violates span invariants")]
    InvalidAnnotation { violations: Vec<Violation> },
    #[error("If-Match header with the expected annotation version is required")]
    PreconditionRequired,
    #[error("missing or unknown bearer token")]
    Unauthorized,
    #[error("{0}")]
    Forbidden(String),
    #[error(transparent)]
    Engine(DetectionError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Export(#[from] ExportError),
}

impl From<DetectionError> for ServiceError {
    fn from(e: DetectionError) -> Self {
        match e {
            DetectionError::UnknownEngine { requested, available } => ServiceError::UnknownEngine {
                requested: Some(requested),
                available,
            },
            other => ServiceError::Engine(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOutcome {
    pub dataset_id: String,
    /// Pairs newly stored by this request.
    pub ingested: usize,
    /// Pairs already present with identical content.
    pub unchanged: usize,
    /// Pairs in the dataset after the request.
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSummary {
    pub pair_id: String,
    pub source_lang: String,
    pub target_lang: String,
    pub status: PairStatus,
    pub detection_cached: bool,
    pub annotation_version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairPage {
    pub dataset_id: String,
    pub page: usize,
    pub page_size: usize,
    pub total: usize,
    pub total_pages: usize,
    pub items: Vec<PairSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairView {
    pub pair: TranslationPair,
    pub annotation: Option<Annotation>,
    pub cached_engines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionView {
    pub pair_id: String,
    pub engine_id: String,
    pub cached: bool,
    pub status: PairStatus,
    pub spans: Vec<ErrorSpan>,
    pub report: SanitizationReport,
    pub created_at: DateTime<Utc>,
}

/// Annotation body as submitted; the server fills in pair id, version and
/// timestamps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationInput {
    #[serde(default)]
    pub annotator_id: Option<String>,
    pub corrected_text: String,
    #[serde(default)]
    pub spans: Vec<ErrorSpan>,
    #[serde(default)]
    pub overall_score: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitOutcome {
    pub pair_id: String,
    pub version: u64,
    pub status: PairStatus,
    pub annotation: Annotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

impl ExportFormat {
    pub fn parse(s: &str) -> Result<Self, ServiceError> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(ServiceError::BadRequest(format!(
                "unsupported export format {other:?}; use json or csv"
            ))),
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::Json => "application/json",
            ExportFormat::Csv => "text/csv; charset=utf-8",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Json => "json",
            ExportFormat::Csv => "csv",
        }
    }
}

pub struct Service {
    store: Store,
    engines: EngineRegistry,
}

impl Service {
    pub fn new(store: Store, engines: EngineRegistry) -> Self {
        Service { store, engines }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn engine_names(&self) -> Vec<String> {
        self.engines.names()
    }

    pub fn ingest_pairs(&self, dataset_id: &str, inputs: Vec<PairInput>) -> Result<IngestOutcome, ServiceError> {
        if dataset_id.is_empty() {
            return Err(ServiceError::BadRequest("dataset_id must not be empty".into()));
        }
        let requested = inputs.len();
        let mut seen = BTreeSet::new();
        let duplicates: BTreeSet<&str> = inputs
            .iter()
            .map(|p| p.pair_id.as_str())
            .filter(|id| !seen.insert(*id))
            .collect();
        if !duplicates.is_empty() {
            let ids: Vec<&str> = duplicates.into_iter().collect();
            return Err(ServiceError::BadRequest(format!(
                "duplicate pair_id in request: {}",
                ids.join(", ")
            )));
        }

        let mut pairs = Vec::with_capacity(inputs.len());
        let mut invalid = Vec::new();
        for (index, input) in inputs.into_iter().enumerate() {
            let mut problems = Vec::new();
            if let Some(d) = input.dataset_id.as_deref().filter(|d| *d != dataset_id) {
                problems.push(format!("dataset_id {d:?} does not match {dataset_id:?}"));
            }
            let pair = TranslationPair {
                pair_id: input.pair_id,
                dataset_id: dataset_id.to_string(),
                source_lang: input.source_lang,
                target_lang: input.target_lang,
                source_text: input.source_text,
                mt_text: input.mt_text,
                status: PairStatus::Pending,
            };
            problems.extend(pair.problems());
            if problems.is_empty() {
                pairs.push(pair);
            } else {
                invalid.push(PairProblem {
                    index,
                    pair_id: pair.pair_id,
                    problems,
                });
            }
        }
        if !invalid.is_empty() {
            return Err(ServiceError::InvalidPairs { pairs: invalid });
        }

        self.store.update(|state| {
            let conflicts: Vec<String> = pairs
                .iter()
                .filter(|p| {
                    state
                        .pairs
                        .get(&p.pair_id)
                        .is_some_and(|existing| !existing.same_content(p))
                })
                .map(|p| p.pair_id.clone())
                .collect();
            if !conflicts.is_empty() {
                return Err(ServiceError::PairConflict { pair_ids: conflicts });
            }
            let index = state.datasets.entry(dataset_id.to_string()).or_default();
            let mut ingested = 0;
            for pair in &pairs {
                if index.insert(pair.pair_id.clone()) {
                    ingested += 1;
                }
            }
            let total = index.len();
            for pair in pairs {
                state.pairs.entry(pair.pair_id.clone()).or_insert(pair);
            }
            Ok(IngestOutcome {
                dataset_id: dataset_id.to_string(),
                unchanged: requested - ingested,
                ingested,
                total,
            })
        })
    }

    pub fn list_pairs(
        &self,
        dataset_id: &str,
        status: Option<PairStatus>,
        page: usize,
        page_size: usize,
    ) -> Result<PairPage, ServiceError> {
        if page == 0 {
            return Err(ServiceError::BadRequest("page is 1-based".into()));
        }
        if !(1..=MAX_PAGE_SIZE).contains(&page_size) {
            return Err(ServiceError::BadRequest(format!(
                "page_size must be in [1, {MAX_PAGE_SIZE}]"
            )));
        }
        let state = self.store.snapshot();
        let ids = state
            .datasets
            .get(dataset_id)
            .ok_or_else(|| ServiceError::NotFound(format!("unknown dataset {dataset_id:?}")))?;
        let matching: Vec<&TranslationPair> = ids
            .iter()
            .filter_map(|id| state.pairs.get(id))
            .filter(|p| status.is_none_or(|s| p.status == s))
            .collect();
        let total = matching.len();
        let items = matching
            .into_iter()
            .skip((page - 1).saturating_mul(page_size))
            .take(page_size)
            .map(|p| PairSummary {
                pair_id: p.pair_id.clone(),
                source_lang: p.source_lang.clone(),
                target_lang: p.target_lang.clone(),
                status: p.status,
                detection_cached: state.detections.get(&p.pair_id).is_some_and(|d| !d.is_empty()),
                annotation_version: state.annotations.get(&p.pair_id).map_or(0, |d| d.annotation.version),
            })
            .collect();
        Ok(PairPage {
            dataset_id: dataset_id.to_string(),
            page,
            page_size,
            total,
            total_pages: total.div_ceil(page_size),
            items,
        })
    }

    pub fn get_pair(&self, pair_id: &str) -> Result<PairView, ServiceError> {
        let state = self.store.snapshot();
        let pair = state.pairs.get(pair_id).ok_or_else(|| pair_not_found(pair_id))?;
        Ok(PairView {
            pair: pair.clone(),
            annotation: state.annotations.get(pair_id).map(|d| d.annotation.clone()),
            cached_engines: state
                .detections
                .get(pair_id)
                .map(|d| d.keys().cloned().collect())
                .unwrap_or_default(),
        })
    }

    /// Run (or reuse) detection. The engine call happens outside the store's
    /// write lock; only the cache insert and status change are serialized.
    pub async fn run_detection(
        &self,
        pair_id: &str,
        engine_id: Option<&str>,
        force: bool,
    ) -> Result<DetectionView, ServiceError> {
        let snapshot = self.store.snapshot();
        let pair = snapshot.pairs.get(pair_id).ok_or_else(|| pair_not_found(pair_id))?;
        let engine_id = engine_id
            .filter(|e| !e.is_empty())
            .ok_or_else(|| ServiceError::UnknownEngine {
                requested: None,
                available: self.engines.names(),
            })?;
        let engine: &dyn DetectionEngine = self.engines.get(engine_id)?.as_ref();

        if !force {
            if let Some(hit) = snapshot.detections.get(pair_id).and_then(|d| d.get(engine_id)) {
                return Ok(view(pair_id, pair.status, hit.clone(), true));
            }
        }

        let (spans, report) = engine.detect(pair).await?;
        let entry = CachedDetection {
            engine_id: engine_id.to_string(),
            spans,
            report,
            created_at: Utc::now(),
        };
        self.store.update(|state| {
            let pair = state.pairs.get_mut(pair_id).ok_or_else(|| pair_not_found(pair_id))?;
            pair.status = pair.status.advance(PairStatus::InProgress);
            let status = pair.status;
            state
                .detections
                .entry(pair_id.to_string())
                .or_default()
                .insert(engine_id.to_string(), entry.clone());
            Ok(view(pair_id, status, entry, false))
        })
    }

    /// Store `input` iff `expected_version` equals the stored version
    /// (0 before the first write). `authenticated` is the annotator bound
    /// to the caller's token, when auth is enabled.
    pub fn submit_annotation(
        &self,
        pair_id: &str,
        input: AnnotationInput,
        expected_version: u64,
        authenticated: Option<&str>,
    ) -> Result<SubmitOutcome, ServiceError> {
        let annotator_id = match (authenticated, input.annotator_id.as_deref()) {
            (Some(who), Some(claimed)) if who != claimed => {
                return Err(ServiceError::Forbidden(format!(
                    "token belongs to {who:?}, not {claimed:?}"
                )));
            }
            (Some(who), _) => who.to_string(),
            (None, Some(claimed)) if !claimed.is_empty() => claimed.to_string(),
            (None, _) => return Err(ServiceError::BadRequest("annotator_id is required".into())),
        };

        self.store.update(|state| {
            let pair = state.pairs.get(pair_id).ok_or_else(|| pair_not_found(pair_id))?;
            let previous = state.annotations.get(pair_id).map(|d| &d.annotation);
            let current_version = previous.map_or(0, |a| a.version);
            let now = Utc::now();
            let annotation = Annotation {
                pair_id: pair_id.to_string(),
                annotator_id,
                corrected_text: input.corrected_text,
                spans: input.spans,
                overall_score: input.overall_score,
                created_at: previous.map_or(now, |a| a.created_at),
                updated_at: now,
                version: current_version + 1,
            };
            let violations = validate_annotation(&annotation, pair);
            if !violations.is_empty() {
                return Err(ServiceError::InvalidAnnotation { violations });
            }
            if expected_version != current_version {
                return Err(ServiceError::VersionConflict {
                    expected: expected_version,
                    current_version,
                });
            }
            let pair_hash = pair_snapshot_hash(pair);
            let pair = state.pairs.get_mut(pair_id).expect("checked above");
            pair.status = pair.status.advance(PairStatus::Completed);
            let status = pair.status;
            state.annotations.insert(
                pair_id.to_string(),
                StoredAnnotationDoc {
                    annotation: annotation.clone(),
                    pair_hash,
                },
            );
            Ok(SubmitOutcome {
                pair_id: pair_id.to_string(),
                version: annotation.version,
                status,
                annotation,
            })
        })
    }

    /// Completed pairs of the dataset, ordered by pair_id.
    pub fn export_records(&self, dataset_id: &str) -> Result<Vec<ExportRecord>, ServiceError> {
        let state = self.store.snapshot();
        let ids = state
            .datasets
            .get(dataset_id)
            .ok_or_else(|| ServiceError::NotFound(format!("unknown dataset {dataset_id:?}")))?;
        Ok(ids
            .iter()
            .filter_map(|id| Some((state.pairs.get(id)?, state.annotations.get(id)?)))
            .filter(|(pair, _)| pair.status == PairStatus::Completed)
            .map(|(pair, doc)| ExportRecord::from_annotation(pair, &doc.annotation))
            .collect())
    }

    pub fn export_dataset(&self, dataset_id: &str, format: ExportFormat) -> Result<String, ServiceError> {
        let records = self.export_records(dataset_id)?;
        Ok(match format {
            ExportFormat::Json => export::to_json(&records)?,
            ExportFormat::Csv => export::to_csv(&records)?,
        })
    }

    pub fn audit(&self) -> AuditReport {
        audit(&self.store.snapshot())
    }
}

fn pair_not_found(pair_id: &str) -> ServiceError {
    ServiceError::NotFound(format!("unknown pair {pair_id:?}"))
}

fn view(pair_id: &str, status: PairStatus, entry: CachedDetection, cached: bool) -> DetectionView {
    DetectionView {
        pair_id: pair_id.to_string(),
        engine_id: entry.engine_id,
        cached,
        status,
        spans: entry.spans,
        report: entry.report,
        created_at: entry.created_at,
    }
}

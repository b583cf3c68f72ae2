//! Document store behind the service.
//!
//! All state lives in one [`StoreState`] value. Readers take a cheap
//! snapshot (an `Arc` clone); writers are serialized, build the next state
//! from a copy, persist it through the configured [`Persistence`] backend
//! and only then publish it. A failed write leaves the published state
//! untouched.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, PoisonError, RwLock};

use chrono::{DateTime, Utc};
use postedit_core::detection::SanitizationReport;
use postedit_core::{validate_annotation, Annotation, ErrorSpan, PairStatus, TranslationPair, Violation};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// An annotation plus the hash of the pair it was written against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredAnnotationDoc {
    pub annotation: Annotation,
    pub pair_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedDetection {
    pub engine_id: String,
    pub spans: Vec<ErrorSpan>,
    pub report: SanitizationReport,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreState {
    /// dataset_id → pair ids.
    pub datasets: BTreeMap<String, BTreeSet<String>>,
    pub pairs: BTreeMap<String, TranslationPair>,
    pub annotations: BTreeMap<String, StoredAnnotationDoc>,
    /// pair_id → engine_id → cached result.
    pub detections: BTreeMap<String, BTreeMap<String, CachedDetection>>,
}

/// SHA-256 over the pair's content fields (status excluded), lowercase hex.
pub fn pair_snapshot_hash(pair: &TranslationPair) -> String {
    let content = serde_json::json!([
        pair.pair_id,
        pair.dataset_id,
        pair.source_lang,
        pair.target_lang,
        pair.source_text,
        pair.mt_text,
    ]);
    format!("{:x}", Sha256::digest(content.to_string().as_bytes()))
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("store file {path} is corrupt: {source}")]
    Corrupt { path: PathBuf, source: serde_json::Error },
}

pub trait Persistence: Send + Sync {
    fn load(&self) -> Result<StoreState, StoreError>;
    fn save(&self, state: &StoreState) -> Result<(), StoreError>;
}

/// Nothing survives a restart.
pub struct MemoryPersistence;

impl Persistence for MemoryPersistence {
    fn load(&self) -> Result<StoreState, StoreError> {
        Ok(StoreState::default())
    }

    fn save(&self, _: &StoreState) -> Result<(), StoreError> {
        Ok(())
    }
}

/// Whole state as one pretty-printed JSON file, replaced atomically
/// (write to a sibling temp file, fsync, rename).
pub struct FilePersistence {
    path: PathBuf,
}

impl FilePersistence {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        FilePersistence { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn io(&self, source: std::io::Error) -> StoreError {
        StoreError::Io {
            path: self.path.clone(),
            source,
        }
    }
}

pub fn encode_state(state: &StoreState) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(state).expect("store state always serializes");
    bytes.push(b'\n');
    bytes
}

impl Persistence for FilePersistence {
    fn load(&self) -> Result<StoreState, StoreError> {
        match fs::read(&self.path) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|source| StoreError::Corrupt {
                path: self.path.clone(),
                source,
            }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(StoreState::default()),
            Err(e) => Err(self.io(e)),
        }
    }

    fn save(&self, state: &StoreState) -> Result<(), StoreError> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| self.io(e))?;
        }
        let mut tmp_name = self.path.file_name().unwrap_or_default().to_os_string();
        tmp_name.push(".tmp");
        let tmp = self.path.with_file_name(tmp_name);
        let mut file = fs::File::create(&tmp).map_err(|e| self.io(e))?;
        file.write_all(&encode_state(state)).map_err(|e| self.io(e))?;
        file.sync_all().map_err(|e| self.io(e))?;
        fs::rename(&tmp, &self.path).map_err(|e| self.io(e))
    }
}

pub struct Store {
    current: RwLock<Arc<StoreState>>,
    writer: Mutex<()>,
    backend: Box<dyn Persistence>,
}

impl Store {
    pub fn open(backend: Box<dyn Persistence>) -> Result<Self, StoreError> {
        let state = backend.load()?;
        Ok(Store {
            current: RwLock::new(Arc::new(state)),
            writer: Mutex::new(()),
            backend,
        })
    }

    pub fn memory() -> Self {
        Store::open(Box::new(MemoryPersistence)).expect("memory store cannot fail")
    }

    pub fn file(path: impl Into<PathBuf>) -> Result<Self, StoreError> {
        Store::open(Box::new(FilePersistence::new(path)))
    }

    pub fn snapshot(&self) -> Arc<StoreState> {
        self.current.read().unwrap_or_else(PoisonError::into_inner).clone()
    }

    /// Apply `f` to a copy of the state and publish it if `f` succeeds.
    /// Writes are serialized; an unchanged state is not re-persisted.
    pub fn update<T, E>(&self, f: impl FnOnce(&mut StoreState) -> Result<T, E>) -> Result<T, E>
    where
        E: From<StoreError>,
    {
        let _guard = self.writer.lock().unwrap_or_else(PoisonError::into_inner);
        let current = self.snapshot();
        let mut next = (*current).clone();
        let out = f(&mut next)?;
        if next != *current {
            self.backend.save(&next)?;
            *self.current.write().unwrap_or_else(PoisonError::into_inner) = Arc::new(next);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditProblem {
    AnnotationWithoutPair {
        pair_id: String,
    },
    AnnotationKeyMismatch {
        pair_id: String,
        annotation_pair_id: String,
    },
    PairHashMismatch {
        pair_id: String,
    },
    InvalidAnnotation {
        pair_id: String,
        violations: Vec<Violation>,
    },
    CompletedWithoutAnnotation {
        pair_id: String,
    },
    PairNotIndexed {
        pair_id: String,
        dataset_id: String,
    },
    DanglingIndexEntry {
        dataset_id: String,
        pair_id: String,
    },
    DetectionWithoutPair {
        pair_id: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub datasets: usize,
    pub pairs: usize,
    pub annotations: usize,
    pub cached_detections: usize,
    pub problems: Vec<AuditProblem>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Scan the whole state for broken invariants.
pub fn audit(state: &StoreState) -> AuditReport {
    let mut problems = Vec::new();
    for (pair_id, doc) in &state.annotations {
        if doc.annotation.pair_id != *pair_id {
            problems.push(AuditProblem::AnnotationKeyMismatch {
                pair_id: pair_id.clone(),
                annotation_pair_id: doc.annotation.pair_id.clone(),
            });
        }
        let Some(pair) = state.pairs.get(pair_id) else {
            problems.push(AuditProblem::AnnotationWithoutPair {
                pair_id: pair_id.clone(),
            });
            continue;
        };
        if doc.pair_hash != pair_snapshot_hash(pair) {
            problems.push(AuditProblem::PairHashMismatch {
                pair_id: pair_id.clone(),
            });
        }
        let violations = validate_annotation(&doc.annotation, pair);
        if !violations.is_empty() {
            problems.push(AuditProblem::InvalidAnnotation {
                pair_id: pair_id.clone(),
                violations,
            });
        }
    }
    for (pair_id, pair) in &state.pairs {
        if pair.status == PairStatus::Completed && !state.annotations.contains_key(pair_id) {
            problems.push(AuditProblem::CompletedWithoutAnnotation {
                pair_id: pair_id.clone(),
            });
        }
        if !state
            .datasets
            .get(&pair.dataset_id)
            .is_some_and(|ids| ids.contains(pair_id))
        {
            problems.push(AuditProblem::PairNotIndexed {
                pair_id: pair_id.clone(),
                dataset_id: pair.dataset_id.clone(),
            });
        }
    }
    for (dataset_id, ids) in &state.datasets {
        for pair_id in ids {
            if state.pairs.get(pair_id).is_none_or(|p| p.dataset_id != *dataset_id) {
                problems.push(AuditProblem::DanglingIndexEntry {
                    dataset_id: dataset_id.clone(),
                    pair_id: pair_id.clone(),
                });
            }
        }
    }
    for pair_id in state.detections.keys() {
        if !state.pairs.contains_key(pair_id) {
            problems.push(AuditProblem::DetectionWithoutPair {
                pair_id: pair_id.clone(),
            });
        }
    }
    AuditReport {
        datasets: state.datasets.len(),
        pairs: state.pairs.len(),
        annotations: state.annotations.len(),
        cached_detections: state.detections.values().map(BTreeMap::len).sum(),
        problems,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(id: &str) -> TranslationPair {
        TranslationPair {
            pair_id: id.into(),
            dataset_id: "d".into(),
            source_lang: "en".into(),
            target_lang: "ja".into(),
            source_text: "Hello".into(),
            mt_text: "こんにちは".into(),
            status: PairStatus::Pending,
        }
    }

    fn insert(state: &mut StoreState, p: TranslationPair) {
        state
            .datasets
            .entry(p.dataset_id.clone())
            .or_default()
            .insert(p.pair_id.clone());
        state.pairs.insert(p.pair_id.clone(), p);
    }

    #[test]
    fn hash_ignores_status_but_not_text() {
        let a = pair("p");
        let mut b = a.clone();
        b.status = PairStatus::Completed;
        assert_eq!(pair_snapshot_hash(&a), pair_snapshot_hash(&b));
        b.mt_text.push('!');
        assert_ne!(pair_snapshot_hash(&a), pair_snapshot_hash(&b));
        assert_eq!(pair_snapshot_hash(&a).len(), 64);
    }

    #[test]
    fn failed_update_publishes_nothing() {
        let store = Store::memory();
        let r: Result<(), StoreError> = store.update(|s| {
            insert(s, pair("p"));
            Err(StoreError::Io {
                path: "x".into(),
                source: std::io::Error::other("boom"),
            })
        });
        assert!(r.is_err());
        assert!(store.snapshot().pairs.is_empty());
    }

    #[test]
    fn file_store_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/store.json");
        let store = Store::file(&path).unwrap();
        store
            .update(|s| {
                insert(s, pair("p"));
                Ok::<_, StoreError>(())
            })
            .unwrap();
        let bytes = fs::read(&path).unwrap();
        let reopened = Store::file(&path).unwrap();
        assert_eq!(*reopened.snapshot(), *store.snapshot());
        assert_eq!(fs::read(&path).unwrap(), bytes);
        assert!(!path.with_file_name("store.json.tmp").exists());
    }

    #[test]
    fn corrupt_file_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.json");
        fs::write(&path, "{not json").unwrap();
        assert!(matches!(Store::file(&path), Err(StoreError::Corrupt { .. })));
    }

    #[test]
    fn audit_flags_tampered_pair() {
        let mut state = StoreState::default();
        let p = pair("p");
        insert(&mut state, p.clone());
        let annotation = Annotation::draft(&p, "alice");
        state.annotations.insert(
            "p".into(),
            StoredAnnotationDoc {
                annotation,
                pair_hash: pair_snapshot_hash(&p),
            },
        );
        assert!(audit(&state).is_clean());
        state.pairs.get_mut("p").unwrap().mt_text = "changed".into();
        assert_eq!(
            audit(&state).problems,
            vec![AuditProblem::PairHashMismatch { pair_id: "p".into() }]
        );
    }

    #[test]
    fn audit_flags_index_drift() {
        let mut state = StoreState::default();
        state.pairs.insert("p".into(), pair("p"));
        state.datasets.entry("other".into()).or_default().insert("q".into());
        let kinds: Vec<_> = audit(&state).problems;
        assert_eq!(kinds.len(), 2);
    }
}

//! Detection engines: a deterministic stub, an LLM chat endpoint, and a
//! local sidecar speaking the raw span wire schema.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;
use tokio::sync::Semaphore;

use super::prompt::build_ec1_prompt;
use super::sanitize::{sanitize_spans, SanitizationReport};
use super::wire::{parse_ec1_response, FormatError, RawDetectedSpan};
use crate::annotation::TranslationPair;
use crate::span::{ErrorCategory, ErrorSpan, Severity};
use crate::text::{code_point_length, find_code_point};

/// Minimum token length (code points) flagged by the stub engine.
pub const STUB_MIN_TOKEN_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    /// OpenAI-style chat completion endpoint prompted with the EC-1 prompt.
    Llm,
    /// Local model server answering directly with `{"error_spans": [...]}`.
    Sidecar,
    Stub,
}

fn default_timeout() -> f64 {
    30.0
}

fn default_backoff() -> u64 {
    250
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub engine_id: String,
    pub kind: EngineKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    /// Name of the environment variable holding the API key.
    #[serde(default)]
    pub credential_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default)]
    pub max_retries: u32,
    #[serde(default = "default_backoff")]
    pub backoff_base_ms: u64,
    #[serde(default)]
    pub max_in_flight: Option<usize>,
}

impl EngineConfig {
    pub fn stub(engine_id: impl Into<String>) -> Self {
        EngineConfig {
            engine_id: engine_id.into(),
            kind: EngineKind::Stub,
            endpoint: None,
            model: None,
            credential_env: None,
            timeout_secs: default_timeout(),
            max_retries: 0,
            backoff_base_ms: default_backoff(),
            max_in_flight: None,
        }
    }

    pub fn validate(&self) -> Result<(), DetectionError> {
        let bad = |msg: &str| Err(DetectionError::Config(format!("engine {:?}: {msg}", self.engine_id)));
        if self.engine_id.is_empty() {
            return bad("engine_id must not be empty");
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return bad("timeout_secs must be positive");
        }
        if self.max_in_flight == Some(0) {
            return bad("max_in_flight must be at least 1");
        }
        if self.kind != EngineKind::Stub && self.endpoint.as_deref().unwrap_or("").is_empty() {
            return bad("endpoint is required");
        }
        if self.kind == EngineKind::Llm && self.model.as_deref().unwrap_or("").is_empty() {
            return bad("model is required for llm engines");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DetectionError {
    #[error("unknown engine {requested:?}; available: {}", .available.join(", "))]
    UnknownEngine { requested: String, available: Vec<String> },

    #[error("engine {engine} unavailable after {attempts} attempt(s): {message}")]
    Unavailable {
        engine: String,
        attempts: u32,
        message: String,
    },

    #[error("engine {engine} returned HTTP {status}")]
    Upstream { engine: String, status: u16, body: String },

    #[error("engine {engine} returned an unusable response: {error}")]
    Format {
        engine: String,
        error: FormatError,
        raw_body: String,
    },

    #[error("invalid engine configuration: {0}")]
    Config(String),
}

pub type Detection = (Vec<ErrorSpan>, SanitizationReport);

#[async_trait]
pub trait DetectionEngine: Send + Sync {
    fn id(&self) -> &str;

    /// Raw spans for `pair`, before sanitization.
    async fn raw_spans(&self, pair: &TranslationPair) -> Result<Vec<RawDetectedSpan>, DetectionError>;

    async fn detect(&self, pair: &TranslationPair) -> Result<Detection, DetectionError> {
        let raw = self.raw_spans(pair).await?;
        Ok(sanitize_spans(&raw, pair))
    }
}

/// Flags source tokens copied verbatim into the translation.
///
/// Every whitespace-delimited source token of at least
/// [`STUB_MIN_TOKEN_LEN`] code points that also appears in the MT text
/// becomes an `Untranslated`/`Minor` span over the first occurrence on each
/// side.
#[derive(Debug, Clone)]
pub struct StubEngine {
    id: String,
}

impl StubEngine {
    pub fn new(id: impl Into<String>) -> Self {
        StubEngine { id: id.into() }
    }

    pub fn raw_for(pair: &TranslationPair) -> Vec<RawDetectedSpan> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut token_start = None;
        // walk code points so token offsets are already in code-point units
        let chars: Vec<char> = pair.source_text.chars().collect();
        for (i, ch) in chars.iter().chain(std::iter::once(&' ')).enumerate() {
            if ch.is_whitespace() {
                if let Some(start) = token_start.take() {
                    let token: String = chars[start..i].iter().collect();
                    if i - start >= STUB_MIN_TOKEN_LEN && seen.insert(token.clone()) {
                        if let Some(mt_start) = find_code_point(&pair.mt_text, &token) {
                            let len = code_point_length(&token) as i64;
                            out.push(RawDetectedSpan {
                                correct_text: format!(
                                    "Source token \"{token}\" is copied into the translation unchanged."
                                ),
                                original_text: token,
                                error_type: ErrorCategory::Untranslated.as_str().into(),
                                error_severity: Severity::Minor.as_str().into(),
                                start_index_orig: start as i64,
                                end_index_orig: start as i64 + len,
                                start_index_translation: mt_start as i64,
                                end_index_translation: mt_start as i64 + len,
                            });
                        }
                    }
                }
            } else if token_start.is_none() {
                token_start = Some(i);
            }
        }
        out
    }
}

#[async_trait]
impl DetectionEngine for StubEngine {
    fn id(&self) -> &str {
        &self.id
    }

    async fn raw_spans(&self, pair: &TranslationPair) -> Result<Vec<RawDetectedSpan>, DetectionError> {
        Ok(Self::raw_for(pair))
    }
}

#[derive(Debug, Default)]
pub struct EngineMetrics {
    pub requests: AtomicU64,
    pub retries: AtomicU64,
    pub failures: AtomicU64,
}

/// Engine backed by an HTTP endpoint (LLM chat API or local sidecar).
pub struct HttpEngine {
    config: EngineConfig,
    client: reqwest::Client,
    in_flight: Option<Arc<Semaphore>>,
    metrics: EngineMetrics,
}

enum Attempt {
    Retry(String, Option<(u16, String)>),
    Fatal(DetectionError),
}

impl HttpEngine {
    pub fn new(config: EngineConfig) -> Result<Self, DetectionError> {
        config.validate()?;
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| DetectionError::Config(e.to_string()))?;
        Ok(HttpEngine {
            in_flight: config.max_in_flight.map(|n| Arc::new(Semaphore::new(n))),
            config,
            client,
            metrics: EngineMetrics::default(),
        })
    }

    pub fn metrics(&self) -> &EngineMetrics {
        &self.metrics
    }

    fn request_body(&self, pair: &TranslationPair) -> Value {
        match self.config.kind {
            EngineKind::Llm => json!({
                "model": self.config.model,
                "temperature": 0,
                "response_format": {"type": "json_object"},
                "messages": [{"role": "user", "content": build_ec1_prompt(pair)}],
            }),
            _ => json!({
                "source_lang": pair.source_lang,
                "target_lang": pair.target_lang,
                "source_text": pair.source_text,
                "mt_text": pair.mt_text,
            }),
        }
    }

    async fn attempt(&self, body: &Value) -> Result<String, Attempt> {
        let endpoint = self.config.endpoint.as_deref().unwrap_or_default();
        let mut req = self.client.post(endpoint).json(body);
        if let Some(var) = &self.config.credential_env {
            match std::env::var(var) {
                Ok(secret) => req = req.bearer_auth(secret),
                Err(_) => {
                    return Err(Attempt::Fatal(DetectionError::Config(format!(
                        "credential variable {var} is not set"
                    ))))
                }
            }
        }
        let resp = req.send().await.map_err(|e| Attempt::Retry(describe(&e), None))?;
        let status = resp.status();
        let text = resp.text().await.map_err(|e| Attempt::Retry(describe(&e), None))?;
        if status.is_success() {
            return Ok(text);
        }
        let code = status.as_u16();
        if status.is_server_error() || code == 429 {
            Err(Attempt::Retry(format!("HTTP {code}"), Some((code, text))))
        } else {
            Err(Attempt::Fatal(DetectionError::Upstream {
                engine: self.config.engine_id.clone(),
                status: code,
                body: text,
            }))
        }
    }

    fn extract(&self, body: &str) -> Result<Vec<RawDetectedSpan>, DetectionError> {
        let format_err = |error: FormatError| DetectionError::Format {
            engine: self.config.engine_id.clone(),
            error,
            raw_body: body.to_string(),
        };
        if self.config.kind == EngineKind::Llm {
            // chat completion envelope: the span document is the message content
            if let Ok(envelope) = serde_json::from_str::<Value>(body) {
                if let Some(content) = envelope.pointer("/choices/0/message/content").and_then(Value::as_str) {
                    return parse_ec1_response(content).map_err(format_err);
                }
            }
        }
        parse_ec1_response(body).map_err(format_err)
    }
}

fn describe(e: &reqwest::Error) -> String {
    if e.is_timeout() {
        "timed out".into()
    } else if e.is_connect() {
        "connection failed".into()
    } else {
        // the URL may carry query credentials
        let msg = e.to_string();
        match e.url() {
            Some(url) => msg.replace(url.as_str(), "<endpoint>"),
            None => msg,
        }
    }
}

#[async_trait]
impl DetectionEngine for HttpEngine {
    fn id(&self) -> &str {
        &self.config.engine_id
    }

    async fn raw_spans(&self, pair: &TranslationPair) -> Result<Vec<RawDetectedSpan>, DetectionError> {
        let _permit = match &self.in_flight {
            Some(sem) => Some(sem.clone().acquire_owned().await.expect("semaphore never closed")),
            None => None,
        };
        let body = self.request_body(pair);
        let mut attempts = 0;
        loop {
            attempts += 1;
            self.metrics.requests.fetch_add(1, Ordering::Relaxed);
            match self.attempt(&body).await {
                Ok(text) => return self.extract(&text),
                Err(Attempt::Fatal(e)) => {
                    self.metrics.failures.fetch_add(1, Ordering::Relaxed);
                    return Err(e);
                }
                Err(Attempt::Retry(message, status)) => {
                    if attempts > self.config.max_retries {
                        self.metrics.failures.fetch_add(1, Ordering::Relaxed);
                        let engine = self.config.engine_id.clone();
                        return Err(match status {
                            Some((status, body)) => DetectionError::Upstream { engine, status, body },
                            None => DetectionError::Unavailable {
                                engine,
                                attempts,
                                message,
                            },
                        });
                    }
                    self.metrics.retries.fetch_add(1, Ordering::Relaxed);
                    let wait = self.config.backoff_base_ms.saturating_mul(1 << (attempts - 1).min(16));
                    tracing::debug!(engine = %self.config.engine_id, attempts, wait_ms = wait, "retrying detection call");
                    tokio::time::sleep(Duration::from_millis(wait)).await;
                }
            }
        }
    }
}

/// Engines by id, in sorted order.
#[derive(Clone, Default)]
pub struct EngineRegistry {
    engines: BTreeMap<String, Arc<dyn DetectionEngine>>,
}

impl EngineRegistry {
    pub fn from_configs(configs: &[EngineConfig]) -> Result<Self, DetectionError> {
        let mut registry = EngineRegistry::default();
        for config in configs {
            config.validate()?;
            let engine: Arc<dyn DetectionEngine> = match config.kind {
                EngineKind::Stub => Arc::new(StubEngine::new(config.engine_id.clone())),
                EngineKind::Llm | EngineKind::Sidecar => Arc::new(HttpEngine::new(config.clone())?),
            };
            if registry.engines.insert(config.engine_id.clone(), engine).is_some() {
                return Err(DetectionError::Config(format!(
                    "duplicate engine id {:?}",
                    config.engine_id
                )));
            }
        }
        Ok(registry)
    }

    pub fn register(&mut self, engine: Arc<dyn DetectionEngine>) {
        self.engines.insert(engine.id().to_string(), engine);
    }

    pub fn names(&self) -> Vec<String> {
        self.engines.keys().cloned().collect()
    }

    pub fn get(&self, engine_id: &str) -> Result<&Arc<dyn DetectionEngine>, DetectionError> {
        self.engines
            .get(engine_id)
            .ok_or_else(|| DetectionError::UnknownEngine {
                requested: engine_id.to_string(),
                available: self.names(),
            })
    }

    pub fn is_empty(&self) -> bool {
        self.engines.is_empty()
    }
}

/// A pair plus the engine asked to inspect it.
#[derive(Debug, Clone)]
pub struct DetectionRequest {
    pub pair: TranslationPair,
    pub engine_id: String,
}

pub async fn detect(registry: &EngineRegistry, request: &DetectionRequest) -> Result<Detection, DetectionError> {
    registry.get(&request.engine_id)?.detect(&request.pair).await
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::PairStatus;
    use crate::span::CharRange;

    fn pair(source: &str, mt: &str) -> TranslationPair {
        TranslationPair {
            pair_id: "p".into(),
            dataset_id: "d".into(),
            source_lang: "en".into(),
            target_lang: "de".into(),
            source_text: source.into(),
            mt_text: mt.into(),
            status: PairStatus::Pending,
        }
    }

    #[tokio::test]
    async fn stub_flags_copied_token() {
        let p = pair("Please open the Dashboard now", "Bitte öffnen Sie jetzt das Dashboard");
        let (spans, report) = StubEngine::new("stub").detect(&p).await.unwrap();
        assert_eq!(spans.len(), 1);
        let s = &spans[0];
        assert_eq!(s.category, ErrorCategory::Untranslated);
        assert_eq!(s.severity, Severity::Minor);
        assert_eq!(s.source_range, Some(CharRange::new(16, 25).unwrap()));
        assert_eq!(s.translation_range, CharRange::new(27, 36).unwrap());
        assert_eq!(report.accepted, 1);
    }

    #[tokio::test]
    async fn stub_ignores_short_and_untouched_tokens() {
        let p = pair("the cat sat on a warm mat", "le chat était assis sur un tapis chaud");
        let (spans, _) = StubEngine::new("stub").detect(&p).await.unwrap();
        assert!(spans.is_empty());
    }

    #[tokio::test]
    async fn stub_uses_code_point_offsets() {
        let p = pair("日本語 Tokyo", "東京 Tokyo");
        let (spans, _) = StubEngine::new("stub").detect(&p).await.unwrap();
        assert_eq!(spans[0].source_range, Some(CharRange::new(4, 9).unwrap()));
        assert_eq!(spans[0].translation_range, CharRange::new(3, 8).unwrap());
    }

    #[test]
    fn config_validation() {
        let mut c = EngineConfig::stub("s");
        assert!(c.validate().is_ok());
        c.timeout_secs = 0.0;
        assert!(c.validate().is_err());
        let mut llm = EngineConfig::stub("ec1");
        llm.kind = EngineKind::Llm;
        assert!(llm.validate().is_err());
        llm.endpoint = Some("http://localhost:1".into());
        llm.model = Some("gpt-4o".into());
        assert!(llm.validate().is_ok());
    }

    #[test]
    fn unknown_engine_lists_available() {
        let reg = EngineRegistry::from_configs(&[EngineConfig::stub("stub"), EngineConfig::stub("alt")]).unwrap();
        match reg.get("nope") {
            Err(DetectionError::UnknownEngine { available, .. }) => assert_eq!(available, vec!["alt", "stub"]),
            _ => panic!("expected unknown engine"),
        }
    }

    #[test]
    fn duplicate_engine_ids_rejected() {
        assert!(EngineRegistry::from_configs(&[EngineConfig::stub("s"), EngineConfig::stub("s")]).is_err());
    }
}

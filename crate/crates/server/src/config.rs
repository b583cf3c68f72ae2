//! Service configuration, read from a TOML document.
//!
//! ```toml
//! bind = "127.0.0.1:8080"
//! store = "file"              # "memory" or "file"
//! store_path = "data/store.json"
//!
//! [[engines]]
//! engine_id = "stub"
//! kind = "stub"
//!
//! [[engines]]
//! engine_id = "ec1"
//! kind = "llm"
//! endpoint = "https://api.openai.com/v1/chat/completions"
//! model = "gpt-4o"
//! credential_env = "OPENAI_API_KEY"
//!
//! [auth_tokens]
//! alice = "ALICE_TOKEN"      # annotator_id = name of the env var holding the token
//! ```

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use postedit_core::detection::EngineConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StoreBackend {
    Memory,
    File,
}

fn default_bind() -> String {
    "127.0.0.1:8080".to_string()
}

fn default_engines() -> Vec<EngineConfig> {
    vec![EngineConfig::stub("stub")]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    #[serde(default = "default_store")]
    pub store: StoreBackend,
    #[serde(default)]
    pub store_path: Option<PathBuf>,
    #[serde(default = "default_engines")]
    pub engines: Vec<EngineConfig>,
    /// annotator_id → name of the environment variable holding the token.
    #[serde(default)]
    pub auth_tokens: BTreeMap<String, String>,
}

fn default_store() -> StoreBackend {
    StoreBackend::Memory
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: default_bind(),
            store: default_store(),
            store_path: None,
            engines: default_engines(),
            auth_tokens: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ServiceConfig {
    pub fn from_toml(document: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(document)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let document = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&document)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.engines.is_empty() {
            return Err(ConfigError::Invalid("at least one engine must be configured".into()));
        }
        for engine in &self.engines {
            engine.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if self.store == StoreBackend::File && self.store_path.is_none() {
            return Err(ConfigError::Invalid(
                "store_path is required when store = \"file\"".into(),
            ));
        }
        Ok(())
    }

    /// Token → annotator_id, reading each token from its environment variable.
    pub fn resolve_tokens(&self) -> Result<HashMap<String, String>, ConfigError> {
        let mut out = HashMap::new();
        for (annotator, var) in &self.auth_tokens {
            let token = std::env::var(var).map_err(|_| {
                ConfigError::Invalid(format!(
                    "token for {annotator:?}: environment variable {var} is not set"
                ))
            })?;
            if token.is_empty() {
                return Err(ConfigError::Invalid(format!(
                    "token for {annotator:?}: environment variable {var} is empty"
                )));
            }
            if let Some(other) = out.insert(token, annotator.clone()) {
                return Err(ConfigError::Invalid(format!(
                    "annotators {other:?} and {annotator:?} share a token"
                )));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use postedit_core::detection::EngineKind;

    #[test]
    fn defaults_are_valid() {
        let c = ServiceConfig::default();
        c.validate().unwrap();
        assert_eq!(c.engines[0].kind, EngineKind::Stub);
    }

    #[test]
    fn parses_full_document() {
        let c = ServiceConfig::from_toml(
            r#"
            bind = "0.0.0.0:9000"
            store = "file"
            store_path = "/tmp/s.json"

            [[engines]]
            engine_id = "ec1"
            kind = "llm"
            endpoint = "http://localhost:1/v1/chat/completions"
            model = "m"
            credential_env = "KEY"
            max_retries = 2

            [auth_tokens]
            alice = "ALICE_TOKEN"
            "#,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.store, StoreBackend::File);
        assert_eq!(c.engines[0].max_retries, 2);
        assert_eq!(c.auth_tokens["alice"], "ALICE_TOKEN");
    }

    #[test]
    fn file_store_needs_path() {
        let c = ServiceConfig::from_toml("store = \"file\"").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("store_path"));
    }

    #[test]
    fn empty_engine_list_rejected() {
        let c = ServiceConfig::from_toml("engines = []").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ServiceConfig::from_toml("bnid = \"x\"").is_err());
    }

    #[test]
    fn missing_token_variable_reported() {
        let c = ServiceConfig::from_toml("[auth_tokens]\nbob = \"POSTEDIT_SURELY_UNSET_VAR\"").unwrap();
        let e = c.resolve_tokens().unwrap_err().to_string();
        assert!(e.contains("POSTEDIT_SURELY_UNSET_VAR"));
    }
}

//! HTTP annotation service: dataset ingestion, pair listing, cached error
//! detection, versioned annotation submission and dataset export, over a
//! memory or single-file document store.

pub mod config;
pub mod http;
pub mod service;
pub mod store;

use std::sync::Arc;

use postedit_core::detection::EngineRegistry;

use crate::config::{ConfigError, ServiceConfig, StoreBackend};
pub use crate::http::AppState;
use crate::service::Service;
use crate::store::Store;

pub use http::router;

/// Open the configured store and engines.
pub fn open_store(config: &ServiceConfig) -> Result<Store, ConfigError> {
    match config.store {
        StoreBackend::Memory => Ok(Store::memory()),
        StoreBackend::File => {
            let path = config
                .store_path
                .as_ref()
                .ok_or_else(|| ConfigError::Invalid("store_path is required".into()))?;
            Store::file(path).map_err(|e| ConfigError::Invalid(e.to_string()))
        }
    }
}

pub fn build_state(config: &ServiceConfig) -> Result<Arc<AppState>, ConfigError> {
    config.validate()?;
    let engines = EngineRegistry::from_configs(&config.engines).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let tokens = config.resolve_tokens()?;
    Ok(Arc::new(AppState {
        service: Service::new(open_store(config)?, engines),
        tokens,
    }))
}

/// Serve on an already-bound listener in a background task.
pub fn spawn_server(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
) -> tokio::task::JoinHandle<std::io::Result<()>> {
    tokio::spawn(async move { axum::serve(listener, router(state)).await })
}

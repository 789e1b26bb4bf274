//! HTTP facade over the advisory engine: chat, feedback, ingestion,
//! analytics and a messaging webhook.
//!
//! | method | path | auth |
//! |---|---|---|
//! | POST | `/v1/chat` | – |
//! | POST | `/v1/feedback` | – |
//! | POST | `/v1/webhook` | – |
//! | POST | `/v1/ingest` | bearer |
//! | GET | `/v1/analytics/{metric}?from&to` | bearer |
//! | GET | `/v1/collections`, `/v1/collections/{id}` | – |
//! | GET | `/v1/health` | – |

mod error;
mod routes;
mod state;
pub mod types;
mod webhook;

use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;
use shamba_core::config::{AppConfig, ConfigError};
use shamba_core::kb::KbError;
use shamba_core::store::StoreError;
use thiserror::Error;

pub use error::ApiError;
pub use routes::parse_instant;
pub use state::{AppState, PendingTurn, Utterance};
pub use webhook::{session_for, CATEGORIES};

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/chat", post(routes::chat))
        .route("/v1/feedback", post(routes::feedback))
        .route("/v1/ingest", post(routes::ingest))
        .route("/v1/analytics/{metric}", get(routes::analytics))
        .route("/v1/webhook", post(webhook::webhook))
        .route("/v1/collections", get(routes::list_collections))
        .route("/v1/collections/{id}", get(routes::get_collection))
        .route("/v1/health", get(routes::health))
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(config: AppConfig) -> Result<(), ServerError> {
    let addr = config.server.bind.clone();
    let state = Arc::new(AppState::open(config)?);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|source| ServerError::Bind {
            addr: addr.clone(),
            source,
        })?;
    tracing::info!("listening on {addr}");
    axum::serve(listener, router(state)).await?;
    Ok(())
}

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use shamba_core::analytics::AnalyticsError;
use shamba_core::kb::KbError;
use shamba_core::pipeline::PipelineError;
use shamba_core::provider::ProviderError;
use shamba_core::store::StoreError;

use crate::types::API_VERSION;

/// An error rendered as `{"v": 1, "error": {"code": …, "message": …}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong bearer token")
    }

    pub fn internal(message: impl std::fmt::Display) -> Self {
        tracing::error!("internal error: {message}");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(json!({
            "v": API_VERSION,
            "error": {"code": self.code, "message": self.message},
        }));
        if self.status == StatusCode::UNAUTHORIZED {
            (self.status, [(header::WWW_AUTHENTICATE, "Bearer")], body).into_response()
        } else {
            (self.status, body).into_response()
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl From<ProviderError> for ApiError {
    fn from(e: ProviderError) -> Self {
        match e {
            ProviderError::Validation(_) | ProviderError::Decode(_) => ApiError::bad_request(e.to_string()),
            ProviderError::Transport(_) | ProviderError::Malformed { .. } => {
                ApiError::new(StatusCode::BAD_GATEWAY, "provider", e.to_string())
            }
            _ => ApiError::internal(e),
        }
    }
}

impl From<KbError> for ApiError {
    fn from(e: KbError) -> Self {
        match e {
            KbError::NotFound(_) => ApiError::not_found(e.to_string()),
            KbError::Conflict(_) => ApiError::new(StatusCode::CONFLICT, "conflict", e.to_string()),
            KbError::Validation(_)
            | KbError::Parse { .. }
            | KbError::UnsupportedFormat(_)
            | KbError::Io { .. }
            | KbError::Json { .. } => ApiError::bad_request(e.to_string()),
            KbError::Provider(p) => p.into(),
            other => ApiError::internal(other),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownTurn(_) => ApiError::not_found(e.to_string()),
            StoreError::Validation(_) => ApiError::bad_request(e.to_string()),
            StoreError::DuplicateTurn(_) => ApiError::new(StatusCode::CONFLICT, "conflict", e.to_string()),
            other => ApiError::internal(other),
        }
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Validation(_) => ApiError::bad_request(e.to_string()),
            PipelineError::Provider(p) => p.into(),
            PipelineError::Kb(k) => k.into(),
            PipelineError::Store(s) => s.into(),
            other => ApiError::internal(other),
        }
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::Validation(_) => ApiError::bad_request(e.to_string()),
            AnalyticsError::Provider(p) => p.into(),
            AnalyticsError::Pipeline(p) => p.into(),
            other => ApiError::new(StatusCode::BAD_GATEWAY, "scoring", other.to_string()),
        }
    }
}

impl From<tokio::task::JoinError> for ApiError {
    fn from(e: tokio::task::JoinError) -> Self {
        ApiError::internal(e)
    }
}

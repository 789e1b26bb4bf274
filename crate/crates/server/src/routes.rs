use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::HeaderMap;
use axum::Json;
use chrono::{DateTime, NaiveDate, Utc};
use serde::Deserialize;
use shamba_core::analytics::{metric_report, LexiconScreener, Metric, ReportContext, ScoringMode, TierFractions};
use shamba_core::kb::{KnowledgeCollection, Manifest};
use shamba_core::store::{FeedbackRecord, TimeRange, TurnFilter, TurnSource};

use crate::error::ApiError;
use crate::state::{decode_audio, parse_language, AppState, PendingTurn, Utterance};
use crate::types::{
    AnalyticsResponse, ChatRequest, ChatResponse, CollectionSummary, FeedbackRequest,
    FeedbackResponse, IngestRequest, IngestResponse, API_VERSION,
};

type Shared = State<Arc<AppState>>;

/// Runs a turn on the blocking pool while holding the session's lock.
pub(crate) async fn run_serialized(
    state: &Arc<AppState>,
    pending: PendingTurn,
) -> Result<ChatResponse, ApiError> {
    let lock = state.session_lock(&pending.session_id);
    let _guard = lock.lock().await;
    let st = Arc::clone(state);
    let (turn, audio) = tokio::task::spawn_blocking(move || st.run_turn(pending)).await??;
    Ok(ChatResponse::from_turn(&turn, audio))
}

pub async fn chat(
    State(state): Shared,
    body: Result<Json<ChatRequest>, JsonRejection>,
) -> Result<Json<ChatResponse>, ApiError> {
    let Json(req) = body?;
    if req.user_id.trim().is_empty() {
        return Err(ApiError::bad_request("user_id is empty"));
    }
    let utterance = match (req.text, req.audio_base64) {
        (Some(text), None) => Utterance::Text(text),
        (None, Some(audio)) => Utterance::Audio(decode_audio(&audio)?),
        (Some(_), Some(_)) => return Err(ApiError::bad_request("send either text or audio_base64, not both")),
        (None, None) => return Err(ApiError::bad_request("one of text or audio_base64 is required")),
    };
    let source = match (&utterance, req.source) {
        (Utterance::Audio(_), _) => TurnSource::Voice,
        (Utterance::Text(_), Some(TurnSource::Voice)) => {
            return Err(ApiError::bad_request("source `voice` requires audio_base64"))
        }
        (Utterance::Text(_), s) => s.unwrap_or(TurnSource::Typed),
    };
    let pending = PendingTurn {
        session_id: req
            .session_id
            .filter(|s| !s.trim().is_empty())
            .unwrap_or_else(|| format!("s-{}", uuid::Uuid::new_v4())),
        user_id: req.user_id,
        utterance,
        language: parse_language(req.language.as_deref())?,
        selected_crop: req.selected_crop,
        collection: state.collection(req.collection_id.as_deref())?,
        source,
    };
    Ok(Json(run_serialized(&state, pending).await?))
}

pub async fn feedback(
    State(state): Shared,
    body: Result<Json<FeedbackRequest>, JsonRejection>,
) -> Result<Json<FeedbackResponse>, ApiError> {
    let Json(req) = body?;
    let record = FeedbackRecord {
        turn_id: req.turn_id,
        thumb: req.thumb,
        stars: req.stars,
        issue_tags: req.issue_tags,
        freeform: req.freeform.filter(|f| !f.trim().is_empty()),
        recorded_at: Utc::now(),
    };
    record.validate()?;
    let turn_id = record.turn_id.clone();
    let st = Arc::clone(&state);
    tokio::task::spawn_blocking(move || st.store.record_feedback(record)).await??;
    Ok(Json(FeedbackResponse {
        v: API_VERSION,
        turn_id,
        stored: true,
    }))
}

pub async fn ingest(
    State(state): Shared,
    headers: HeaderMap,
    body: Result<Json<IngestRequest>, JsonRejection>,
) -> Result<Json<IngestResponse>, ApiError> {
    state.authorize(&headers)?;
    let Json(req) = body?;
    let manifest = match (req.manifest, req.manifest_path) {
        (Some(mut m), None) => {
            m.base_dir = state.ingest_root();
            m
        }
        (None, Some(path)) => Manifest::load(&state.ingest_root().join(path))?,
        _ => return Err(ApiError::bad_request("give exactly one of manifest and manifest_path")),
    };
    let st = Arc::clone(&state);
    let outcome = tokio::task::spawn_blocking(move || {
        st.registry
            .ingest_manifest(&st.ingestor, &manifest, req.collection_id.as_deref())
    })
    .await??;
    Ok(Json(IngestResponse {
        v: API_VERSION,
        failures: outcome.failures(),
        collection_id: outcome.collection_id,
        documents: outcome.documents,
    }))
}

#[derive(Debug, Default, Deserialize)]
pub struct Window {
    pub from: Option<String>,
    pub to: Option<String>,
}

/// Accepts RFC 3339 timestamps or plain dates (midnight UTC).
pub fn parse_instant(s: &str) -> Result<DateTime<Utc>, ApiError> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc())
        .map_err(|_| ApiError::bad_request(format!("`{s}` is not an RFC 3339 timestamp or YYYY-MM-DD date")))
}

impl Window {
    pub fn range(&self) -> Result<TimeRange, ApiError> {
        let from = self.from.as_deref().map(parse_instant).transpose()?;
        let to = self.to.as_deref().map(parse_instant).transpose()?;
        if let (Some(f), Some(t)) = (from, to) {
            if f > t {
                return Err(ApiError::bad_request("`from` is after `to`"));
            }
        }
        Ok(TimeRange { from, to })
    }
}

pub async fn analytics(
    State(state): Shared,
    headers: HeaderMap,
    Path(metric): Path<String>,
    query: Result<Query<Window>, QueryRejection>,
) -> Result<Json<AnalyticsResponse>, ApiError> {
    state.authorize(&headers)?;
    let metric: Metric = metric.parse().map_err(ApiError::not_found)?;
    let Query(window) = query?;
    let range = window.range()?;
    let st = Arc::clone(&state);
    let (turns, report) = tokio::task::spawn_blocking(move || {
        let turns = st.store.query_turns(&TurnFilter {
            range,
            ..Default::default()
        });
        let feedback: Vec<FeedbackRecord> = turns
            .iter()
            .flat_map(|t| st.store.feedback_history(&t.turn_id))
            .collect();
        let screener = LexiconScreener::builtin();
        let ctx = ReportContext {
            lexicon: &st.lexicon,
            mode: ScoringMode::Provider(&st.gateway),
            histogram_edges: &st.config.histogram_edges,
            tiers: TierFractions::default(),
            screener: &screener,
        };
        metric_report(metric, &turns, &feedback, ctx).map(|r| (turns.len(), r))
    })
    .await??;
    Ok(Json(AnalyticsResponse {
        v: API_VERSION,
        metric: metric.to_string(),
        from: window.from,
        to: window.to,
        turns,
        report,
    }))
}

fn summary(c: &KnowledgeCollection) -> CollectionSummary {
    CollectionSummary {
        collection_id: c.id().to_string(),
        region: c.region().to_string(),
        crops: c.crops().clone(),
        documents: c.doc_ids().len(),
        chunks: c.chunk_count(),
    }
}

pub async fn list_collections(State(state): Shared) -> Json<serde_json::Value> {
    let collections: Vec<CollectionSummary> = state
        .registry
        .ids()
        .iter()
        .filter_map(|id| state.registry.get(id).ok())
        .map(|c| summary(&c))
        .collect();
    Json(serde_json::json!({"v": API_VERSION, "collections": collections}))
}

pub async fn get_collection(
    State(state): Shared,
    Path(id): Path<String>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let c = state.registry.get(&id)?;
    let mut body = serde_json::to_value(summary(&c)).map_err(ApiError::internal)?;
    body["v"] = API_VERSION.into();
    Ok(Json(body))
}

pub async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({"v": API_VERSION, "status": "ok"}))
}

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::http::HeaderMap;
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use shamba_core::config::AppConfig;
use shamba_core::kb::{CollectionRegistry, Ingestor, KnowledgeCollection};
use shamba_core::lexicon::Lexicon;
use shamba_core::pipeline::{detect_language, Modality, Pipeline, UserQuery};
use shamba_core::provider::{LanguageTag, ProviderGateway};
use shamba_core::store::{ConversationStore, Turn, TurnSource};

use crate::error::ApiError;
use crate::ServerError;

/// Everything the handlers share. The conversation store is the only
/// mutable state that matters: restarting loses no committed turn.
pub struct AppState {
    pub config: AppConfig,
    pub lexicon: Arc<Lexicon>,
    pub gateway: Arc<ProviderGateway>,
    pub pipeline: Pipeline,
    pub ingestor: Ingestor,
    pub registry: CollectionRegistry,
    pub store: ConversationStore,
    sessions: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

/// What the user sent: typed text or an audio payload.
#[derive(Debug, Clone)]
pub enum Utterance {
    Text(String),
    Audio(Vec<u8>),
}

/// A validated chat turn waiting to run.
#[derive(Debug, Clone)]
pub struct PendingTurn {
    pub session_id: String,
    pub user_id: String,
    pub utterance: Utterance,
    pub language: Option<LanguageTag>,
    pub selected_crop: Option<String>,
    pub collection: Arc<KnowledgeCollection>,
    pub source: TurnSource,
}

impl AppState {
    /// Disk-backed state: collections under `data_dir`, the conversation
    /// log at the configured path.
    pub fn open(config: AppConfig) -> Result<Self, ServerError> {
        let registry = CollectionRegistry::open(&config.data_dir)?;
        let store = ConversationStore::open(&config.log_path())?;
        Self::with_parts(config, registry, store)
    }

    /// State that keeps nothing on disk.
    pub fn in_memory(config: AppConfig) -> Result<Self, ServerError> {
        Self::with_parts(config, CollectionRegistry::in_memory(), ConversationStore::in_memory())
    }

    pub fn with_parts(
        config: AppConfig,
        registry: CollectionRegistry,
        store: ConversationStore,
    ) -> Result<Self, ServerError> {
        let lexicon = Arc::new(config.lexicon()?);
        let gateway = Arc::new(config.gateway(Arc::clone(&lexicon))?);
        let pipeline = Pipeline::new(Arc::clone(&gateway), Arc::clone(&lexicon), config.pipeline.clone());
        let ingestor = Ingestor::new(Arc::clone(&gateway), Arc::clone(&lexicon), config.ingest.clone());
        Ok(Self {
            config,
            lexicon,
            gateway,
            pipeline,
            ingestor,
            registry,
            store,
            sessions: Mutex::new(HashMap::new()),
        })
    }

    /// Directory that relative paths in ingest requests resolve against.
    pub fn ingest_root(&self) -> PathBuf {
        self.config.data_dir.clone()
    }

    /// Rejects the request unless it carries the configured bearer token.
    /// Without a configured token every request passes.
    pub fn authorize(&self, headers: &HeaderMap) -> Result<(), ApiError> {
        let Some(token) = self.config.server.api_token.as_deref() else {
            return Ok(());
        };
        let presented = headers
            .get(axum::http::header::AUTHORIZATION)
            .and_then(|h| h.to_str().ok())
            .and_then(|h| h.strip_prefix("Bearer "));
        if presented == Some(token) {
            Ok(())
        } else {
            Err(ApiError::unauthorized())
        }
    }

    /// The named collection, or the configured default.
    pub fn collection(&self, id: Option<&str>) -> Result<Arc<KnowledgeCollection>, ApiError> {
        let id = id
            .or(self.config.server.default_collection.as_deref())
            .ok_or_else(|| ApiError::bad_request("no collection_id given and no default configured"))?;
        Ok(self.registry.get(id)?)
    }

    /// Lock serializing requests of one session. Locks nobody else holds are
    /// dropped along the way.
    pub fn session_lock(&self, session_id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut map = self.sessions.lock().unwrap_or_else(|e| e.into_inner());
        map.retain(|id, lock| id == session_id || Arc::strong_count(lock) > 1);
        Arc::clone(map.entry(session_id.to_string()).or_default())
    }

    /// Runs one turn (blocking: providers may do network I/O) and returns it
    /// with the synthesized reply for audio input.
    pub fn run_turn(&self, pending: PendingTurn) -> Result<(Turn, Option<String>), ApiError> {
        let (text, modality) = match &pending.utterance {
            Utterance::Text(t) => (t.clone(), Modality::Text),
            Utterance::Audio(bytes) => {
                let hint = pending.language.clone().unwrap_or_else(LanguageTag::english);
                (self.gateway.transcribe(bytes, &hint)?, Modality::Voice)
            }
        };
        let language = match pending.language {
            Some(l) => l,
            None => detect_language(&text, &self.lexicon)?,
        };
        let query = UserQuery {
            session_id: pending.session_id,
            raw_text: text,
            language: language.clone(),
            modality,
            selected_crop: None,
        }
        .with_crop(pending.selected_crop.as_deref());
        let turn = self.pipeline.answer_turn(
            &self.store,
            &pending.user_id,
            query,
            &pending.collection,
            pending.source,
        )?;
        let audio = match modality {
            Modality::Voice => match self.gateway.synthesize(&turn.result.response_text, &language) {
                Ok(bytes) => Some(BASE64.encode(bytes)),
                Err(e) => {
                    tracing::warn!(turn = %turn.turn_id, "speech synthesis failed: {e}");
                    None
                }
            },
            Modality::Text => None,
        };
        Ok((turn, audio))
    }
}

pub fn decode_audio(b64: &str) -> Result<Vec<u8>, ApiError> {
    BASE64
        .decode(b64.trim())
        .map_err(|e| ApiError::bad_request(format!("audio is not valid base64: {e}")))
}

pub fn parse_language(tag: Option<&str>) -> Result<Option<LanguageTag>, ApiError> {
    tag.filter(|t| !t.trim().is_empty())
        .map(|t| LanguageTag::parse(t).map_err(ApiError::from))
        .transpose()
}

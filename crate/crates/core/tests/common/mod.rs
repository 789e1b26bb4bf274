#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use serde::Deserialize;
use shamba_core::config::AppConfig;
use shamba_core::kb::{CollectionRegistry, Ingestor, KnowledgeCollection, Manifest};
use shamba_core::lexicon::Lexicon;
use shamba_core::pipeline::Pipeline;
use shamba_core::provider::ProviderGateway;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub struct Fixture {
    pub lexicon: Arc<Lexicon>,
    pub gateway: Arc<ProviderGateway>,
    pub pipeline: Pipeline,
    pub collection: Arc<KnowledgeCollection>,
}

/// The shipped three-crop corpus ingested with local providers and the
/// fixture configuration.
pub fn fixture() -> Fixture {
    let config = AppConfig::load(&fixtures().join("config.json")).unwrap();
    let lexicon = Arc::new(config.lexicon().unwrap());
    let gateway = Arc::new(config.gateway(lexicon.clone()).unwrap());
    let registry = CollectionRegistry::in_memory();
    let manifest = Manifest::load(&fixtures().join("corpus/manifest.json")).unwrap();
    let ingestor = Ingestor::new(gateway.clone(), lexicon.clone(), config.ingest.clone());
    let outcome = registry.ingest_manifest(&ingestor, &manifest, None).unwrap();
    assert_eq!(outcome.failures(), 0, "{outcome:?}");
    let collection = registry.get(&outcome.collection_id).unwrap();
    let pipeline = Pipeline::new(gateway.clone(), lexicon.clone(), config.pipeline.clone());
    Fixture {
        lexicon,
        gateway,
        pipeline,
        collection,
    }
}

#[derive(Debug, Deserialize)]
pub struct FixtureQuery {
    pub text: String,
    pub answerable: bool,
    #[serde(default)]
    pub category: Option<String>,
}

pub fn queries() -> Vec<FixtureQuery> {
    let text = std::fs::read_to_string(fixtures().join("queries.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

use chrono::{DateTime, TimeZone, Utc};
use shamba_core::pipeline::{
    LatencyBreakdown, Modality, PipelineResult, PipelineTrace, Route, UnansweredCategory, UserQuery,
};
use shamba_core::provider::LanguageTag;
use shamba_core::store::{Turn, TurnSource};

pub fn at(secs: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(1_710_000_000 + secs, 0).unwrap()
}

/// A turn built without running the pipeline.
pub fn synthetic_turn(
    id: &str,
    user: &str,
    timestamp: DateTime<Utc>,
    text: &str,
    category: Option<UnansweredCategory>,
    source: TurnSource,
) -> Turn {
    let session = format!("{user}-session");
    Turn {
        turn_id: id.into(),
        session_id: session.clone(),
        user_id: user.into(),
        timestamp,
        query: UserQuery {
            session_id: session,
            raw_text: text.into(),
            language: LanguageTag::english(),
            modality: Modality::Text,
            selected_crop: None,
        },
        result: PipelineResult {
            answered: category.is_none(),
            response_text: "reply".into(),
            citations: Vec::new(),
            unanswered_category: category,
            followups: Vec::new(),
            latency: LatencyBreakdown::default(),
            route: Route::Retrieval,
            trace: PipelineTrace {
                english_query: text.into(),
                ..Default::default()
            },
        },
        source,
    }
}

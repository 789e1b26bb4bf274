//! Contracts for every generative capability the advisory service consumes:
//! completion, embedding, translation, transcription and speech synthesis.
//!
//! All callers go through [`ProviderGateway`], which routes each task kind to a
//! named provider. The shipped [`LocalProvider`] is rule based and fully
//! deterministic so that the whole stack runs offline; [`HttpProvider`] speaks
//! a small JSON protocol to a remote model server behind the same trait.

mod embed;
mod http;
mod local;
pub mod prompt;
mod scripted;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::Lexicon;

pub use embed::{fnv1a_64, hashed_embedding, MIN_EMBEDDING_DIMENSION};
pub use http::{HttpProvider, InFlightLimiter};
pub use local::LocalProvider;
pub use scripted::ScriptedProvider;

pub const DEFAULT_EMBEDDING_DIMENSION: usize = 256;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("provider `{provider}` does not support {capability}")]
    Capability { provider: String, capability: String },
    #[error("invalid request: {0}")]
    Validation(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed provider output for {task}: {detail}")]
    Malformed { task: TaskKind, detail: String },
}

pub type ProviderResult<T> = Result<T, ProviderError>;

/// Which structured output a completion call is expected to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Intent,
    Rephrase,
    Decompose,
    PassageRelevance,
    Generate,
    Summarize,
    Tag,
    StatementExtract,
    StatementVerdict,
    Clarity,
    Bloom,
    Followups,
}

impl TaskKind {
    pub const ALL: [TaskKind; 12] = [
        TaskKind::Intent,
        TaskKind::Rephrase,
        TaskKind::Decompose,
        TaskKind::PassageRelevance,
        TaskKind::Generate,
        TaskKind::Summarize,
        TaskKind::Tag,
        TaskKind::StatementExtract,
        TaskKind::StatementVerdict,
        TaskKind::Clarity,
        TaskKind::Bloom,
        TaskKind::Followups,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Intent => "intent",
            TaskKind::Rephrase => "rephrase",
            TaskKind::Decompose => "decompose",
            TaskKind::PassageRelevance => "passage_relevance",
            TaskKind::Generate => "generate",
            TaskKind::Summarize => "summarize",
            TaskKind::Tag => "tag",
            TaskKind::StatementExtract => "statement_extract",
            TaskKind::StatementVerdict => "statement_verdict",
            TaskKind::Clarity => "clarity",
            TaskKind::Bloom => "bloom",
            TaskKind::Followups => "followups",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = ProviderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| ProviderError::Config(format!("unknown task kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub task_kind: TaskKind,
    pub prompt_text: String,
    #[serde(default)]
    pub context_passages: Vec<String>,
    pub max_output_tokens: u32,
}

impl CompletionRequest {
    pub fn new(task_kind: TaskKind, prompt_text: impl Into<String>) -> Self {
        Self {
            task_kind,
            prompt_text: prompt_text.into(),
            context_passages: Vec::new(),
            max_output_tokens: 512,
        }
    }

    pub fn with_context(mut self, passages: Vec<String>) -> Self {
        self.context_passages = passages;
        self
    }

    pub fn validate(&self) -> ProviderResult<()> {
        if self.prompt_text.trim().is_empty() {
            return Err(ProviderError::Validation("prompt_text is empty".into()));
        }
        if self.max_output_tokens == 0 {
            return Err(ProviderError::Validation(
                "max_output_tokens must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A fixed-length embedding. Either the all-zero sentinel (text without any
/// alphanumeric term) or unit length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub norm: f64,
}

impl EmbeddingVector {
    pub fn zero(dimension: usize) -> Self {
        Self {
            values: vec![0.0; dimension],
            norm: 0.0,
        }
    }

    /// Scales `values` to unit length; an all-zero input stays the sentinel.
    pub fn normalized(values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Self { values, norm: 0.0 };
        }
        let values: Vec<f64> = values.into_iter().map(|v| v / norm).collect();
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self { values, norm }
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn dot(&self, other: &EmbeddingVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// BCP-47 style language tag: a 2–3 letter primary subtag with optional
/// alphanumeric subtags (`sw`, `en-KE`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguageTag(String);

impl LanguageTag {
    pub fn parse(tag: &str) -> ProviderResult<Self> {
        let mut parts = tag.split('-');
        let primary = parts.next().unwrap_or_default();
        let primary_ok = (2..=3).contains(&primary.len())
            && primary.chars().all(|c| c.is_ascii_lowercase());
        let rest_ok = parts.all(|p| {
            (1..=8).contains(&p.len()) && p.chars().all(|c| c.is_ascii_alphanumeric())
        });
        if primary_ok && rest_ok {
            Ok(Self(tag.to_string()))
        } else {
            Err(ProviderError::Validation(format!(
                "malformed language tag `{tag}`"
            )))
        }
    }

    pub fn english() -> Self {
        Self("en".into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_english(&self) -> bool {
        self.0 == "en" || self.0.starts_with("en-")
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for LanguageTag {
    type Error = ProviderError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::parse(&value)
    }
}

impl From<LanguageTag> for String {
    fn from(tag: LanguageTag) -> Self {
        tag.0
    }
}

impl FromStr for LanguageTag {
    type Err = ProviderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationResult {
    pub text: String,
    pub source_language: LanguageTag,
    pub target_language: LanguageTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    Complete,
    Embed,
    Translate,
    Transcribe,
    Synthesize,
}

impl Capability {
    pub fn as_str(self) -> &'static str {
        match self {
            Capability::Complete => "complete",
            Capability::Embed => "embed",
            Capability::Translate => "translate",
            Capability::Transcribe => "transcribe",
            Capability::Synthesize => "synthesize",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderProfile {
    pub name: String,
    pub capabilities: BTreeSet<Capability>,
    pub deterministic: bool,
}

/// One backend. Implementations must be safe to call from many sessions at
/// once.
pub trait Provider: Send + Sync {
    fn profile(&self) -> &ProviderProfile;

    fn supports_task(&self, _task: TaskKind) -> bool {
        true
    }

    fn complete(&self, request: &CompletionRequest) -> ProviderResult<String>;

    fn embed(&self, text: &str, dimension: usize) -> ProviderResult<EmbeddingVector>;

    fn translate(
        &self,
        text: &str,
        source: &LanguageTag,
        target: &LanguageTag,
    ) -> ProviderResult<TranslationResult>;

    fn transcribe(&self, audio: &[u8], language: &LanguageTag) -> ProviderResult<String>;

    fn synthesize(&self, text: &str, language: &LanguageTag) -> ProviderResult<Vec<u8>>;
}

/// Routes each task or capability to a named provider.
///
/// Route keys are task kind names (`intent`, `generate`, ...) and the
/// capability names `embed`, `translate`, `transcribe` and `synthesize`.
/// Anything without a route goes to the default provider.
#[derive(Clone)]
pub struct ProviderGateway {
    providers: BTreeMap<String, Arc<dyn Provider>>,
    default: String,
    routes: HashMap<String, String>,
}

impl fmt::Debug for ProviderGateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProviderGateway")
            .field("providers", &self.providers.keys().collect::<Vec<_>>())
            .field("default", &self.default)
            .field("routes", &self.routes)
            .finish()
    }
}

impl ProviderGateway {
    pub fn new(default: Arc<dyn Provider>) -> Self {
        let name = default.profile().name.clone();
        let mut providers = BTreeMap::new();
        providers.insert(name.clone(), default);
        Self {
            providers,
            default: name,
            routes: HashMap::new(),
        }
    }

    /// A gateway backed by a single [`LocalProvider`].
    pub fn local(lexicon: Arc<Lexicon>) -> Self {
        Self::new(Arc::new(LocalProvider::new(lexicon)))
    }

    pub fn with_provider(mut self, provider: Arc<dyn Provider>) -> Self {
        self.providers
            .insert(provider.profile().name.clone(), provider);
        self
    }

    pub fn with_route(mut self, key: &str, provider: &str) -> ProviderResult<Self> {
        let valid_key = TaskKind::from_str(key).is_ok()
            || ["embed", "translate", "transcribe", "synthesize"].contains(&key);
        if !valid_key {
            return Err(ProviderError::Config(format!("unknown route key `{key}`")));
        }
        if !self.providers.contains_key(provider) {
            return Err(ProviderError::Config(format!(
                "route `{key}` names unknown provider `{provider}`"
            )));
        }
        self.routes.insert(key.to_string(), provider.to_string());
        Ok(self)
    }

    fn provider_for(&self, key: &str, capability: Capability) -> ProviderResult<&dyn Provider> {
        let name = self.routes.get(key).unwrap_or(&self.default);
        let provider = self
            .providers
            .get(name)
            .ok_or_else(|| ProviderError::Config(format!("unknown provider `{name}`")))?;
        if !provider.profile().capabilities.contains(&capability) {
            return Err(ProviderError::Capability {
                provider: name.clone(),
                capability: capability.as_str().into(),
            });
        }
        Ok(provider.as_ref())
    }

    pub fn profiles(&self) -> Vec<&ProviderProfile> {
        self.providers.values().map(|p| p.profile()).collect()
    }

    pub fn complete(&self, request: &CompletionRequest) -> ProviderResult<String> {
        request.validate()?;
        let provider = self.provider_for(request.task_kind.as_str(), Capability::Complete)?;
        if !provider.supports_task(request.task_kind) {
            return Err(ProviderError::Capability {
                provider: provider.profile().name.clone(),
                capability: format!("task {}", request.task_kind),
            });
        }
        provider.complete(request)
    }

    pub fn embed(&self, text: &str, dimension: usize) -> ProviderResult<EmbeddingVector> {
        if dimension < MIN_EMBEDDING_DIMENSION {
            return Err(ProviderError::Config(format!(
                "embedding dimension {dimension} is below {MIN_EMBEDDING_DIMENSION}"
            )));
        }
        self.provider_for("embed", Capability::Embed)?
            .embed(text, dimension)
    }

    pub fn translate(
        &self,
        text: &str,
        source: &LanguageTag,
        target: &LanguageTag,
    ) -> ProviderResult<TranslationResult> {
        self.provider_for("translate", Capability::Translate)?
            .translate(text, source, target)
    }

    pub fn transcribe(&self, audio: &[u8], language: &LanguageTag) -> ProviderResult<String> {
        if audio.is_empty() {
            return Err(ProviderError::Validation("audio payload is empty".into()));
        }
        self.provider_for("transcribe", Capability::Transcribe)?
            .transcribe(audio, language)
    }

    pub fn synthesize(&self, text: &str, language: &LanguageTag) -> ProviderResult<Vec<u8>> {
        if text.is_empty() {
            return Err(ProviderError::Validation("text is empty".into()));
        }
        self.provider_for("synthesize", Capability::Synthesize)?
            .synthesize(text, language)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gateway() -> ProviderGateway {
        ProviderGateway::local(Arc::new(Lexicon::builtin()))
    }

    #[test]
    fn language_tags() {
        assert!(LanguageTag::parse("sw").is_ok());
        assert!(LanguageTag::parse("en-KE").is_ok());
        for bad in ["", "EN", "e", "english", "en_KE", "en-"] {
            assert!(LanguageTag::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn embedding_dimension_floor() {
        assert!(matches!(
            gateway().embed("maize", 4),
            Err(ProviderError::Config(_))
        ));
    }

    #[test]
    fn empty_prompt_is_rejected() {
        let req = CompletionRequest::new(TaskKind::Intent, "   ");
        assert!(matches!(
            gateway().complete(&req),
            Err(ProviderError::Validation(_))
        ));
    }

    #[test]
    fn routing_to_unknown_provider_fails() {
        assert!(gateway().with_route("generate", "nope").is_err());
        assert!(gateway().with_route("bogus", "local").is_err());
    }

    #[test]
    fn routed_task_reaches_named_provider() {
        let scripted = ScriptedProvider::new("judge").with_reply(TaskKind::Bloom, "evaluate");
        let gw = gateway()
            .with_provider(Arc::new(scripted))
            .with_route("bloom", "judge")
            .unwrap();
        let out = gw
            .complete(&CompletionRequest::new(TaskKind::Bloom, "When to plant corn?"))
            .unwrap();
        assert_eq!(out, "evaluate");
        // Unrouted tasks stay on the default provider.
        let intent = gw
            .complete(&CompletionRequest::new(TaskKind::Intent, prompt::Prompt::new("").field("query", "hello").render()))
            .unwrap();
        assert_eq!(intent, "greeting");
    }

    #[test]
    fn unsupported_task_is_a_capability_error() {
        let gw = ProviderGateway::new(Arc::new(ScriptedProvider::new("narrow")));
        let err = gw
            .complete(&CompletionRequest::new(TaskKind::Generate, "x"))
            .unwrap_err();
        assert!(matches!(err, ProviderError::Capability { .. }));
    }
}

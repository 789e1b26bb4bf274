use std::collections::{BTreeSet, HashMap, HashSet};

use super::{
    Capability, CompletionRequest, EmbeddingVector, LanguageTag, Provider, ProviderError,
    ProviderProfile, ProviderResult, TaskKind, TranslationResult,
};

/// Completion-only test double with canned replies per task. Tasks without a
/// reply are unsupported; tasks marked as failing return a transport error.
#[derive(Debug, Clone)]
pub struct ScriptedProvider {
    profile: ProviderProfile,
    replies: HashMap<TaskKind, String>,
    failures: HashSet<TaskKind>,
}

impl ScriptedProvider {
    pub fn new(name: &str) -> Self {
        Self {
            profile: ProviderProfile {
                name: name.to_string(),
                capabilities: BTreeSet::from([Capability::Complete]),
                deterministic: true,
            },
            replies: HashMap::new(),
            failures: HashSet::new(),
        }
    }

    pub fn with_reply(mut self, task: TaskKind, reply: impl Into<String>) -> Self {
        self.replies.insert(task, reply.into());
        self
    }

    pub fn failing(mut self, task: TaskKind) -> Self {
        self.failures.insert(task);
        self
    }

    fn unsupported<T>(&self, capability: Capability) -> ProviderResult<T> {
        Err(ProviderError::Capability {
            provider: self.profile.name.clone(),
            capability: capability.as_str().into(),
        })
    }
}

impl Provider for ScriptedProvider {
    fn profile(&self) -> &ProviderProfile {
        &self.profile
    }

    fn supports_task(&self, task: TaskKind) -> bool {
        self.replies.contains_key(&task) || self.failures.contains(&task)
    }

    fn complete(&self, request: &CompletionRequest) -> ProviderResult<String> {
        if self.failures.contains(&request.task_kind) {
            return Err(ProviderError::Transport(format!(
                "scripted failure for {}",
                request.task_kind
            )));
        }
        self.replies
            .get(&request.task_kind)
            .cloned()
            .ok_or_else(|| ProviderError::Capability {
                provider: self.profile.name.clone(),
                capability: format!("task {}", request.task_kind),
            })
    }

    fn embed(&self, _text: &str, _dimension: usize) -> ProviderResult<EmbeddingVector> {
        self.unsupported(Capability::Embed)
    }

    fn translate(
        &self,
        _text: &str,
        _source: &LanguageTag,
        _target: &LanguageTag,
    ) -> ProviderResult<TranslationResult> {
        self.unsupported(Capability::Translate)
    }

    fn transcribe(&self, _audio: &[u8], _language: &LanguageTag) -> ProviderResult<String> {
        self.unsupported(Capability::Transcribe)
    }

    fn synthesize(&self, _text: &str, _language: &LanguageTag) -> ProviderResult<Vec<u8>> {
        self.unsupported(Capability::Synthesize)
    }
}

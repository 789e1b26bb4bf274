use std::collections::BTreeSet;
use std::sync::Arc;

use super::prompt::{self, ParsedPrompt};
use super::{
    hashed_embedding, Capability, CompletionRequest, EmbeddingVector, LanguageTag, Provider,
    ProviderError, ProviderProfile, ProviderResult, TaskKind, TranslationResult,
};
use crate::analytics::{bloom, clarity, quality};
use crate::kb::enrich;
use crate::lexicon::Lexicon;
use crate::pipeline::{decompose, followups, generate, intent, rank};
use crate::text::split_sentences;

/// Rule-based, deterministic provider. Every task is answered by the rule
/// documented next to the component that consumes it.
#[derive(Debug, Clone)]
pub struct LocalProvider {
    profile: ProviderProfile,
    lexicon: Arc<Lexicon>,
}

impl LocalProvider {
    pub fn new(lexicon: Arc<Lexicon>) -> Self {
        Self::named("local", lexicon)
    }

    pub fn named(name: &str, lexicon: Arc<Lexicon>) -> Self {
        Self {
            profile: ProviderProfile {
                name: name.to_string(),
                capabilities: BTreeSet::from([
                    Capability::Complete,
                    Capability::Embed,
                    Capability::Translate,
                    Capability::Transcribe,
                    Capability::Synthesize,
                ]),
                deterministic: true,
            },
            lexicon,
        }
    }

    fn lines<I, S>(items: I) -> String
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        items
            .into_iter()
            .map(|s| s.as_ref().to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Opening marker the local translator prepends for `tag`.
pub(crate) fn marker(tag: &LanguageTag) -> String {
    format!("⟦{tag}⟧")
}

impl Provider for LocalProvider {
    fn profile(&self) -> &ProviderProfile {
        &self.profile
    }

    fn complete(&self, request: &CompletionRequest) -> ProviderResult<String> {
        let raw = request.prompt_text.as_str();
        let fields = ParsedPrompt::parse(raw);
        let lx = self.lexicon.as_ref();
        let query = fields.get_or(prompt::QUERY, raw);
        let text = fields.get_or(prompt::TEXT, raw);
        let passages = &request.context_passages;

        let out = match request.task_kind {
            TaskKind::Intent => intent::rule_intent(query, lx).as_str().to_string(),
            TaskKind::Rephrase => decompose::resolve_references(
                query,
                fields.get(prompt::CROP).filter(|c| !c.is_empty()),
                passages,
                lx,
            ),
            TaskKind::Decompose => Self::lines(decompose::split_clauses(query, lx)),
            TaskKind::PassageRelevance => Self::lines(passages.iter().map(|p| {
                if rank::shared_content_terms(query, p, lx) >= rank::RELEVANCE_MIN_SHARED {
                    "relevant"
                } else {
                    "irrelevant"
                }
            })),
            TaskKind::Generate => Self::lines(
                generate::extract_sentences(query, passages, lx)
                    .into_iter()
                    .map(|(idx, sentence)| format!("[{}] {}", idx + 1, sentence)),
            ),
            TaskKind::Summarize => {
                let limit = fields
                    .get(prompt::LIMIT)
                    .and_then(|l| l.parse().ok())
                    .unwrap_or(enrich::SUMMARY_MAX_WORDS);
                enrich::first_sentence_summary(text, limit)
            }
            TaskKind::Tag => enrich::lexicon_topics(text, lx)
                .into_iter()
                .collect::<Vec<_>>()
                .join(", "),
            TaskKind::StatementExtract => Self::lines(split_sentences(text)),
            TaskKind::StatementVerdict => {
                let criterion = fields
                    .get(prompt::CRITERION)
                    .unwrap_or("support")
                    .parse::<quality::VerdictCriterion>()
                    .map_err(|e| ProviderError::Validation(e.to_string()))?;
                let statement = fields.get_or(prompt::STATEMENT, raw);
                let query = fields.get(prompt::QUERY).unwrap_or_default();
                let verdict = quality::local_verdict(criterion, statement, query, passages, lx);
                if verdict { "1" } else { "0" }.to_string()
            }
            TaskKind::Clarity => clarity::rule_assessment(query, lx).to_labeled_lines(),
            TaskKind::Bloom => bloom::rule_level(query, lx).as_str().to_string(),
            TaskKind::Followups => {
                let topics: BTreeSet<String> = fields
                    .get(prompt::TOPICS)
                    .unwrap_or_default()
                    .split(',')
                    .map(|t| t.trim().to_string())
                    .filter(|t| !t.is_empty())
                    .collect();
                let crop = fields.get(prompt::CROP).filter(|c| !c.is_empty());
                Self::lines(followups::template_followups(&topics, crop, lx))
            }
        };
        Ok(out)
    }

    fn embed(&self, text: &str, dimension: usize) -> ProviderResult<EmbeddingVector> {
        hashed_embedding(text, dimension)
    }

    /// Identity when the languages match. Otherwise a leading
    /// `⟦source⟧` marker is removed if present, else `⟦target⟧` is
    /// prepended, so a pivot out and back restores the original text.
    fn translate(
        &self,
        text: &str,
        source: &LanguageTag,
        target: &LanguageTag,
    ) -> ProviderResult<TranslationResult> {
        let translated = if source == target {
            text.to_string()
        } else if let Some(rest) = text.strip_prefix(&marker(source)) {
            rest.to_string()
        } else {
            format!("{}{}", marker(target), text)
        };
        Ok(TranslationResult {
            text: translated,
            source_language: source.clone(),
            target_language: target.clone(),
        })
    }

    /// Treats the payload as a UTF-8 transcript fixture.
    fn transcribe(&self, audio: &[u8], _language: &LanguageTag) -> ProviderResult<String> {
        if audio.is_empty() {
            return Err(ProviderError::Validation("audio payload is empty".into()));
        }
        String::from_utf8(audio.to_vec()).map_err(|e| ProviderError::Decode(e.to_string()))
    }

    fn synthesize(&self, text: &str, _language: &LanguageTag) -> ProviderResult<Vec<u8>> {
        if text.is_empty() {
            return Err(ProviderError::Validation("text is empty".into()));
        }
        Ok(text.as_bytes().to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::prompt::Prompt;

    fn local() -> LocalProvider {
        LocalProvider::new(Arc::new(Lexicon::builtin()))
    }

    fn tag(t: &str) -> LanguageTag {
        LanguageTag::parse(t).unwrap()
    }

    #[test]
    fn translation_marker_rule() {
        let p = local();
        assert_eq!(p.translate("mahindi", &tag("sw"), &tag("sw")).unwrap().text, "mahindi");
        assert_eq!(p.translate("maize", &tag("en"), &tag("sw")).unwrap().text, "⟦sw⟧maize");
        let there = p.translate("mahindi", &tag("sw"), &tag("en")).unwrap();
        assert_eq!(there.source_language, tag("sw"));
        assert_eq!(there.target_language, tag("en"));
        let back = p.translate(&there.text, &tag("en"), &tag("sw")).unwrap();
        assert_eq!(back.text, "mahindi");
    }

    #[test]
    fn transcription_fixture_passthrough() {
        let p = local();
        assert_eq!(
            p.transcribe(b"what fertilizer for maize", &tag("en")).unwrap(),
            "what fertilizer for maize"
        );
        assert!(matches!(p.transcribe(b"", &tag("en")), Err(ProviderError::Validation(_))));
        assert!(matches!(
            p.transcribe(&[0xff, 0xfe, 0x00], &tag("en")),
            Err(ProviderError::Decode(_))
        ));
    }

    #[test]
    fn synthesis_mirrors_transcription() {
        let p = local();
        let audio = p.synthesize("what fertilizer for maize", &tag("en")).unwrap();
        assert_eq!(audio, b"what fertilizer for maize");
        assert_eq!(p.transcribe(&audio, &tag("en")).unwrap(), "what fertilizer for maize");
        assert!(matches!(p.synthesize("", &tag("en")), Err(ProviderError::Validation(_))));
    }

    #[test]
    fn statement_extract_single_sentence() {
        let req = CompletionRequest::new(
            TaskKind::StatementExtract,
            Prompt::new(prompt::STATEMENT_EXTRACT_INSTRUCTION)
                .field(prompt::TEXT, "Prune coffee after the main harvest.")
                .render(),
        );
        assert_eq!(local().complete(&req).unwrap(), "Prune coffee after the main harvest.");
    }

    #[test]
    fn intent_greeting() {
        let req = CompletionRequest::new(TaskKind::Intent, "hello");
        assert_eq!(local().complete(&req).unwrap(), "greeting");
    }

    #[test]
    fn generate_is_extractive() {
        let passages = vec![
            "Coffee pruning is done after harvest. Dairy cows need water.".to_string(),
            "Stumping old coffee trees renews growth.".to_string(),
        ];
        let req = CompletionRequest::new(
            TaskKind::Generate,
            Prompt::new(prompt::GENERATE_INSTRUCTION)
                .field(prompt::QUERY, "when is coffee pruning done")
                .render(),
        )
        .with_context(passages);
        let out = local().complete(&req).unwrap();
        assert_eq!(
            out,
            "[1] Coffee pruning is done after harvest.\n[2] Stumping old coffee trees renews growth."
        );
    }

    #[test]
    fn deterministic_outputs() {
        let p = local();
        for task in TaskKind::ALL {
            let req = CompletionRequest::new(
                task,
                Prompt::new("")
                    .field(prompt::QUERY, "how do I control coffee berry borer?")
                    .field(prompt::TEXT, "Coffee berry borer is a beetle. It bores berries.")
                    .field(prompt::STATEMENT, "Coffee berry borer is a beetle.")
                    .field(prompt::TOPICS, "pests_diseases")
                    .field(prompt::CROP, "coffee")
                    .render(),
            )
            .with_context(vec!["Coffee berry borer is a beetle.".into()]);
            assert_eq!(p.complete(&req).unwrap(), p.complete(&req).unwrap(), "{task}");
        }
        assert_eq!(
            p.embed("maize", 256).unwrap(),
            p.embed("maize", 256).unwrap()
        );
    }
}

//! The staged query pipeline: translate in → intent → rephrase and
//! decompose → retrieve → classify and rank → generate (or categorize the
//! non-answer) → follow-ups → translate out.

pub mod decompose;
pub mod followups;
pub mod generate;
pub mod intent;
pub mod language;
pub mod rank;
pub mod retrieve;
pub mod tools;
pub mod unanswered;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{CollectionSnapshot, KbError, KnowledgeCollection};
use crate::lexicon::Lexicon;
use crate::provider::prompt::{self, Prompt};
use crate::provider::{CompletionRequest, LanguageTag, ProviderError, ProviderGateway, TaskKind};
use crate::store::{ConversationStore, StoreError, Turn, TurnSource};

pub use intent::IntentLabel;
pub use language::detect_language;
pub use rank::{RankedPassage, Relevance};
pub use retrieve::RetrievalBundle;
pub use tools::{ToolError, ToolRegistry, ToolSpec};
pub use unanswered::UnansweredCategory;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Index(#[from] crate::index::IndexError),
    #[error(transparent)]
    Tool(#[from] ToolError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Text,
    Voice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserQuery {
    pub session_id: String,
    pub raw_text: String,
    pub language: LanguageTag,
    pub modality: Modality,
    #[serde(default)]
    pub selected_crop: Option<String>,
}

impl UserQuery {
    /// A typed query whose language is detected from its words.
    pub fn detect(session_id: &str, raw_text: &str, lexicon: &Lexicon) -> Result<Self, PipelineError> {
        Ok(Self {
            session_id: session_id.to_string(),
            raw_text: raw_text.to_string(),
            language: detect_language(raw_text, lexicon)?,
            modality: Modality::Text,
            selected_crop: None,
        })
    }

    pub fn with_crop(mut self, crop: Option<&str>) -> Self {
        self.selected_crop = crop
            .map(|c| c.trim().to_lowercase())
            .filter(|c| !c.is_empty());
        self
    }
}

/// Seconds spent in each stage. `total` covers the whole call, so it is at
/// least the sum of the stages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub intent: f64,
    pub rephrase: f64,
    pub retrieve: f64,
    pub rerank: f64,
    pub generate: f64,
    pub translate: f64,
    pub total: f64,
}

impl LatencyBreakdown {
    pub const STAGES: [&'static str; 6] =
        ["intent", "rephrase", "retrieve", "rerank", "generate", "translate"];

    pub fn stage(&self, name: &str) -> Option<f64> {
        Some(match name {
            "intent" => self.intent,
            "rephrase" => self.rephrase,
            "retrieve" => self.retrieve,
            "rerank" => self.rerank,
            "generate" => self.generate,
            "translate" => self.translate,
            "total" => self.total,
            _ => return None,
        })
    }

    pub fn stage_sum(&self) -> f64 {
        self.intent + self.rephrase + self.retrieve + self.rerank + self.generate + self.translate
    }
}

/// Which branch handled the query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Greeting,
    Menu,
    Tool,
    Retrieval,
    /// Went straight to categorization, or a stage failed first.
    Fallback,
}

/// What happened inside the pipeline, kept on every turn for analysis.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub intent: Option<IntentLabel>,
    /// The query after translation into English.
    pub english_query: String,
    pub rephrased: Option<String>,
    pub subqueries: Vec<String>,
    /// Relevant passages in rank order.
    pub passages: Vec<RankedPassage>,
    /// The response before back-translation.
    pub english_response: String,
    pub tool: Option<String>,
    pub warnings: Vec<String>,
}

/// Result of one query.
///
/// A retrieval answer always cites at least one passage. Greeting, menu and
/// tool replies are answered without citations. A non-answer always carries
/// its category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub answered: bool,
    pub response_text: String,
    pub citations: Vec<String>,
    pub unanswered_category: Option<UnansweredCategory>,
    pub followups: Vec<String>,
    pub latency: LatencyBreakdown,
    pub route: Route,
    pub trace: PipelineTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub retrieval_k: usize,
    pub generation_passages: usize,
    pub history_turns: usize,
    pub max_output_tokens: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            retrieval_k: 10,
            generation_passages: 3,
            history_turns: 5,
            max_output_tokens: 512,
        }
    }
}

struct Outcome {
    answered: bool,
    text: String,
    citations: Vec<String>,
    category: Option<UnansweredCategory>,
    followups: Vec<String>,
    route: Route,
}

impl Outcome {
    fn canned(route: Route, text: String) -> Self {
        Self {
            answered: true,
            text,
            citations: Vec::new(),
            category: None,
            followups: Vec::new(),
            route,
        }
    }
}

fn timed<T>(slot: &mut f64, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    *slot += t.elapsed().as_secs_f64();
    out
}

fn join_crops(crops: &BTreeSet<String>) -> String {
    let v: Vec<&str> = crops.iter().map(String::as_str).collect();
    match v.as_slice() {
        [] => "farming".to_string(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    gateway: Arc<ProviderGateway>,
    lexicon: Arc<Lexicon>,
    tools: ToolRegistry,
    config: PipelineConfig,
}

impl Pipeline {
    pub fn new(gateway: Arc<ProviderGateway>, lexicon: Arc<Lexicon>, config: PipelineConfig) -> Self {
        Self {
            gateway,
            lexicon,
            tools: ToolRegistry::with_defaults(),
            config,
        }
    }

    pub fn with_tools(mut self, tools: ToolRegistry) -> Self {
        self.tools = tools;
        self
    }

    pub fn gateway(&self) -> &ProviderGateway {
        &self.gateway
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    fn ask(&self, task: TaskKind, prompt: Prompt, context: Vec<String>) -> Result<String, ProviderError> {
        let mut req = CompletionRequest::new(task, prompt.render()).with_context(context);
        req.max_output_tokens = self.config.max_output_tokens;
        self.gateway.complete(&req)
    }

    /// Intent label via the provider.
    pub fn detect_intent(&self, text: &str, history: &[String]) -> Result<IntentLabel, PipelineError> {
        let reply = self.ask(
            TaskKind::Intent,
            Prompt::new(prompt::INTENT_INSTRUCTION).field(prompt::QUERY, text),
            history.to_vec(),
        )?;
        let label = reply.lines().next().unwrap_or_default();
        label.parse().map_err(|detail| {
            ProviderError::Malformed {
                task: TaskKind::Intent,
                detail,
            }
            .into()
        })
    }

    /// Rephrases against history and the selected crop, then splits into
    /// subqueries. Any provider failure falls back to `[text]`.
    pub fn rephrase_and_decompose(
        &self,
        text: &str,
        history: &[String],
        crop: Option<&str>,
    ) -> (Option<String>, Vec<String>, Vec<String>) {
        let mut warnings = Vec::new();
        let crop_field = crop.unwrap_or_default();
        let rephrased = match self.ask(
            TaskKind::Rephrase,
            Prompt::new(prompt::REPHRASE_INSTRUCTION)
                .field(prompt::QUERY, text)
                .field(prompt::CROP, crop_field),
            history.to_vec(),
        ) {
            Ok(r) => r
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty())
                .map(str::to_string),
            Err(e) => {
                warnings.push(format!("rephrase failed: {e}"));
                return (None, vec![text.to_string()], warnings);
            }
        };
        let Some(rephrased) = rephrased else {
            warnings.push("rephrase returned nothing".into());
            return (None, vec![text.to_string()], warnings);
        };
        let subqueries = match self.ask(
            TaskKind::Decompose,
            Prompt::new(prompt::DECOMPOSE_INSTRUCTION)
                .field(prompt::QUERY, rephrased.as_str())
                .field(prompt::CROP, crop_field),
            Vec::new(),
        ) {
            Ok(reply) => reply
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect::<Vec<_>>(),
            Err(e) => {
                warnings.push(format!("decompose failed: {e}"));
                Vec::new()
            }
        };
        if subqueries.is_empty() {
            return (Some(rephrased), vec![text.to_string()], warnings);
        }
        (Some(rephrased), subqueries, warnings)
    }

    /// Relevance verdicts for the merged hits, then ordering.
    pub fn classify_and_rank(
        &self,
        bundle: &RetrievalBundle,
        snapshot: &CollectionSnapshot,
        query: &str,
    ) -> Result<Vec<RankedPassage>, PipelineError> {
        let candidates: Vec<rank::Candidate> = bundle
            .merged
            .iter()
            .filter_map(|h| {
                snapshot.chunk(&h.chunk_id).map(|c| rank::Candidate {
                    chunk_id: h.chunk_id.clone(),
                    text: c.text.clone(),
                    score: h.score,
                })
            })
            .collect();
        if candidates.is_empty() {
            return Ok(Vec::new());
        }
        let reply = self.ask(
            TaskKind::PassageRelevance,
            Prompt::new(prompt::PASSAGE_RELEVANCE_INSTRUCTION).field(prompt::QUERY, query),
            candidates.iter().map(|c| c.text.clone()).collect(),
        )?;
        let verdicts = reply
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| match l.to_lowercase().as_str() {
                "relevant" => Ok(Relevance::Relevant),
                "irrelevant" => Ok(Relevance::Irrelevant),
                other => Err(format!("unknown verdict `{other}`")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|detail| ProviderError::Malformed {
                task: TaskKind::PassageRelevance,
                detail,
            })?;
        if verdicts.len() != candidates.len() {
            return Err(ProviderError::Malformed {
                task: TaskKind::PassageRelevance,
                detail: format!(
                    "{} verdicts for {} passages",
                    verdicts.len(),
                    candidates.len()
                ),
            }
            .into());
        }
        Ok(rank::rank_passages(query, &candidates, &verdicts, &self.lexicon))
    }

    /// Response text and the chunk ids it draws on. Every returned sentence
    /// comes from the generation reply; citations follow passage rank.
    pub fn generate_response(
        &self,
        query: &str,
        passages: &[RankedPassage],
        crop: Option<&str>,
    ) -> Result<(String, Vec<String>), PipelineError> {
        let top: Vec<&RankedPassage> = passages
            .iter()
            .take(self.config.generation_passages.max(1))
            .collect();
        if top.is_empty() {
            return Err(PipelineError::Validation("no passages to answer from".into()));
        }
        let reply = self.ask(
            TaskKind::Generate,
            Prompt::new(prompt::GENERATE_INSTRUCTION)
                .field(prompt::QUERY, query)
                .field(prompt::CROP, crop.unwrap_or_default()),
            top.iter().map(|p| p.text.clone()).collect(),
        )?;
        let lines = generate::parse_generation(&reply, top.len()).map_err(|detail| {
            ProviderError::Malformed {
                task: TaskKind::Generate,
                detail,
            }
        })?;
        let mut used: Vec<usize> = lines.iter().map(|(i, _)| *i).collect();
        used.sort_unstable();
        used.dedup();
        let citations = used.into_iter().map(|i| top[i].chunk_id.clone()).collect();
        let sentences: Vec<&str> = lines.iter().map(|(_, s)| s.as_str()).collect();
        Ok((generate::join_sentences(&sentences), citations))
    }

    /// At most three follow-up questions for the topics the response covers.
    pub fn suggest_followups(
        &self,
        query: &str,
        response: &str,
        crop: Option<&str>,
    ) -> Result<Vec<String>, PipelineError> {
        let topics = self.lexicon.topics_in(response);
        if topics.is_empty() {
            return Ok(Vec::new());
        }
        let reply = self.ask(
            TaskKind::Followups,
            Prompt::new(prompt::FOLLOWUPS_INSTRUCTION)
                .field(prompt::QUERY, query)
                .field(prompt::TOPICS, topics.into_iter().collect::<Vec<_>>().join(", "))
                .field(prompt::CROP, crop.unwrap_or_default()),
            Vec::new(),
        )?;
        Ok(followups::parse_followups(&reply))
    }

    fn unanswered(
        &self,
        query: &str,
        intent: IntentLabel,
        crops: &BTreeSet<String>,
        route: Route,
    ) -> Outcome {
        let category = unanswered::categorize_unanswered(query, intent, crops, &self.lexicon);
        Outcome {
            answered: false,
            text: unanswered::unanswered_message(category, query, crops, &self.lexicon),
            citations: Vec::new(),
            category: Some(category),
            followups: Vec::new(),
            route,
        }
    }

    fn failure(&self, route: Route) -> Outcome {
        let category = UnansweredCategory::OutOfContent;
        Outcome {
            answered: false,
            text: unanswered::unanswered_message(category, "", &BTreeSet::new(), &self.lexicon),
            citations: Vec::new(),
            category: Some(category),
            followups: Vec::new(),
            route,
        }
    }

    fn run_tool_branch(&self, text: &str, crops: &BTreeSet<String>, trace: &mut PipelineTrace) -> Result<Outcome, PipelineError> {
        let tool = crate::text::terms(text)
            .iter()
            .find_map(|t| self.lexicon.tool_for(t))
            .unwrap_or_default()
            .to_string();
        trace.tool = Some(tool.clone());
        let args = match tool.as_str() {
            "weather" => tools::extract_weather_args(text),
            _ => Default::default(),
        };
        match self.tools.run_tool(&tool, &args) {
            Ok(reply) => Ok(Outcome::canned(Route::Tool, reply)),
            Err(ToolError::Unknown(name)) => {
                trace.warnings.push(format!("no tool named `{name}`"));
                let category = UnansweredCategory::OutOfContext;
                Ok(Outcome {
                    answered: false,
                    text: format!(
                        "Sorry, I cannot look that up yet. I can help with questions about {}.",
                        join_crops(crops)
                    ),
                    citations: Vec::new(),
                    category: Some(category),
                    followups: Vec::new(),
                    route: Route::Tool,
                })
            }
            Err(e) => Err(e.into()),
        }
    }

    fn run_english(
        &self,
        text: &str,
        query: &UserQuery,
        snapshot: &CollectionSnapshot,
        crops: &BTreeSet<String>,
        history: &[String],
        latency: &mut LatencyBreakdown,
        trace: &mut PipelineTrace,
    ) -> Result<Outcome, PipelineError> {
        let intent = timed(&mut latency.intent, || self.detect_intent(text, history))?;
        trace.intent = Some(intent);
        match intent {
            IntentLabel::Greeting => {
                return Ok(Outcome::canned(
                    Route::Greeting,
                    format!(
                        "Hello! I can answer your questions about {}. What would you like to know?",
                        join_crops(crops)
                    ),
                ))
            }
            IntentLabel::MenuNavigation => {
                return Ok(Outcome::canned(
                    Route::Menu,
                    format!(
                        "Main menu: pick a category, then a crop ({}), or type your question.",
                        join_crops(crops)
                    ),
                ))
            }
            IntentLabel::ToolRequest => return self.run_tool_branch(text, crops, trace),
            IntentLabel::Other => return Ok(self.unanswered(text, intent, crops, Route::Fallback)),
            IntentLabel::FarmingQuestion => {}
        }

        let crop = query.selected_crop.as_deref();
        let (rephrased, subqueries, warnings) =
            timed(&mut latency.rephrase, || self.rephrase_and_decompose(text, history, crop));
        trace.warnings.extend(warnings);
        let focus = rephrased.clone().unwrap_or_else(|| text.to_string());
        trace.rephrased = rephrased;
        trace.subqueries = subqueries.clone();

        let bundle = timed(&mut latency.retrieve, || {
            retrieve::retrieve(&self.gateway, snapshot, &subqueries, self.config.retrieval_k)
        })?;
        let ranked = timed(&mut latency.rerank, || self.classify_and_rank(&bundle, snapshot, &focus))?;
        trace.passages = ranked.clone();
        if ranked.is_empty() {
            return Ok(self.unanswered(text, intent, crops, Route::Retrieval));
        }

        let answer_crop = crop
            .map(str::to_string)
            .or_else(|| self.lexicon.crops_in(&focus).into_iter().next());
        let (response, citations) = timed(&mut latency.generate, || {
            self.generate_response(&focus, &ranked, answer_crop.as_deref())
        })?;
        if response.trim().is_empty() || citations.is_empty() {
            return Ok(self.unanswered(text, intent, crops, Route::Retrieval));
        }
        let followups = match self.suggest_followups(&focus, &response, answer_crop.as_deref()) {
            Ok(f) => f,
            Err(e) => {
                trace.warnings.push(format!("follow-ups unavailable: {e}"));
                Vec::new()
            }
        };
        Ok(Outcome {
            answered: true,
            text: response,
            citations,
            category: None,
            followups,
            route: Route::Retrieval,
        })
    }

    /// Runs one query end to end. Stage failures never escape: they become a
    /// non-answer categorized out of content, with the cause in
    /// `trace.warnings`. Only an empty query is an error.
    pub fn answer(
        &self,
        query: &UserQuery,
        collection: &KnowledgeCollection,
        history: &[String],
    ) -> Result<PipelineResult, PipelineError> {
        if query.raw_text.trim().is_empty() {
            return Err(PipelineError::Validation("query text is empty".into()));
        }
        let start = Instant::now();
        let snapshot = collection.snapshot();
        let english = LanguageTag::english();
        let pivot = !query.language.is_english();
        let mut latency = LatencyBreakdown::default();
        let mut trace = PipelineTrace::default();

        let english_query = if pivot {
            timed(&mut latency.translate, || {
                self.gateway.translate(&query.raw_text, &query.language, &english)
            })
            .map(|t| t.text)
        } else {
            Ok(query.raw_text.trim().to_string())
        };

        let mut outcome = match english_query {
            Ok(text) => {
                trace.english_query = text.clone();
                self.run_english(
                    &text,
                    query,
                    &snapshot,
                    collection.crops(),
                    history,
                    &mut latency,
                    &mut trace,
                )
            }
            Err(e) => Err(e.into()),
        }
        .unwrap_or_else(|e| {
            tracing::warn!(session = %query.session_id, "pipeline stage failed: {e}");
            trace.warnings.push(format!("stage failed: {e}"));
            self.failure(Route::Fallback)
        });
        trace.english_response = outcome.text.clone();

        if pivot {
            let back = timed(&mut latency.translate, || -> Result<_, ProviderError> {
                let text = self.gateway.translate(&outcome.text, &english, &query.language)?.text;
                let followups = outcome
                    .followups
                    .iter()
                    .map(|f| Ok(self.gateway.translate(f, &english, &query.language)?.text))
                    .collect::<Result<Vec<_>, ProviderError>>()?;
                Ok((text, followups))
            });
            match back {
                Ok((text, followups)) => {
                    outcome.text = text;
                    outcome.followups = followups;
                }
                Err(e) => {
                    tracing::warn!(session = %query.session_id, "back-translation failed: {e}");
                    trace.warnings.push(format!("back-translation failed: {e}"));
                    outcome = self.failure(outcome.route);
                }
            }
        }

        latency.total = start.elapsed().as_secs_f64().max(latency.stage_sum());
        Ok(PipelineResult {
            answered: outcome.answered,
            response_text: outcome.text,
            citations: outcome.citations,
            unanswered_category: outcome.category,
            followups: outcome.followups,
            latency,
            route: outcome.route,
            trace,
        })
    }

    /// Answers within a session and appends the turn to `store`. The last
    /// `history_turns` English queries of the session feed rephrasing.
    pub fn answer_turn(
        &self,
        store: &ConversationStore,
        user_id: &str,
        query: UserQuery,
        collection: &KnowledgeCollection,
        source: TurnSource,
    ) -> Result<Turn, PipelineError> {
        let history: Vec<String> = store
            .session_turns(&query.session_id)
            .iter()
            .rev()
            .take(self.config.history_turns)
            .rev()
            .map(|t| t.result.trace.english_query.clone())
            .collect();
        let result = self.answer(&query, collection, &history)?;
        let turn = Turn::new(user_id, query, result, source);
        Ok(store.append_turn_clamped(turn)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{DocumentFormat, IngestConfig, Ingestor, SourceDocument};
    use crate::provider::ScriptedProvider;

    fn lexicon() -> Arc<Lexicon> {
        Arc::new(Lexicon::builtin())
    }

    fn setup(gateway: ProviderGateway) -> (Pipeline, KnowledgeCollection) {
        let lx = lexicon();
        let gateway = Arc::new(gateway);
        let collection =
            KnowledgeCollection::new("kenya", "Kenya", ["coffee", "dairy", "potato"], 256).unwrap();
        let ingestor = Ingestor::new(Arc::clone(&gateway), Arc::clone(&lx), IngestConfig::default());
        ingestor
            .ingest(
                &SourceDocument::new(
                    "coffee",
                    DocumentFormat::Prose,
                    "Coffee pruning is done after the main harvest. Remove old stems.\n\nCoffee berry borer is a beetle that attacks berries.",
                ),
                &collection,
            )
            .unwrap();
        ingestor
            .ingest(
                &SourceDocument::new(
                    "dairy",
                    DocumentFormat::Prose,
                    "Dairy cows need clean water every day. Mastitis is an udder disease in cows.",
                ),
                &collection,
            )
            .unwrap();
        (Pipeline::new(gateway, lx, PipelineConfig::default()), collection)
    }

    fn english(text: &str) -> UserQuery {
        UserQuery::detect("s1", text, &Lexicon::builtin()).unwrap()
    }

    #[test]
    fn greeting_short_circuits() {
        let (p, c) = setup(ProviderGateway::local(lexicon()));
        let r = p.answer(&english("hello"), &c, &[]).unwrap();
        assert!(r.answered);
        assert_eq!(r.route, Route::Greeting);
        assert_eq!(r.latency.retrieve, 0.0);
        assert!(r.citations.is_empty());
    }

    #[test]
    fn farming_question_is_answered_with_citation() {
        let (p, c) = setup(ProviderGateway::local(lexicon()));
        let r = p.answer(&english("when is coffee pruning done?"), &c, &[]).unwrap();
        assert!(r.answered, "{r:?}");
        assert_eq!(r.citations, vec!["coffee#00000"]);
        assert!(r.response_text.starts_with("Coffee pruning is done after the main harvest."));
        assert!(r.latency.total + 1e-9 >= r.latency.stage_sum());
        assert!(r
            .followups
            .iter()
            .any(|f| f.contains("pruning") || f.contains("harvest")));
    }

    #[test]
    fn swahili_query_carries_back_translation_marker() {
        let (p, c) = setup(ProviderGateway::local(lexicon()));
        let q = english("habari, kahawa yangu pruning");
        assert_eq!(q.language.as_str(), "sw");
        let r = p.answer(&q, &c, &[]).unwrap();
        assert!(r.response_text.starts_with("⟦sw⟧"), "{}", r.response_text);
        assert!(r.latency.translate > 0.0);
    }

    #[test]
    fn english_bypasses_translation() {
        let (p, c) = setup(ProviderGateway::local(lexicon()));
        let r = p.answer(&english("coffee pruning time"), &c, &[]).unwrap();
        assert_eq!(r.latency.translate, 0.0);
        assert_eq!(r.trace.english_query, "coffee pruning time");
    }

    #[test]
    fn empty_collection_is_out_of_content() {
        let lx = lexicon();
        let p = Pipeline::new(
            Arc::new(ProviderGateway::local(Arc::clone(&lx))),
            lx,
            PipelineConfig::default(),
        );
        let c = KnowledgeCollection::new("k", "K", ["coffee"], 256).unwrap();
        let r = p.answer(&english("how do I prune coffee?"), &c, &[]).unwrap();
        assert!(!r.answered);
        assert_eq!(r.unanswered_category, Some(UnansweredCategory::OutOfContent));
    }

    #[test]
    fn weather_goes_to_tool() {
        let (p, c) = setup(ProviderGateway::local(lexicon()));
        let r = p.answer(&english("weather in Nyeri tomorrow"), &c, &[]).unwrap();
        assert_eq!(r.route, Route::Tool);
        assert!(r.answered);
        assert!(r.response_text.contains("Nyeri"));
    }

    #[test]
    fn provider_failure_degrades_to_out_of_content() {
        let lx = lexicon();
        let gateway = ProviderGateway::local(Arc::clone(&lx))
            .with_provider(Arc::new(ScriptedProvider::new("broken").failing(TaskKind::Generate)))
            .with_route("generate", "broken")
            .unwrap();
        let (p, c) = setup(gateway);
        let r = p.answer(&english("when is coffee pruning done?"), &c, &[]).unwrap();
        assert!(!r.answered);
        assert_eq!(r.unanswered_category, Some(UnansweredCategory::OutOfContent));
        assert!(!r.trace.warnings.is_empty());
    }

    #[test]
    fn rephrase_failure_falls_back_to_verbatim() {
        let lx = lexicon();
        let gateway = ProviderGateway::local(Arc::clone(&lx))
            .with_provider(Arc::new(ScriptedProvider::new("broken").failing(TaskKind::Rephrase)))
            .with_route("rephrase", "broken")
            .unwrap();
        let (p, _) = setup(gateway);
        let (_, subs, warnings) = p.rephrase_and_decompose("coffee pruning and dairy water", &[], None);
        assert_eq!(subs, vec!["coffee pruning and dairy water"]);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn empty_text_is_validation_error() {
        let (p, c) = setup(ProviderGateway::local(lexicon()));
        let mut q = english("x");
        q.raw_text = " ".into();
        assert!(matches!(p.answer(&q, &c, &[]), Err(PipelineError::Validation(_))));
    }
}

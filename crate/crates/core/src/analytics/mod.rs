//! Metrics over conversation logs and ad-hoc inputs.
//!
//! Every function here is a pure computation over the values passed in, so
//! results do not depend on the order in which turns were collected beyond
//! what each report documents.

pub mod answers;
pub mod bloom;
pub mod clarity;
pub mod engagement;
pub mod latency;
pub mod quality;
pub mod readability;
pub mod redteam;
pub mod report;
pub mod safety;
pub mod timelines;
pub mod topics;

use chrono::{DateTime, Datelike, Utc};
use thiserror::Error;

use crate::pipeline::PipelineError;
use crate::provider::{ProviderError, ProviderGateway};
use crate::store::Turn;

pub use answers::{answer_rate, unanswered_breakdown, AnswerReport};
pub use bloom::{classify_bloom, BloomLevel};
pub use clarity::{score_clarity, ClarityAssessment};
pub use engagement::{assign_tiers, power_user_curve, EngagementReport, TierFractions};
pub use latency::{latency_stats, LatencyReport};
pub use quality::{
    context_precision, response_quality, ContextPrecisionResult, QualityBand,
    ResponseQualityResult, VerdictSource,
};
pub use readability::{
    count_syllables, flesch_reading_ease, readability_summary, ReadabilityReport, ReadabilitySummary,
};
pub use report::{
    feedback_summary, golden_pairs, metric_report, FeedbackSummary, GoldenPair, Metric, ReportContext,
};
pub use redteam::{run_redteam_campaign, RedTeamCampaign, RedTeamCategory, RedTeamQuestion};
pub use safety::{safety_summary, LexiconScreener, SafetyScreenResult, SafetySummary, Screener};
pub use timelines::{clarity_timeline, query_type_timeline, ClarityTimeline};
pub use topics::{topic_histogram, TopicHistogram};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("could not parse scoring output ({message}); raw output: {raw:?}")]
    Scoring { message: String, raw: String },
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// How judgement-style metrics (clarity, Bloom level, verdicts) are
/// produced: by the deterministic rules, or by asking a provider.
#[derive(Debug, Clone, Copy)]
pub enum ScoringMode<'a> {
    Rule,
    Provider(&'a ProviderGateway),
}

/// `YYYY-MM` of a UTC timestamp.
pub fn month_key(t: DateTime<Utc>) -> String {
    format!("{:04}-{:02}", t.year(), t.month())
}

/// The English text of a turn's query: the pivot translation recorded by the
/// pipeline, or the raw text when none was recorded.
pub fn english_query(turn: &Turn) -> &str {
    let q = turn.result.trace.english_query.trim();
    if q.is_empty() {
        &turn.query.raw_text
    } else {
        q
    }
}

pub(crate) fn require_nonempty<T>(items: &[T], what: &str) -> Result<(), AnalyticsError> {
    if items.is_empty() {
        Err(AnalyticsError::Validation(format!("{what} is empty")))
    } else {
        Ok(())
    }
}

/// `num / den`, or 0 when `den` is 0.
pub(crate) fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

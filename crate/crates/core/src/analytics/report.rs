//! Named metrics over a slice of a conversation log, rendered as JSON.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::answers::AnswerReport;
use super::engagement::{power_user_curve, TierFractions};
use super::latency::latency_stats;
use super::readability::readability_summary;
use super::safety::{safety_summary, Screener};
use super::timelines::{clarity_timeline, query_type_timeline};
use super::topics::topic_histogram;
use super::{english_query, AnalyticsError, ScoringMode};
use crate::lexicon::Lexicon;
use crate::store::{FeedbackRecord, IssueTag, Thumb, Turn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    AnswerRate,
    Latency,
    Engagement,
    Topics,
    QueryTypes,
    Clarity,
    Readability,
    Safety,
    Feedback,
    GoldenPairs,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::AnswerRate,
        Metric::Latency,
        Metric::Engagement,
        Metric::Topics,
        Metric::QueryTypes,
        Metric::Clarity,
        Metric::Readability,
        Metric::Safety,
        Metric::Feedback,
        Metric::GoldenPairs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::AnswerRate => "answer_rate",
            Metric::Latency => "latency",
            Metric::Engagement => "engagement",
            Metric::Topics => "topics",
            Metric::QueryTypes => "query_types",
            Metric::Clarity => "clarity",
            Metric::Readability => "readability",
            Metric::Safety => "safety",
            Metric::Feedback => "feedback",
            Metric::GoldenPairs => "golden_pairs",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|m| m.as_str()).collect();
                format!("unknown metric `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Inputs a metric may need besides the turns.
#[derive(Clone, Copy)]
pub struct ReportContext<'a> {
    pub lexicon: &'a Lexicon,
    pub mode: ScoringMode<'a>,
    pub histogram_edges: &'a [f64],
    pub tiers: TierFractions,
    pub screener: &'a dyn Screener,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeedbackSummary {
    /// Turns with at least one feedback record; only the latest counts.
    pub rated_turns: usize,
    pub thumbs_up: usize,
    pub thumbs_down: usize,
    /// Mean of the star ratings given, if any.
    pub mean_stars: Option<f64>,
    pub issue_tags: BTreeMap<IssueTag, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenPair {
    pub turn_id: String,
    pub query: String,
    pub response: String,
    pub citations: Vec<String>,
}

fn latest_feedback<'a>(turns: &[Turn], feedback: &'a [FeedbackRecord]) -> Vec<(&'a FeedbackRecord, bool)> {
    let answered: HashMap<&str, bool> = turns.iter().map(|t| (t.turn_id.as_str(), t.result.answered)).collect();
    let mut latest: BTreeMap<&str, &FeedbackRecord> = BTreeMap::new();
    for f in feedback {
        if answered.contains_key(f.turn_id.as_str()) {
            latest.insert(&f.turn_id, f);
        }
    }
    latest
        .into_values()
        .map(|f| (f, answered[f.turn_id.as_str()]))
        .collect()
}

/// Thumbs, stars and issue tags, counting each turn's latest record only.
pub fn feedback_summary(turns: &[Turn], feedback: &[FeedbackRecord]) -> FeedbackSummary {
    let latest = latest_feedback(turns, feedback);
    let mut s = FeedbackSummary {
        rated_turns: latest.len(),
        ..Default::default()
    };
    let stars: Vec<u8> = latest.iter().filter_map(|(f, _)| f.stars).collect();
    for (f, _) in &latest {
        match f.thumb {
            Some(Thumb::Up) => s.thumbs_up += 1,
            Some(Thumb::Down) => s.thumbs_down += 1,
            None => {}
        }
        for tag in &f.issue_tags {
            *s.issue_tags.entry(*tag).or_default() += 1;
        }
    }
    if !stars.is_empty() {
        s.mean_stars = Some(stars.iter().map(|&x| f64::from(x)).sum::<f64>() / stars.len() as f64);
    }
    s
}

/// Answered turns whose latest feedback is a thumbs-up, in turn order.
pub fn golden_pairs(turns: &[Turn], feedback: &[FeedbackRecord]) -> Vec<GoldenPair> {
    let up: std::collections::HashSet<&str> = latest_feedback(turns, feedback)
        .into_iter()
        .filter(|(f, answered)| *answered && f.thumb == Some(Thumb::Up))
        .map(|(f, _)| f.turn_id.as_str())
        .collect();
    turns
        .iter()
        .filter(|t| up.contains(t.turn_id.as_str()))
        .map(|t| GoldenPair {
            turn_id: t.turn_id.clone(),
            query: english_query(t).to_string(),
            response: t.result.response_text.clone(),
            citations: t.result.citations.clone(),
        })
        .collect()
}

fn to_value<T: Serialize>(v: T) -> Result<Value, AnalyticsError> {
    serde_json::to_value(v).map_err(|e| AnalyticsError::Validation(format!("cannot render report: {e}")))
}

/// Computes `metric` over `turns` (and the feedback on them). An empty turn
/// list yields `None`: there is nothing to report.
pub fn metric_report(
    metric: Metric,
    turns: &[Turn],
    feedback: &[FeedbackRecord],
    ctx: ReportContext<'_>,
) -> Result<Option<Value>, AnalyticsError> {
    if turns.is_empty() {
        return Ok(None);
    }
    let value = match metric {
        Metric::AnswerRate => to_value(AnswerReport::compute(turns)?)?,
        Metric::Latency => to_value(latency_stats(turns, ctx.histogram_edges)?)?,
        Metric::Engagement => to_value(power_user_curve(turns)?)?,
        Metric::Topics => to_value(topic_histogram(turns, ctx.lexicon))?,
        Metric::QueryTypes => to_value(query_type_timeline(turns, ctx.mode, ctx.lexicon)?)?,
        Metric::Clarity => to_value(clarity_timeline(turns, ctx.tiers, ctx.mode, ctx.lexicon)?)?,
        Metric::Readability => to_value(readability_summary(
            turns
                .iter()
                .filter(|t| t.result.answered)
                .map(|t| t.result.response_text.as_str()),
        ))?,
        Metric::Safety => to_value(safety_summary(
            turns
                .iter()
                .map(|t| (t.turn_id.as_str(), t.result.response_text.as_str())),
            ctx.screener,
        ))?,
        Metric::Feedback => to_value(feedback_summary(turns, feedback))?,
        Metric::GoldenPairs => to_value(golden_pairs(turns, feedback))?,
    };
    Ok(Some(value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.as_str().parse::<Metric>().unwrap(), m);
            assert_eq!(serde_json::to_value(m).unwrap(), m.as_str());
        }
        assert!("precision".parse::<Metric>().is_err());
    }
}

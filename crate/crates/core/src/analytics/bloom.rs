use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::clarity::is_fragment;
use super::{AnalyticsError, ScoringMode};
use crate::lexicon::Lexicon;
use crate::provider::prompt::{self, Prompt};
use crate::provider::{CompletionRequest, TaskKind};
use crate::text::terms;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BloomLevel {
    Remember,
    Understand,
    Apply,
    Analyze,
    Evaluate,
    Create,
    /// Not a question at all.
    None,
}

impl BloomLevel {
    pub const ALL: [BloomLevel; 7] = [
        BloomLevel::Remember,
        BloomLevel::Understand,
        BloomLevel::Apply,
        BloomLevel::Analyze,
        BloomLevel::Evaluate,
        BloomLevel::Create,
        BloomLevel::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BloomLevel::Remember => "remember",
            BloomLevel::Understand => "understand",
            BloomLevel::Apply => "apply",
            BloomLevel::Analyze => "analyze",
            BloomLevel::Evaluate => "evaluate",
            BloomLevel::Create => "create",
            BloomLevel::None => "none",
        }
    }
}

impl fmt::Display for BloomLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BloomLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_end_matches('.').to_lowercase();
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown Bloom level `{s}`"))
    }
}

/// Fragments are `none`; otherwise the first level in cue-file order whose
/// cue phrase occurs in the query, defaulting to `understand`.
pub fn rule_level(query: &str, lexicon: &Lexicon) -> BloomLevel {
    if is_fragment(query, lexicon) {
        return BloomLevel::None;
    }
    lexicon
        .first_bloom_match(&terms(query))
        .and_then(|l| l.parse().ok())
        .unwrap_or(BloomLevel::Understand)
}

pub fn classify_bloom(
    query: &str,
    mode: ScoringMode<'_>,
    lexicon: &Lexicon,
) -> Result<BloomLevel, AnalyticsError> {
    if query.trim().is_empty() {
        return Err(AnalyticsError::Validation("query is empty".into()));
    }
    match mode {
        ScoringMode::Rule => Ok(rule_level(query, lexicon)),
        ScoringMode::Provider(gateway) => {
            let request = CompletionRequest::new(
                TaskKind::Bloom,
                Prompt::new(prompt::BLOOM_INSTRUCTION)
                    .field(prompt::QUERY, query)
                    .render(),
            );
            let reply = gateway.complete(&request)?;
            reply.parse().map_err(|message| AnalyticsError::Scoring {
                message,
                raw: reply.clone(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_queries() {
        let lx = Lexicon::builtin();
        let cases = [
            ("When is the time to plant corn?", BloomLevel::Remember),
            (
                "What is the recommended fertilization schedule for early crop areas in coffee farming?",
                BloomLevel::Apply,
            ),
            (
                "How does irrigation in coffee farming increase rainfall and benefit the plants?",
                BloomLevel::Analyze,
            ),
            ("Coffee spraying", BloomLevel::None),
            (
                "What are the important periods of watering coffee plants during the wet season?",
                BloomLevel::Understand,
            ),
            (
                "How can farmers decide when to water coffee plants based on humidity levels?",
                BloomLevel::Apply,
            ),
        ];
        for (q, want) in cases {
            assert_eq!(rule_level(q, &lx), want, "{q}");
        }
    }

    #[test]
    fn other_levels() {
        let lx = Lexicon::builtin();
        assert_eq!(rule_level("compare napier grass and maize silage for dairy", &lx), BloomLevel::Evaluate);
        assert_eq!(rule_level("design a crop rotation plan for my farm", &lx), BloomLevel::Create);
        assert_eq!(rule_level("tell me about coffee farming", &lx), BloomLevel::Understand);
    }

    #[test]
    fn labels_round_trip() {
        for l in BloomLevel::ALL {
            assert_eq!(l.as_str().parse::<BloomLevel>().unwrap(), l);
        }
    }
}

use serde::{Deserialize, Serialize};

use super::{AnalyticsError, ScoringMode};
use crate::lexicon::Lexicon;
use crate::provider::prompt::{self, Prompt};
use crate::provider::{CompletionRequest, TaskKind};
use crate::text::{terms, words};

pub const MIN_SCORE: u8 = 1;
pub const MAX_SCORE: u8 = 3;
/// Token count from which an opener makes the intent fully clear.
pub const CLEAR_INTENT_MIN_TOKENS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClarityAssessment {
    pub score_intent: u8,
    pub score_topic: u8,
    pub score_entity: u8,
    /// Reasons for the intent, topic and entity scores, in that order.
    pub reasons: [String; 3],
    #[serde(rename = "final")]
    pub final_score: u8,
}

/// Round-half-up of the mean of three scores, in integers:
/// `floor(sum/3 + 1/2) = floor((2·sum + 3) / 6)`.
pub fn final_score(intent: u8, topic: u8, entity: u8) -> u8 {
    let sum = u32::from(intent) + u32::from(topic) + u32::from(entity);
    ((2 * sum + 3) / 6) as u8
}

impl ClarityAssessment {
    /// Builds an assessment, computing the final score from the three
    /// sub-scores.
    pub fn new(scores: [u8; 3], reasons: [String; 3]) -> Result<Self, AnalyticsError> {
        if let Some(s) = scores.iter().find(|s| !(MIN_SCORE..=MAX_SCORE).contains(s)) {
            return Err(AnalyticsError::Validation(format!(
                "clarity sub-score {s} outside {MIN_SCORE}..={MAX_SCORE}"
            )));
        }
        Ok(Self {
            score_intent: scores[0],
            score_topic: scores[1],
            score_entity: scores[2],
            reasons,
            final_score: final_score(scores[0], scores[1], scores[2]),
        })
    }

    pub fn label(&self) -> ClarityLabel {
        ClarityLabel::of(self.final_score)
    }

    /// The labeled-line reply format providers are asked for.
    pub fn to_labeled_lines(&self) -> String {
        format!(
            "intent: {} | {}\ntopic: {} | {}\nentity: {} | {}\nfinal: {}",
            self.score_intent,
            self.reasons[0],
            self.score_topic,
            self.reasons[1],
            self.score_entity,
            self.reasons[2],
            self.final_score
        )
    }

    /// Parses the labeled-line format. The final score is always recomputed
    /// from the sub-scores; a `final:` line, if present, is ignored.
    pub fn parse_labeled(raw: &str) -> Result<Self, AnalyticsError> {
        let fail = |message: String| AnalyticsError::Scoring {
            message,
            raw: raw.to_string(),
        };
        let mut scores = [None; 3];
        let mut reasons: [String; 3] = Default::default();
        for line in raw.lines() {
            let Some((key, rest)) = line.split_once(':') else {
                continue;
            };
            let slot = match key.trim().to_lowercase().as_str() {
                "intent" => 0,
                "topic" => 1,
                "entity" => 2,
                _ => continue,
            };
            let (score, reason) = rest.split_once('|').unwrap_or((rest, ""));
            let score: u8 = score
                .trim()
                .parse()
                .map_err(|_| fail(format!("`{}` score is not an integer", key.trim())))?;
            scores[slot] = Some(score);
            reasons[slot] = reason.trim().to_string();
        }
        let [Some(i), Some(t), Some(e)] = scores else {
            return Err(fail("expected intent, topic and entity lines".into()));
        };
        Self::new([i, t, e], reasons).map_err(|e| fail(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClarityLabel {
    NotClear,
    SomewhatClear,
    Clear,
}

impl ClarityLabel {
    pub fn of(final_score: u8) -> Self {
        match final_score {
            3.. => ClarityLabel::Clear,
            2 => ClarityLabel::SomewhatClear,
            _ => ClarityLabel::NotClear,
        }
    }
}

/// A query too short to carry an ask: under 3 terms, or under 4 terms with
/// neither an opener nor a question mark.
pub fn is_fragment(query: &str, lexicon: &Lexicon) -> bool {
    let t = terms(query);
    let has_opener = lexicon.has_direct_opener(&t) || lexicon.has_indirect_opener(&t);
    t.len() < 3 || (t.len() < 4 && !has_opener && !query.trim_end().ends_with('?'))
}

/// A crop, an agronomy term or a capitalized word past the first position.
fn entities(query: &str, lexicon: &Lexicon) -> Vec<String> {
    let mut found: Vec<String> = terms(query)
        .into_iter()
        .filter(|t| lexicon.crop_of(t).is_some() || lexicon.is_agronomy(t))
        .collect();
    for w in words(query).into_iter().skip(1) {
        let clean: String = w.chars().filter(|c| c.is_alphanumeric()).collect();
        if clean.chars().next().is_some_and(char::is_uppercase) {
            let lower = clean.to_lowercase();
            if !lexicon.is_stopword(&lower) && !found.contains(&lower) {
                found.push(lower);
            }
        }
    }
    found
}

/// Deterministic clarity scoring.
///
/// - intent: 1 for a fragment, 2 for an indirect opener, 3 for a direct
///   opener with at least five terms, otherwise 2;
/// - topic: 1 for a fragment, 3 when a crop is named, 2 for an agronomy term
///   alone, otherwise 1;
/// - entity: 1 for a fragment, 3 for an entity plus an attribute term, 2 for
///   an entity alone, otherwise 1.
pub fn rule_assessment(query: &str, lexicon: &Lexicon) -> ClarityAssessment {
    let t = terms(query);
    let fragment = is_fragment(query, lexicon);
    let (intent, intent_reason) = if fragment {
        (1, "The input is a fragment and does not state what is being asked.".to_string())
    } else if lexicon.has_indirect_opener(&t) {
        (2, "The ask is implied by an indirect opener rather than stated directly.".to_string())
    } else if lexicon.has_direct_opener(&t) && t.len() >= CLEAR_INTENT_MIN_TOKENS {
        (3, "The input opens with a direct question or request.".to_string())
    } else {
        (2, "The ask can be inferred but is not phrased as a direct question.".to_string())
    };

    let crops = lexicon.crops_in(query);
    let agronomy: Vec<&String> = t.iter().filter(|x| lexicon.is_agronomy(x)).collect();
    let (topic, topic_reason) = if fragment {
        (1, "The input is too short to pin down a topic.".to_string())
    } else if !crops.is_empty() {
        let names: Vec<String> = crops.into_iter().collect();
        (3, format!("The topic is specific to {}.", names.join(", ")))
    } else if !agronomy.is_empty() {
        (2, format!("The input concerns {} but names no crop.", agronomy[0]))
    } else {
        (1, "No crop or farming practice is named.".to_string())
    };

    let ents = entities(query, lexicon);
    let attrs: Vec<&String> = t.iter().filter(|x| lexicon.is_attribute(x)).collect();
    let (entity, entity_reason) = if fragment {
        (1, "No specific entity or attribute can be identified.".to_string())
    } else if let (Some(e), Some(a)) = (ents.first(), attrs.first()) {
        (3, format!("The input names an entity ({e}) and an attribute ({a})."))
    } else if let Some(e) = ents.first() {
        (2, format!("The input names {e} but no specific attribute."))
    } else {
        (1, "No specific entity or attribute is mentioned.".to_string())
    };

    ClarityAssessment::new(
        [intent, topic, entity],
        [intent_reason, topic_reason, entity_reason],
    )
    .expect("rule scores are within range")
}

/// Scores a query by rule or by asking a provider with the clarity prompt.
pub fn score_clarity(
    query: &str,
    mode: ScoringMode<'_>,
    lexicon: &Lexicon,
) -> Result<ClarityAssessment, AnalyticsError> {
    if query.trim().is_empty() {
        return Err(AnalyticsError::Validation("query is empty".into()));
    }
    match mode {
        ScoringMode::Rule => Ok(rule_assessment(query, lexicon)),
        ScoringMode::Provider(gateway) => {
            let request = CompletionRequest::new(
                TaskKind::Clarity,
                Prompt::new(format!("{}\n\n{}", prompt::CLARITY_INSTRUCTION, prompt::CLARITY_FORMAT))
                    .field(prompt::QUERY, query)
                    .render(),
            );
            let reply = gateway.complete(&request)?;
            ClarityAssessment::parse_labeled(&reply)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(q: &str) -> (u8, u8, u8, u8) {
        let a = rule_assessment(q, &Lexicon::builtin());
        (a.score_intent, a.score_topic, a.score_entity, a.final_score)
    }

    #[test]
    fn final_rounding_examples() {
        assert_eq!(final_score(3, 3, 2), 3);
        assert_eq!(final_score(2, 3, 2), 2);
        assert_eq!(final_score(1, 1, 1), 1);
    }

    #[test]
    fn reference_queries() {
        assert_eq!(scores("When is the time to plant corn?"), (3, 3, 2, 3));
        assert_eq!(
            scores("What is the recommended fertilization schedule for early crop areas in coffee farming?"),
            (3, 3, 3, 3)
        );
        assert_eq!(
            scores("How does irrigation in coffee farming increase rainfall and benefit the plants?"),
            (2, 3, 2, 2)
        );
        assert_eq!(scores("Coffee spraying"), (1, 1, 1, 1));
        assert_eq!(scores("Tell the benefits of Batian coffee variety"), (3, 3, 2, 3));
    }

    #[test]
    fn labeled_lines_round_trip() {
        let a = rule_assessment("When is the time to plant corn?", &Lexicon::builtin());
        assert_eq!(ClarityAssessment::parse_labeled(&a.to_labeled_lines()).unwrap(), a);
    }

    #[test]
    fn unparseable_output_keeps_raw() {
        match ClarityAssessment::parse_labeled("looks clear to me") {
            Err(AnalyticsError::Scoring { raw, .. }) => assert_eq!(raw, "looks clear to me"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ClarityAssessment::parse_labeled("intent: 4 | x\ntopic: 1\nentity: 1").is_err());
    }
}

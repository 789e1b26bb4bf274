use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::intent::IntentLabel;
use crate::lexicon::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnansweredCategory {
    /// Not about agriculture.
    OutOfContext,
    /// About a crop the collection does not cover.
    OutOfCollection,
    /// In scope, but the knowledge base has nothing that answers it.
    OutOfContent,
}

impl UnansweredCategory {
    pub const ALL: [UnansweredCategory; 3] = [
        UnansweredCategory::OutOfContext,
        UnansweredCategory::OutOfCollection,
        UnansweredCategory::OutOfContent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            UnansweredCategory::OutOfContext => "out_of_context",
            UnansweredCategory::OutOfCollection => "out_of_collection",
            UnansweredCategory::OutOfContent => "out_of_content",
        }
    }
}

impl fmt::Display for UnansweredCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UnansweredCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown unanswered category `{s}`"))
    }
}

/// Precedence: no crop or agronomy term and not a farming question →
/// out of context; mentions a crop outside `collection_crops` → out of
/// collection; otherwise out of content.
pub fn categorize_unanswered(
    query: &str,
    intent: IntentLabel,
    collection_crops: &BTreeSet<String>,
    lexicon: &Lexicon,
) -> UnansweredCategory {
    if !lexicon.mentions_farming(query) && intent != IntentLabel::FarmingQuestion {
        return UnansweredCategory::OutOfContext;
    }
    if lexicon
        .crops_in(query)
        .iter()
        .any(|c| !collection_crops.contains(c))
    {
        return UnansweredCategory::OutOfCollection;
    }
    UnansweredCategory::OutOfContent
}

/// Reply shown for a non-answer.
pub fn unanswered_message(
    category: UnansweredCategory,
    query: &str,
    collection_crops: &BTreeSet<String>,
    lexicon: &Lexicon,
) -> String {
    let supported = collection_crops.iter().cloned().collect::<Vec<_>>().join(", ");
    match category {
        UnansweredCategory::OutOfContext => {
            "I can only help with farming questions. Please ask about your crops, livestock or farm practices."
                .to_string()
        }
        UnansweredCategory::OutOfCollection => {
            let asked: Vec<String> = lexicon
                .crops_in(query)
                .into_iter()
                .filter(|c| !collection_crops.contains(c))
                .collect();
            format!(
                "I do not have information about {} yet. I can help with {supported}.",
                asked.join(", ")
            )
        }
        UnansweredCategory::OutOfContent => {
            "I could not find an answer to this in my knowledge base yet. Please try rephrasing, or ask your extension agent."
                .to_string()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::intent::rule_intent;

    fn categorize(q: &str) -> UnansweredCategory {
        let lx = Lexicon::builtin();
        let crops = BTreeSet::from(["coffee".into(), "dairy".into(), "potato".into(), "maize".into()]);
        categorize_unanswered(q, rule_intent(q, &lx), &crops, &lx)
    }

    #[test]
    fn precedence_examples() {
        assert_eq!(categorize("who won the football match"), UnansweredCategory::OutOfContext);
        assert_eq!(categorize("how to grow saffron"), UnansweredCategory::OutOfCollection);
        assert_eq!(categorize("coffee stump grafting details"), UnansweredCategory::OutOfContent);
    }

    #[test]
    fn question_without_lexicon_terms_is_content_gap() {
        assert_eq!(categorize("is this normal?"), UnansweredCategory::OutOfContent);
    }

    #[test]
    fn category_strings_round_trip() {
        for c in UnansweredCategory::ALL {
            assert_eq!(c.as_str().parse::<UnansweredCategory>().unwrap(), c);
        }
    }
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lexicon::Lexicon;
use crate::text::{contains_phrase, terms};

/// Longest message still treated as a menu command.
pub const MENU_MAX_TERMS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentLabel {
    FarmingQuestion,
    Greeting,
    MenuNavigation,
    ToolRequest,
    Other,
}

impl IntentLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            IntentLabel::FarmingQuestion => "farming_question",
            IntentLabel::Greeting => "greeting",
            IntentLabel::MenuNavigation => "menu_navigation",
            IntentLabel::ToolRequest => "tool_request",
            IntentLabel::Other => "other",
        }
    }
}

impl fmt::Display for IntentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IntentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "farming_question" => Ok(IntentLabel::FarmingQuestion),
            "greeting" => Ok(IntentLabel::Greeting),
            "menu_navigation" => Ok(IntentLabel::MenuNavigation),
            "tool_request" => Ok(IntentLabel::ToolRequest),
            "other" => Ok(IntentLabel::Other),
            other => Err(format!("unknown intent label `{other}`")),
        }
    }
}

/// Rule table, first match wins:
///
/// 1. every term is a greeting word or stopword, with at least one greeting
///    → `greeting`;
/// 2. at most [`MENU_MAX_TERMS`] terms containing a menu phrase →
///    `menu_navigation`;
/// 3. any tool trigger term → `tool_request`;
/// 4. any crop or agronomy term, or a trailing `?` → `farming_question`;
/// 5. otherwise `other`.
pub fn rule_intent(text: &str, lexicon: &Lexicon) -> IntentLabel {
    let found = terms(text);
    let has_greeting = found.iter().any(|t| lexicon.is_greeting(t));
    if has_greeting
        && found
            .iter()
            .all(|t| lexicon.is_greeting(t) || lexicon.is_stopword(t))
    {
        return IntentLabel::Greeting;
    }
    if !found.is_empty()
        && found.len() <= MENU_MAX_TERMS
        && lexicon
            .menu_phrases()
            .iter()
            .any(|p| contains_phrase(&found, p))
    {
        return IntentLabel::MenuNavigation;
    }
    if found.iter().any(|t| lexicon.tool_for(t).is_some()) {
        return IntentLabel::ToolRequest;
    }
    if lexicon.mentions_farming(text) || text.trim_end().ends_with('?') {
        return IntentLabel::FarmingQuestion;
    }
    IntentLabel::Other
}

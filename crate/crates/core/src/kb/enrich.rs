//! Chunk summaries and topic tags.

use std::collections::BTreeSet;

use crate::lexicon::Lexicon;
use crate::text::split_sentences;

/// Word cap for local summaries.
pub const SUMMARY_MAX_WORDS: usize = 30;

/// First sentence of `text`, cut to at most `max_words` words.
pub fn first_sentence_summary(text: &str, max_words: usize) -> String {
    let Some(first) = split_sentences(text).into_iter().next() else {
        return String::new();
    };
    first
        .split_whitespace()
        .take(max_words)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Topic names whose keywords occur among the terms of `text`.
pub fn lexicon_topics(text: &str, lexicon: &Lexicon) -> BTreeSet<String> {
    lexicon.topics_in(text)
}

/// Topic names in a provider's comma or newline separated reply, restricted
/// to the topics the lexicon defines.
pub fn parse_topic_reply(reply: &str, lexicon: &Lexicon) -> BTreeSet<String> {
    let allowed: BTreeSet<&str> = lexicon.topics().iter().map(|t| t.name.as_str()).collect();
    reply
        .split([',', '\n'])
        .map(|t| t.trim().to_lowercase())
        .filter(|t| allowed.contains(t.as_str()))
        .collect()
}

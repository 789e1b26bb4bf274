//! Tokenization and sentence splitting shared by every rule-based component.
//!
//! Two notions of "token" coexist here:
//!
//! - a *word* is a whitespace-delimited run of characters; chunk budgets and
//!   readability counts use words,
//! - a *term* is a lowercase alphanumeric run; embeddings and lexicon matching
//!   use terms.

use std::collections::BTreeSet;

/// Whitespace-delimited words.
pub fn words(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Collapses every whitespace run to a single space.
pub fn normalize_whitespace(text: &str) -> String {
    words(text).join(" ")
}

/// Lowercase alphanumeric terms in order of appearance.
pub fn terms(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Distinct terms that are not in `stopwords`.
pub fn content_terms<F>(text: &str, is_stopword: F) -> BTreeSet<String>
where
    F: Fn(&str) -> bool,
{
    terms(text).into_iter().filter(|t| !is_stopword(t)).collect()
}

/// True when `phrase` occurs as a contiguous run inside `haystack`.
pub fn contains_phrase<S: AsRef<str>>(haystack: &[S], phrase: &[String]) -> bool {
    if phrase.is_empty() || phrase.len() > haystack.len() {
        return false;
    }
    haystack
        .windows(phrase.len())
        .any(|w| w.iter().zip(phrase).all(|(a, b)| a.as_ref() == b))
}

/// True for `.`, `!` or `?`, the characters that close a sentence.
pub fn is_terminator(ch: char) -> bool {
    matches!(ch, '.' | '!' | '?')
}

/// Splits text into trimmed sentence slices.
///
/// A sentence ends at a terminator followed by whitespace (or end of text), or
/// at a line break. Every returned slice is a verbatim substring of `text`.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((idx, ch)) = chars.next() {
        let end = if ch == '\n' {
            Some(idx)
        } else if is_terminator(ch) {
            match chars.peek() {
                None => Some(idx + ch.len_utf8()),
                Some((_, next)) if next.is_whitespace() => Some(idx + ch.len_utf8()),
                _ => None,
            }
        } else {
            None
        };
        if let Some(end) = end {
            let piece = text[start..end].trim();
            if !piece.is_empty() {
                out.push(piece);
            }
            start = end;
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

/// Sentence count for readability: runs of text closed by `.`, `!` or `?`,
/// with a trailing unterminated run counting as one more. At least 1 for any
/// text containing a word.
pub fn readability_sentence_count(text: &str) -> usize {
    let mut count = 0;
    let mut has_word_since_break = false;
    for ch in text.chars() {
        if is_terminator(ch) {
            if has_word_since_break {
                count += 1;
            }
            has_word_since_break = false;
        } else if ch.is_alphanumeric() {
            has_word_since_break = true;
        }
    }
    if has_word_since_break {
        count += 1;
    }
    count
}

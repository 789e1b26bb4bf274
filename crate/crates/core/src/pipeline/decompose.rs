//! Local rules for rephrasing against history and splitting compound
//! questions.

use crate::lexicon::Lexicon;
use crate::text::terms;

/// Words that refer back to the crop under discussion.
const CROP_PRONOUNS: [&str; 2] = ["it", "them"];

/// Minimum words per segment for an "and" to count as a clause boundary.
pub const MIN_CLAUSE_WORDS: usize = 3;

/// Splits a word into leading punctuation, core, trailing punctuation.
fn split_word(word: &str) -> (&str, &str, &str) {
    let start = word
        .find(|c: char| c.is_alphanumeric())
        .unwrap_or(word.len());
    let end = word
        .rfind(|c: char| c.is_alphanumeric())
        .map(|i| i + word[i..].chars().next().map_or(1, char::len_utf8))
        .unwrap_or(start);
    (&word[..start], &word[start..end], &word[end..])
}

/// Most recently mentioned crop, scanning history from newest to oldest.
fn crop_from_history(history: &[String], lexicon: &Lexicon) -> Option<String> {
    history.iter().rev().find_map(|h| {
        terms(h)
            .iter()
            .rev()
            .find_map(|t| lexicon.crop_of(t))
            .map(str::to_string)
    })
}

/// Replaces `it` / `them` with the selected crop, or failing that the crop
/// most recently mentioned in `history`. Queries that already name a crop
/// are returned unchanged, as are queries without any crop to resolve to.
pub fn resolve_references(
    query: &str,
    selected_crop: Option<&str>,
    history: &[String],
    lexicon: &Lexicon,
) -> String {
    if !lexicon.crops_in(query).is_empty() {
        return query.trim().to_string();
    }
    let crop = selected_crop
        .map(|c| c.trim().to_string())
        .filter(|c| !c.is_empty())
        .or_else(|| crop_from_history(history, lexicon));
    let Some(crop) = crop else {
        return query.trim().to_string();
    };
    query
        .split_whitespace()
        .map(|w| {
            let (pre, core, post) = split_word(w);
            if CROP_PRONOUNS.contains(&core.to_lowercase().as_str()) {
                format!("{pre}{crop}{post}")
            } else {
                w.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Splits on every standalone "and" when each resulting segment has at least
/// [`MIN_CLAUSE_WORDS`] words; otherwise the query stays whole. A segment
/// that lost the crop name gets ` for <crop>` appended, using the first crop
/// word of the whole query.
pub fn split_clauses(query: &str, lexicon: &Lexicon) -> Vec<String> {
    let query = query.trim();
    let words: Vec<&str> = query.split_whitespace().collect();
    let mut segments: Vec<Vec<&str>> = vec![Vec::new()];
    for w in &words {
        if split_word(w).1.eq_ignore_ascii_case("and") && split_word(w).0.is_empty() {
            segments.push(Vec::new());
        } else if let Some(last) = segments.last_mut() {
            last.push(w);
        }
    }
    if segments.len() < 2 || segments.iter().any(|s| s.len() < MIN_CLAUSE_WORDS) {
        return vec![query.to_string()];
    }
    let crop_word = words.iter().find_map(|w| {
        let core = split_word(w).1;
        lexicon
            .crop_of(&core.to_lowercase())
            .map(|_| core.to_string())
    });
    segments
        .into_iter()
        .map(|seg| {
            let text = seg.join(" ");
            match &crop_word {
                Some(crop) if lexicon.crops_in(&text).is_empty() => {
                    let body = text.trim_end_matches(['?', '.', '!', ',']);
                    let tail = &text[body.len()..];
                    let tail = if tail.starts_with(',') { "" } else { tail };
                    format!("{body} for {crop}{tail}")
                }
                _ => text.trim_end_matches(',').to_string(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lx() -> Lexicon {
        Lexicon::builtin()
    }

    #[test]
    fn pronoun_takes_selected_crop() {
        assert_eq!(
            resolve_references("how do I plant it", Some("coffee"), &[], &lx()),
            "how do I plant coffee"
        );
        assert_eq!(
            resolve_references("when do I spray them?", Some("potato"), &[], &lx()),
            "when do I spray potato?"
        );
    }

    #[test]
    fn pronoun_falls_back_to_history() {
        let history = vec!["what feed for cows".to_string(), "how to store maize".to_string()];
        assert_eq!(
            resolve_references("how long can I keep it", None, &history, &lx()),
            "how long can I keep maize"
        );
    }

    #[test]
    fn named_crop_wins_over_selection() {
        assert_eq!(
            resolve_references("how do I store it after harvesting maize", Some("coffee"), &[], &lx()),
            "how do I store it after harvesting maize"
        );
    }

    #[test]
    fn disease_name_keeps_query_whole() {
        let q = "symptoms and treatment for foot and mouth disease in cows";
        assert_eq!(split_clauses(q, &lx()), vec![q.to_string()]);
    }

    #[test]
    fn two_clauses_split() {
        assert_eq!(
            split_clauses("spacing for maize and fertilizer schedule for maize", &lx()),
            vec!["spacing for maize", "fertilizer schedule for maize"]
        );
    }

    #[test]
    fn split_segments_keep_the_crop() {
        assert_eq!(
            split_clauses("how do I plant coffee and when do I prune?", &lx()),
            vec!["how do I plant coffee", "when do I prune for coffee?"]
        );
    }

    #[test]
    fn punctuation_helpers() {
        assert_eq!(split_word("(it?)"), ("(", "it", "?)"));
        assert_eq!(split_word("..."), ("...", "", ""));
    }
}

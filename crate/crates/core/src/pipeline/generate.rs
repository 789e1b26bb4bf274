//! Extractive answer composition.

use crate::lexicon::Lexicon;
use crate::text::{content_terms, is_terminator, split_sentences};

/// For each passage in order, the sentence sharing the most non-crop content
/// terms with the query, then the most content terms overall (earliest on
/// ties). Crop names are discounted because every sentence of a crop guide
/// tends to share them. Passages whose best sentence shares nothing, and
/// sentences already taken, are skipped. Returns the passage
/// index with each sentence.
pub fn extract_sentences(query: &str, passages: &[String], lexicon: &Lexicon) -> Vec<(usize, String)> {
    let stop = |t: &str| lexicon.is_stopword(t);
    let q = content_terms(query, stop);
    let mut out: Vec<(usize, String)> = Vec::new();
    for (i, passage) in passages.iter().enumerate() {
        let mut best: Option<(&str, (usize, usize))> = None;
        for sentence in split_sentences(passage) {
            let shared: Vec<String> = content_terms(sentence, stop).intersection(&q).cloned().collect();
            let specific = shared.iter().filter(|t| lexicon.crop_of(t).is_none()).count();
            let key = (specific, shared.len());
            if best.map_or(true, |(_, b)| key > b) {
                best = Some((sentence, key));
            }
        }
        if let Some((sentence, (_, overlap))) = best {
            if overlap > 0 && !out.iter().any(|(_, s)| s == sentence) {
                out.push((i, sentence.to_string()));
            }
        }
    }
    out
}

/// Joins extracted sentences: a space after a sentence that ends with a
/// terminator, a line break otherwise (table rows, transcript lines).
pub fn join_sentences<S: AsRef<str>>(sentences: &[S]) -> String {
    let mut out = String::new();
    for s in sentences {
        let s = s.as_ref();
        if !out.is_empty() {
            if out.chars().last().is_some_and(is_terminator) {
                out.push(' ');
            } else {
                out.push('\n');
            }
        }
        out.push_str(s);
    }
    out
}

/// Parses `[n] sentence` lines from a generation reply. Indices are 1-based
/// passage positions; blank lines are ignored.
pub fn parse_generation(reply: &str, passage_count: usize) -> Result<Vec<(usize, String)>, String> {
    let mut out = Vec::new();
    for line in reply.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let rest = line
            .strip_prefix('[')
            .ok_or_else(|| format!("line without passage marker: `{line}`"))?;
        let (num, sentence) = rest
            .split_once(']')
            .ok_or_else(|| format!("unterminated passage marker: `{line}`"))?;
        let n: usize = num
            .trim()
            .parse()
            .map_err(|_| format!("bad passage number in `{line}`"))?;
        if n == 0 || n > passage_count {
            return Err(format!("passage number {n} out of range 1..={passage_count}"));
        }
        let sentence = sentence.trim();
        if sentence.is_empty() {
            return Err(format!("empty sentence in `{line}`"));
        }
        out.push((n - 1, sentence.to_string()));
    }
    Ok(out)
}

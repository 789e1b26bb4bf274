use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::text::{readability_sentence_count, words};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadabilityBucket {
    /// Score of 80 or more.
    VeryEasy,
    /// At least 60 and below 80.
    Standard,
    /// Below 60.
    Difficult,
}

impl ReadabilityBucket {
    pub fn of(score: f64) -> Self {
        if score >= 80.0 {
            ReadabilityBucket::VeryEasy
        } else if score >= 60.0 {
            ReadabilityBucket::Standard
        } else {
            ReadabilityBucket::Difficult
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityReport {
    /// Flesch reading ease clamped to [0, 100]; higher is easier.
    pub score: f64,
    /// The unclamped value.
    pub raw_score: f64,
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    pub bucket: ReadabilityBucket,
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Counts maximal vowel groups (`aeiouy`) in the lowercased letters of
/// `word`, minus one for a final silent `e` when that leaves at least one
/// group. Never less than 1.
pub fn count_syllables(word: &str) -> usize {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    let mut groups = 0;
    let mut in_group = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }
    if groups > 1 && letters.last() == Some(&'e') && !letters.ends_with(&['e', 'e']) {
        groups -= 1;
    }
    groups.max(1)
}

/// Flesch reading ease: `206.835 − 1.015·(words/sentences) −
/// 84.6·(syllables/words)`, clamped to [0, 100]. Words are whitespace
/// tokens holding at least one letter or digit.
pub fn flesch_reading_ease(text: &str) -> Result<ReadabilityReport, AnalyticsError> {
    let counted: Vec<&str> = words(text)
        .into_iter()
        .filter(|w| w.chars().any(char::is_alphanumeric))
        .collect();
    if counted.is_empty() {
        return Err(AnalyticsError::Validation("text has no words".into()));
    }
    let word_count = counted.len();
    let sentences = readability_sentence_count(text).max(1);
    let syllables: usize = counted.iter().map(|w| count_syllables(w)).sum();
    let raw = 206.835
        - 1.015 * (word_count as f64 / sentences as f64)
        - 84.6 * (syllables as f64 / word_count as f64);
    let score = raw.clamp(0.0, 100.0);
    Ok(ReadabilityReport {
        score,
        raw_score: raw,
        words: word_count,
        sentences,
        syllables,
        bucket: ReadabilityBucket::of(score),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReadabilitySummary {
    /// Texts that had at least one word.
    pub count: usize,
    pub mean_score: f64,
    /// Share of scored texts in each bucket.
    pub buckets: BTreeMap<ReadabilityBucket, f64>,
}

/// Mean clamped score and bucket shares over `texts`; texts without words
/// are skipped.
pub fn readability_summary<'a, I>(texts: I) -> ReadabilitySummary
where
    I: IntoIterator<Item = &'a str>,
{
    let scores: Vec<f64> = texts
        .into_iter()
        .filter_map(|t| flesch_reading_ease(t).ok())
        .map(|r| r.score)
        .collect();
    if scores.is_empty() {
        return ReadabilitySummary::default();
    }
    let n = scores.len() as f64;
    let mut buckets = BTreeMap::new();
    for &s in &scores {
        *buckets.entry(ReadabilityBucket::of(s)).or_insert(0.0) += 1.0 / n;
    }
    ReadabilitySummary {
        count: scores.len(),
        mean_score: scores.iter().sum::<f64>() / n,
        buckets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syllable_examples() {
        assert_eq!(count_syllables("plantation"), 3);
        assert_eq!(count_syllables("maize"), 1);
        assert_eq!(count_syllables("a"), 1);
        assert_eq!(count_syllables("the"), 1);
        assert_eq!(count_syllables("tree"), 1);
        assert_eq!(count_syllables("123"), 1);
    }

    #[test]
    fn short_sentence_clamps_to_hundred() {
        let r = flesch_reading_ease("The cow eats grass.").unwrap();
        assert_eq!((r.words, r.sentences, r.syllables), (4, 1, 4));
        // 206.835 - 1.015 * 4 - 84.6 * 1
        assert!((r.raw_score - 118.175).abs() < 1e-9);
        assert_eq!(r.score, 100.0);
        assert_eq!(r.bucket, ReadabilityBucket::VeryEasy);
    }

    #[test]
    fn empty_text_rejected() {
        assert!(flesch_reading_ease("  ... ").is_err());
    }

    #[test]
    fn bucket_edges() {
        assert_eq!(ReadabilityBucket::of(80.0), ReadabilityBucket::VeryEasy);
        assert_eq!(ReadabilityBucket::of(79.99), ReadabilityBucket::Standard);
        assert_eq!(ReadabilityBucket::of(60.0), ReadabilityBucket::Standard);
        assert_eq!(ReadabilityBucket::of(59.99), ReadabilityBucket::Difficult);
    }

    #[test]
    fn summary_skips_wordless_texts() {
        let s = readability_summary(["The cow eats grass.", "...", "The cow eats grass."]);
        assert_eq!(s.count, 2);
        assert_eq!(s.mean_score, 100.0);
        assert_eq!(s.buckets[&ReadabilityBucket::VeryEasy], 1.0);
        assert_eq!(readability_summary([]), ReadabilitySummary::default());
    }
}

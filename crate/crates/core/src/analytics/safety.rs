use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::text::terms;

const BUILTIN_LISTS: &str = include_str!("../../data/safety.txt");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyScreenResult {
    pub toxicity_flag: bool,
    /// Mean signed sentiment per term, in [-1, 1].
    pub polarity: f64,
    pub hurtful_flag: bool,
    /// Terms that raised a flag.
    pub matched: BTreeSet<String>,
}

/// A pluggable content screen.
pub trait Screener: Send + Sync {
    fn screen(&self, text: &str) -> Result<SafetyScreenResult, AnalyticsError>;
}

#[derive(Debug, Clone, Default)]
pub struct LexiconScreener {
    toxic: HashSet<String>,
    hurtful: HashSet<String>,
    sentiment: HashMap<String, f64>,
}

impl LexiconScreener {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LISTS).expect("built-in safety lists are well formed")
    }

    /// Parses `section: term term …` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, AnalyticsError> {
        let mut s = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (section, list) = line.split_once(':').ok_or_else(|| {
                AnalyticsError::Validation(format!("safety list line {}: missing `section:`", i + 1))
            })?;
            let items = list.split_whitespace().map(str::to_lowercase);
            match section.trim() {
                "toxic" => s.toxic.extend(items),
                "hurtful" => s.hurtful.extend(items),
                "positive" => s.sentiment.extend(items.map(|t| (t, 1.0))),
                "negative" => s.sentiment.extend(items.map(|t| (t, -1.0))),
                other => {
                    return Err(AnalyticsError::Validation(format!(
                        "safety list line {}: unknown section `{other}`",
                        i + 1
                    )))
                }
            }
        }
        Ok(s)
    }
}

impl Screener for LexiconScreener {
    /// Flags on any listed term; polarity is the mean over all terms of +1,
    /// −1 or 0.
    fn screen(&self, text: &str) -> Result<SafetyScreenResult, AnalyticsError> {
        let t = terms(text);
        if t.is_empty() {
            return Err(AnalyticsError::Validation("text is empty".into()));
        }
        let mut matched = BTreeSet::new();
        let (mut toxic, mut hurtful) = (false, false);
        for term in &t {
            if self.toxic.contains(term) {
                toxic = true;
                matched.insert(term.clone());
            }
            if self.hurtful.contains(term) {
                hurtful = true;
                matched.insert(term.clone());
            }
        }
        let polarity =
            t.iter().map(|x| self.sentiment.get(x).copied().unwrap_or(0.0)).sum::<f64>() / t.len() as f64;
        Ok(SafetyScreenResult {
            toxicity_flag: toxic,
            polarity,
            hurtful_flag: hurtful,
            matched,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SafetySummary {
    /// Texts screened (wordless ones are skipped).
    pub count: usize,
    pub toxic_share: f64,
    pub hurtful_share: f64,
    pub mean_polarity: f64,
    /// Ids of the flagged items, in input order.
    pub flagged: Vec<String>,
}

/// Screens `(id, text)` pairs and aggregates the flags.
pub fn safety_summary<'a, I>(items: I, screener: &dyn Screener) -> SafetySummary
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut out = SafetySummary::default();
    let (mut toxic, mut hurtful, mut polarity) = (0usize, 0usize, 0.0);
    for (id, text) in items {
        let Ok(r) = screener.screen(text) else {
            continue;
        };
        out.count += 1;
        toxic += usize::from(r.toxicity_flag);
        hurtful += usize::from(r.hurtful_flag);
        polarity += r.polarity;
        if r.toxicity_flag || r.hurtful_flag {
            out.flagged.push(id.to_string());
        }
    }
    if out.count > 0 {
        let n = out.count as f64;
        out.toxic_share = toxic as f64 / n;
        out.hurtful_share = hurtful as f64 / n;
        out.mean_polarity = polarity / n;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neutral_sentence() {
        let r = LexiconScreener::builtin()
            .screen("Apply manure to the coffee basin before the rains.")
            .unwrap();
        assert!(!r.toxicity_flag && !r.hurtful_flag);
        assert_eq!(r.polarity, 0.0);
    }

    #[test]
    fn flags_and_errors() {
        let s = LexiconScreener::builtin();
        let r = s.screen("This damn advice is useless").unwrap();
        assert!(r.toxicity_flag && r.hurtful_flag);
        assert!(s.screen("  ").is_err());
        assert!(LexiconScreener::parse("rude: x").is_err());
    }

    #[test]
    fn summary_shares() {
        let s = LexiconScreener::builtin();
        let sum = safety_summary(
            [("a", "This damn advice is useless"), ("b", "Apply manure to coffee."), ("c", " ")],
            &s,
        );
        assert_eq!(sum.count, 2);
        assert_eq!(sum.toxic_share, 0.5);
        assert_eq!(sum.flagged, ["a"]);
    }
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ratio, require_nonempty, AnalyticsError};
use crate::pipeline::UnansweredCategory;
use crate::store::Turn;

/// Fraction of turns marked answered.
pub fn answer_rate(turns: &[Turn]) -> Result<f64, AnalyticsError> {
    require_nonempty(turns, "turn list")?;
    Ok(ratio(turns.iter().filter(|t| t.result.answered).count(), turns.len()))
}

/// Share of each category among unanswered turns. Empty when every turn was
/// answered; otherwise the fractions sum to 1.
pub fn unanswered_breakdown(turns: &[Turn]) -> BTreeMap<UnansweredCategory, f64> {
    let mut counts: BTreeMap<UnansweredCategory, usize> = BTreeMap::new();
    for t in turns.iter().filter(|t| !t.result.answered) {
        let c = t
            .result
            .unanswered_category
            .unwrap_or(UnansweredCategory::OutOfContent);
        *counts.entry(c).or_default() += 1;
    }
    let total: usize = counts.values().sum();
    counts
        .into_iter()
        .map(|(c, n)| (c, ratio(n, total)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerReport {
    pub turns: usize,
    pub answered: usize,
    pub answer_rate: f64,
    pub unanswered: BTreeMap<UnansweredCategory, f64>,
}

impl AnswerReport {
    pub fn compute(turns: &[Turn]) -> Result<Self, AnalyticsError> {
        Ok(Self {
            turns: turns.len(),
            answered: turns.iter().filter(|t| t.result.answered).count(),
            answer_rate: answer_rate(turns)?,
            unanswered: unanswered_breakdown(turns),
        })
    }
}

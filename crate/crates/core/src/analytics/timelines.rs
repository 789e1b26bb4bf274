use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::bloom::{classify_bloom, BloomLevel};
use super::clarity::{score_clarity, ClarityLabel};
use super::engagement::{assign_tiers, TierFractions};
use super::{english_query, month_key, ratio, AnalyticsError, ScoringMode};
use crate::lexicon::Lexicon;
use crate::store::Turn;

/// Month (`YYYY-MM`) → share of each Bloom level among that month's turns.
/// Months without turns do not appear; each month's shares sum to 1.
pub fn query_type_timeline(
    turns: &[Turn],
    mode: ScoringMode<'_>,
    lexicon: &Lexicon,
) -> Result<BTreeMap<String, BTreeMap<BloomLevel, f64>>, AnalyticsError> {
    let mut counts: BTreeMap<String, BTreeMap<BloomLevel, usize>> = BTreeMap::new();
    for t in turns {
        let level = classify_bloom(english_query(t), mode, lexicon)?;
        *counts
            .entry(month_key(t.timestamp))
            .or_default()
            .entry(level)
            .or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(month, levels)| {
            let total: usize = levels.values().sum();
            let shares = levels.into_iter().map(|(l, n)| (l, ratio(n, total))).collect();
            (month, shares)
        })
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClarityDistribution {
    pub count: usize,
    pub clear: f64,
    pub somewhat_clear: f64,
    pub not_clear: f64,
    /// Mean final score (1–3).
    pub mean: f64,
}

#[derive(Default)]
struct Tally {
    finals: Vec<u8>,
}

impl Tally {
    fn finish(&self) -> ClarityDistribution {
        let n = self.finals.len();
        let share = |label: ClarityLabel| {
            ratio(
                self.finals.iter().filter(|&&f| ClarityLabel::of(f) == label).count(),
                n,
            )
        };
        ClarityDistribution {
            count: n,
            clear: share(ClarityLabel::Clear),
            somewhat_clear: share(ClarityLabel::SomewhatClear),
            not_clear: share(ClarityLabel::NotClear),
            mean: if n == 0 {
                0.0
            } else {
                self.finals.iter().map(|&f| f64::from(f)).sum::<f64>() / n as f64
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClarityTimeline {
    pub overall: ClarityDistribution,
    /// Activity tier (1 = most active) → distribution.
    pub by_tier: BTreeMap<u8, ClarityDistribution>,
    /// `YYYY-MM` → distribution.
    pub by_month: BTreeMap<String, ClarityDistribution>,
}

pub fn clarity_timeline(
    turns: &[Turn],
    tiers: TierFractions,
    mode: ScoringMode<'_>,
    lexicon: &Lexicon,
) -> Result<ClarityTimeline, AnalyticsError> {
    let tier_of = assign_tiers(turns, tiers);
    let mut overall = Tally::default();
    let mut by_tier: BTreeMap<u8, Tally> = BTreeMap::new();
    let mut by_month: BTreeMap<String, Tally> = BTreeMap::new();
    for t in turns {
        let f = score_clarity(english_query(t), mode, lexicon)?.final_score;
        overall.finals.push(f);
        by_tier.entry(tier_of[&t.user_id]).or_default().finals.push(f);
        by_month.entry(month_key(t.timestamp)).or_default().finals.push(f);
    }
    Ok(ClarityTimeline {
        overall: overall.finish(),
        by_tier: by_tier.into_iter().map(|(k, v)| (k, v.finish())).collect(),
        by_month: by_month.into_iter().map(|(k, v)| (k, v.finish())).collect(),
    })
}

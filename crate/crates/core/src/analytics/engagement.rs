use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{ratio, require_nonempty, AnalyticsError};
use crate::store::{Turn, TurnSource};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserCount {
    pub user_id: String,
    pub queries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementReport {
    /// Users by query count, most active first (ties by user id).
    pub users: Vec<UserCount>,
    pub total_queries: usize,
    /// `cumulative_share[i]` is the share of all queries made by the first
    /// `i + 1` users.
    pub cumulative_share: Vec<f64>,
    /// Smallest number of top users jointly making at least 80% of queries.
    pub power_user_count: usize,
    pub power_user_fraction: f64,
    /// Share of turns that came from clicking a suggested follow-up.
    pub followup_share: f64,
}

/// Per-user query counts, most active first, ties broken by user id.
pub fn user_counts(turns: &[Turn]) -> Vec<UserCount> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in turns {
        *counts.entry(t.user_id.as_str()).or_default() += 1;
    }
    let mut users: Vec<UserCount> = counts
        .into_iter()
        .map(|(u, n)| UserCount {
            user_id: u.to_string(),
            queries: n,
        })
        .collect();
    users.sort_by(|a, b| b.queries.cmp(&a.queries).then_with(|| a.user_id.cmp(&b.user_id)));
    users
}

pub fn power_user_curve(turns: &[Turn]) -> Result<EngagementReport, AnalyticsError> {
    require_nonempty(turns, "turn list")?;
    let users = user_counts(turns);
    let total = turns.len();
    let mut cum = 0usize;
    let mut cumulative_share = Vec::with_capacity(users.len());
    let mut power_user_count = None;
    for (i, u) in users.iter().enumerate() {
        cum += u.queries;
        cumulative_share.push(ratio(cum, total));
        // cum / total >= 0.8, in integers
        if power_user_count.is_none() && cum * 5 >= total * 4 {
            power_user_count = Some(i + 1);
        }
    }
    let power_user_count = power_user_count.unwrap_or(users.len());
    let followups = turns
        .iter()
        .filter(|t| t.source == TurnSource::FollowupClick)
        .count();
    Ok(EngagementReport {
        power_user_fraction: ratio(power_user_count, users.len()),
        power_user_count,
        users,
        total_queries: total,
        cumulative_share,
        followup_share: ratio(followups, total),
    })
}

/// Upper bounds of the first three activity tiers as fractions of users;
/// everyone past the last bound is in tier 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierFractions(pub [f64; 3]);

impl Default for TierFractions {
    fn default() -> Self {
        TierFractions([0.05, 0.10, 0.20])
    }
}

impl TierFractions {
    /// Cumulative user counts closing tiers 1–3: `ceil(f · users)`.
    pub fn cutoffs(&self, users: usize) -> [usize; 3] {
        self.0.map(|f| (f * users as f64).ceil() as usize)
    }
}

/// Tier (1–4) of each user by activity rank.
pub fn assign_tiers(turns: &[Turn], fractions: TierFractions) -> BTreeMap<String, u8> {
    let users = user_counts(turns);
    let cutoffs = fractions.cutoffs(users.len());
    users
        .into_iter()
        .enumerate()
        .map(|(rank, u)| {
            let tier = cutoffs.iter().position(|&c| rank < c).map_or(4, |p| p as u8 + 1);
            (u.user_id, tier)
        })
        .collect()
}

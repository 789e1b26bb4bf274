use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{require_nonempty, AnalyticsError};
use crate::pipeline::LatencyBreakdown;
use crate::store::Turn;

/// Default histogram bucket width in seconds.
pub const DEFAULT_BUCKET_WIDTH_S: f64 = 2.5;
/// Default number of bounded buckets before the open-ended overflow bucket.
pub const DEFAULT_BUCKET_COUNT: usize = 12;

/// `0, 2.5, 5, …` edges for [`DEFAULT_BUCKET_COUNT`] buckets.
pub fn default_edges() -> Vec<f64> {
    (0..=DEFAULT_BUCKET_COUNT)
        .map(|i| i as f64 * DEFAULT_BUCKET_WIDTH_S)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBucket {
    pub lower_s: f64,
    /// `None` for the overflow bucket.
    pub upper_s: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub count: usize,
    pub mean_s: f64,
    pub p50_s: f64,
    pub p90_s: f64,
    pub p99_s: f64,
    pub histogram: Vec<HistogramBucket>,
    pub stage_means_s: BTreeMap<String, f64>,
}

/// Nearest-rank percentile of ascending `sorted`: the value at rank
/// `ceil(p/100 · n)`, at least rank 1.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Buckets are `[e_i, e_{i+1})` plus `[e_last, ∞)`; values below the first
/// edge land in the first bucket.
pub fn histogram(values: &[f64], edges: &[f64]) -> Result<Vec<HistogramBucket>, AnalyticsError> {
    if edges.is_empty() || edges.windows(2).any(|w| !(w[0] < w[1])) || edges.iter().any(|e| !e.is_finite()) {
        return Err(AnalyticsError::Validation(
            "histogram edges must be finite and strictly increasing".into(),
        ));
    }
    let mut buckets: Vec<HistogramBucket> = edges
        .iter()
        .enumerate()
        .map(|(i, &lower)| HistogramBucket {
            lower_s: lower,
            upper_s: edges.get(i + 1).copied(),
            count: 0,
        })
        .collect();
    for &v in values {
        let idx = edges.iter().rposition(|&e| v >= e).unwrap_or(0);
        buckets[idx].count += 1;
    }
    Ok(buckets)
}

/// Percentiles and histogram of total latency plus the mean of each stage.
pub fn latency_stats(turns: &[Turn], edges: &[f64]) -> Result<LatencyReport, AnalyticsError> {
    require_nonempty(turns, "turn list")?;
    let mut totals: Vec<f64> = turns.iter().map(|t| t.result.latency.total).collect();
    totals.sort_by(f64::total_cmp);
    let n = totals.len() as f64;
    let stage_means_s = LatencyBreakdown::STAGES
        .iter()
        .map(|&s| {
            let sum: f64 = turns
                .iter()
                .map(|t| t.result.latency.stage(s).unwrap_or(0.0))
                .sum();
            (s.to_string(), sum / n)
        })
        .collect();
    Ok(LatencyReport {
        count: totals.len(),
        mean_s: totals.iter().sum::<f64>() / n,
        p50_s: nearest_rank(&totals, 50.0),
        p90_s: nearest_rank(&totals, 90.0),
        p99_s: nearest_rank(&totals, 99.0),
        histogram: histogram(&totals, edges)?,
        stage_means_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_examples() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 50.0), 5.0);
        assert_eq!(nearest_rank(&v, 90.0), 9.0);
        assert_eq!(nearest_rank(&v, 99.0), 10.0);
        assert_eq!(nearest_rank(&[4.2], 50.0), 4.2);
    }

    #[test]
    fn histogram_edges() {
        let h = histogram(&[0.0, 2.49, 2.5, 9.05, 40.0], &default_edges()).unwrap();
        assert_eq!(h.len(), DEFAULT_BUCKET_COUNT + 1);
        assert_eq!(h[0].count, 2);
        assert_eq!(h[1].count, 1);
        assert_eq!(h[3].count, 1);
        assert_eq!(h.last().unwrap().count, 1);
        assert_eq!(h.last().unwrap().upper_s, None);
        assert!(histogram(&[1.0], &[1.0, 1.0]).is_err());
    }
}

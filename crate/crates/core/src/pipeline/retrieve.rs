use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rank::RankedPassage;
use super::PipelineError;
use crate::index::{hit_order, SearchHit};
use crate::kb::CollectionSnapshot;
use crate::provider::ProviderGateway;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RetrievalBundle {
    pub subqueries: Vec<String>,
    /// Hits per subquery, in subquery order.
    pub hits: Vec<Vec<SearchHit>>,
    /// Union of all hits, one per chunk at its best score.
    pub merged: Vec<SearchHit>,
    pub ranked_passages: Vec<RankedPassage>,
}

/// One hit per chunk, keeping the highest score, in hit order.
pub fn merge_hits(per_subquery: &[Vec<SearchHit>]) -> Vec<SearchHit> {
    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for hit in per_subquery.iter().flatten() {
        best.entry(hit.chunk_id.as_str())
            .and_modify(|s| *s = s.max(hit.score))
            .or_insert(hit.score);
    }
    let mut merged: Vec<SearchHit> = best
        .into_iter()
        .map(|(chunk_id, score)| SearchHit {
            chunk_id: chunk_id.to_string(),
            score,
        })
        .collect();
    merged.sort_by(hit_order);
    merged
}

/// Embeds each subquery and searches the snapshot's index. Subqueries without
/// any embeddable term contribute no hits.
pub fn retrieve(
    gateway: &ProviderGateway,
    snapshot: &CollectionSnapshot,
    subqueries: &[String],
    k: usize,
) -> Result<RetrievalBundle, PipelineError> {
    let dimension = snapshot.index.dimension();
    let mut hits = Vec::with_capacity(subqueries.len());
    for q in subqueries {
        let v = gateway.embed(q, dimension)?;
        if v.is_zero() {
            hits.push(Vec::new());
            continue;
        }
        hits.push(snapshot.search(&v, k)?);
    }
    let merged = merge_hits(&hits);
    Ok(RetrievalBundle {
        subqueries: subqueries.to_vec(),
        hits,
        merged,
        ranked_passages: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hit(id: &str, score: f64) -> SearchHit {
        SearchHit { chunk_id: id.into(), score }
    }

    #[test]
    fn shared_chunk_appears_once_with_max_score() {
        let merged = merge_hits(&[
            vec![hit("a", 0.2), hit("b", 0.9)],
            vec![hit("a", 0.7), hit("c", 0.1)],
        ]);
        assert_eq!(merged, vec![hit("b", 0.9), hit("a", 0.7), hit("c", 0.1)]);
    }

    #[test]
    fn single_subquery_is_passthrough() {
        let hits = vec![hit("x", 0.5), hit("y", 0.5), hit("z", 0.1)];
        assert_eq!(merge_hits(&[hits.clone()]), hits);
    }
}

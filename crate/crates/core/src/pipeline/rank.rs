use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::lexicon::Lexicon;
use crate::text::content_terms;

/// Content terms a passage must share with the query to count as relevant.
pub const RELEVANCE_MIN_SHARED: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relevance {
    Relevant,
    Irrelevant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPassage {
    pub chunk_id: String,
    pub text: String,
    pub relevance: Relevance,
    /// 1-based position among relevant passages.
    pub rank: usize,
    /// Cosine score from retrieval.
    pub score: f64,
    /// Distinct non-stopword terms shared with the query.
    pub shared_terms: usize,
}

/// Number of distinct non-stopword terms `query` and `passage` share.
pub fn shared_content_terms(query: &str, passage: &str, lexicon: &Lexicon) -> usize {
    let stop = |t: &str| lexicon.is_stopword(t);
    let q = content_terms(query, stop);
    let p = content_terms(passage, stop);
    q.intersection(&p).count()
}

/// Shared-term count descending, then score descending, then chunk id.
pub fn passage_order(a: &RankedPassage, b: &RankedPassage) -> Ordering {
    b.shared_terms
        .cmp(&a.shared_terms)
        .then_with(|| b.score.total_cmp(&a.score))
        .then_with(|| a.chunk_id.cmp(&b.chunk_id))
}

/// A retrieved passage awaiting a relevance verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub chunk_id: String,
    pub text: String,
    pub score: f64,
}

/// Drops passages judged irrelevant and orders the rest; ranks start at 1.
pub fn rank_passages(
    query: &str,
    candidates: &[Candidate],
    verdicts: &[Relevance],
    lexicon: &Lexicon,
) -> Vec<RankedPassage> {
    let mut kept: Vec<RankedPassage> = candidates
        .iter()
        .zip(verdicts)
        .filter(|(_, v)| **v == Relevance::Relevant)
        .map(|(c, v)| RankedPassage {
            chunk_id: c.chunk_id.clone(),
            text: c.text.clone(),
            relevance: *v,
            rank: 0,
            score: c.score,
            shared_terms: shared_content_terms(query, &c.text, lexicon),
        })
        .collect();
    kept.sort_by(passage_order);
    for (i, p) in kept.iter_mut().enumerate() {
        p.rank = i + 1;
    }
    kept
}

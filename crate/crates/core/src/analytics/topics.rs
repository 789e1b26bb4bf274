use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{english_query, month_key};
use crate::lexicon::Lexicon;
use crate::store::Turn;

/// Topic counted for queries that match no lexicon topic.
pub const OTHER_TOPIC: &str = "other";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicHistogram {
    pub totals: BTreeMap<String, usize>,
    /// `YYYY-MM` (UTC) → topic → count.
    pub by_month: BTreeMap<String, BTreeMap<String, usize>>,
}

/// Lexicon topics mentioned by `text`, or just [`OTHER_TOPIC`].
pub fn query_topics(text: &str, lexicon: &Lexicon) -> BTreeSet<String> {
    let topics = lexicon.topics_in(text);
    if topics.is_empty() {
        BTreeSet::from([OTHER_TOPIC.to_string()])
    } else {
        topics
    }
}

/// Every topic a query mentions is counted once for that query.
pub fn topic_histogram(turns: &[Turn], lexicon: &Lexicon) -> TopicHistogram {
    let mut h = TopicHistogram::default();
    for t in turns {
        let month = h.by_month.entry(month_key(t.timestamp)).or_default();
        for topic in query_topics(english_query(t), lexicon) {
            *month.entry(topic.clone()).or_default() += 1;
            *h.totals.entry(topic).or_default() += 1;
        }
    }
    h
}

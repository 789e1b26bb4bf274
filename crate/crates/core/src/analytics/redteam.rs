use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::kb::KnowledgeCollection;
use crate::pipeline::{Pipeline, UserQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RedTeamCategory {
    GenderHarmfulBlind,
    GenderTransformative,
    GenderResponsive,
}

impl RedTeamCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            RedTeamCategory::GenderHarmfulBlind => "gender_harmful_blind",
            RedTeamCategory::GenderTransformative => "gender_transformative",
            RedTeamCategory::GenderResponsive => "gender_responsive",
        }
    }
}

impl fmt::Display for RedTeamCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RedTeamCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            RedTeamCategory::GenderHarmfulBlind,
            RedTeamCategory::GenderTransformative,
            RedTeamCategory::GenderResponsive,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| format!("unknown red-team category `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedTeamQuestion {
    pub category: RedTeamCategory,
    pub theme: String,
    pub question: String,
}

/// Parses a question set: a JSON array of `{category, theme, question}`.
pub fn parse_question_set(json: &str) -> Result<Vec<RedTeamQuestion>, AnalyticsError> {
    let questions: Vec<RedTeamQuestion> = serde_json::from_str(json)
        .map_err(|e| AnalyticsError::Validation(format!("question set: {e}")))?;
    if let Some(q) = questions.iter().find(|q| q.question.trim().is_empty()) {
        return Err(AnalyticsError::Validation(format!(
            "empty question in theme `{}`",
            q.theme
        )));
    }
    Ok(questions)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedTeamResult {
    pub question: RedTeamQuestion,
    pub answered: bool,
    pub response_text: String,
    /// 0 (inappropriate or no response) or 1 (satisfactory); `None` while
    /// awaiting a reviewer.
    pub rating: Option<u8>,
    /// Set for ratings assigned automatically rather than by a reviewer.
    pub pending_review: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CategoryScore {
    pub score: u32,
    pub rated: u32,
    pub questions: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedTeamCampaign {
    pub campaign_id: String,
    pub results: Vec<RedTeamResult>,
}

impl RedTeamCampaign {
    /// Sum of ratings given so far.
    pub fn score(&self) -> u32 {
        self.results
            .iter()
            .filter_map(|r| r.rating)
            .map(u32::from)
            .sum()
    }

    pub fn by_category(&self) -> BTreeMap<RedTeamCategory, CategoryScore> {
        let mut out: BTreeMap<RedTeamCategory, CategoryScore> = BTreeMap::new();
        for r in &self.results {
            let e = out.entry(r.question.category).or_default();
            e.questions += 1;
            if let Some(x) = r.rating {
                e.rated += 1;
                e.score += u32::from(x);
            }
        }
        out
    }

    /// Applies reviewer ratings, one per question in order.
    pub fn apply_ratings(&mut self, ratings: &[u8]) -> Result<(), AnalyticsError> {
        if ratings.len() != self.results.len() {
            return Err(AnalyticsError::Validation(format!(
                "{} ratings for {} questions",
                ratings.len(),
                self.results.len()
            )));
        }
        if let Some(bad) = ratings.iter().find(|&&r| r > 1) {
            return Err(AnalyticsError::Validation(format!("rating {bad} is not 0 or 1")));
        }
        for (r, &rating) in self.results.iter_mut().zip(ratings) {
            r.rating = Some(rating);
            r.pending_review = false;
        }
        Ok(())
    }
}

/// Answers every question with a fresh session. Unanswered questions are
/// rated 0 pending review; answered ones wait for a reviewer.
pub fn run_redteam_campaign(
    campaign_id: &str,
    questions: &[RedTeamQuestion],
    pipeline: &Pipeline,
    collection: &KnowledgeCollection,
) -> Result<RedTeamCampaign, AnalyticsError> {
    if questions.is_empty() {
        return Err(AnalyticsError::Validation("question set is empty".into()));
    }
    let mut results = Vec::with_capacity(questions.len());
    for (i, q) in questions.iter().enumerate() {
        let session = format!("redteam-{campaign_id}-{i}");
        let query = UserQuery::detect(&session, &q.question, pipeline.lexicon())?;
        let r = pipeline.answer(&query, collection, &[])?;
        results.push(RedTeamResult {
            question: q.clone(),
            answered: r.answered,
            response_text: r.response_text,
            rating: (!r.answered).then_some(0),
            pending_review: !r.answered,
        });
    }
    Ok(RedTeamCampaign {
        campaign_id: campaign_id.to_string(),
        results,
    })
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::lexicon::Lexicon;
use crate::provider::prompt::{self, Prompt};
use crate::provider::{CompletionRequest, ProviderGateway, TaskKind};
use crate::text::{content_terms, normalize_whitespace, split_sentences};

/// Scores strictly above this are `high`.
pub const HIGH_ABOVE: f64 = 0.7;
/// Scores strictly below this are `low`.
pub const LOW_BELOW: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityBand {
    Low,
    Medium,
    High,
}

impl QualityBand {
    /// `high` iff score > 0.7, `low` iff score < 0.3, otherwise `medium`
    /// (both boundaries included).
    pub fn of(score: f64) -> Self {
        if score > HIGH_ABOVE {
            QualityBand::High
        } else if score < LOW_BELOW {
            QualityBand::Low
        } else {
            QualityBand::Medium
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictCriterion {
    /// The passages back the statement up.
    Support,
    /// The statement addresses the query.
    Relevance,
}

impl VerdictCriterion {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictCriterion::Support => "support",
            VerdictCriterion::Relevance => "relevance",
        }
    }
}

impl fmt::Display for VerdictCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VerdictCriterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "support" => Ok(VerdictCriterion::Support),
            "relevance" => Ok(VerdictCriterion::Relevance),
            other => Err(format!("unknown verdict criterion `{other}`")),
        }
    }
}

fn normalized(text: &str) -> String {
    normalize_whitespace(&text.to_lowercase())
}

/// Deterministic verdicts.
///
/// - support: the whitespace-normalized, lowercased statement occurs in a
///   passage, or every content term of the statement occurs in one passage;
/// - relevance: the statement shares at least one content term with the
///   query.
pub fn local_verdict(
    criterion: VerdictCriterion,
    statement: &str,
    query: &str,
    passages: &[String],
    lexicon: &Lexicon,
) -> bool {
    let stop = |t: &str| lexicon.is_stopword(t);
    let st_terms = content_terms(statement, stop);
    match criterion {
        VerdictCriterion::Support => {
            let needle = normalized(statement);
            passages.iter().any(|p| {
                (!needle.is_empty() && normalized(p).contains(&needle))
                    || (!st_terms.is_empty() && st_terms.is_subset(&content_terms(p, stop)))
            })
        }
        VerdictCriterion::Relevance => {
            let q = content_terms(query, stop);
            st_terms.intersection(&q).next().is_some()
        }
    }
}

/// Where statement verdicts come from.
#[derive(Debug, Clone, Copy)]
pub enum VerdictSource<'a> {
    /// Ask a provider (`statement_extract` then `statement_verdict`).
    Provider(&'a ProviderGateway),
    /// Externally supplied 0/1 labels, one per statement; statements are
    /// the text's sentences.
    Labels(&'a [u8]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementVerdict {
    pub text: String,
    pub verdict: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextPrecisionResult {
    pub statements: Vec<StatementVerdict>,
    pub precision: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseQualityResult {
    pub statements: Vec<String>,
    pub support: Vec<u8>,
    pub relevance: Vec<u8>,
    pub faithfulness: f64,
    pub relevance_score: f64,
    pub faith_band: QualityBand,
    pub rel_band: QualityBand,
}

fn extract_statements(text: &str, source: VerdictSource<'_>) -> Result<Vec<String>, AnalyticsError> {
    match source {
        VerdictSource::Labels(_) => Ok(split_sentences(text).into_iter().map(String::from).collect()),
        VerdictSource::Provider(gw) => {
            let request = CompletionRequest::new(
                TaskKind::StatementExtract,
                Prompt::new(prompt::STATEMENT_EXTRACT_INSTRUCTION)
                    .field(prompt::TEXT, text)
                    .render(),
            );
            Ok(gw
                .complete(&request)?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect())
        }
    }
}

fn parse_verdict(reply: &str) -> Result<u8, AnalyticsError> {
    match reply.trim().to_lowercase().as_str() {
        "1" | "yes" | "true" => Ok(1),
        "0" | "no" | "false" => Ok(0),
        _ => Err(AnalyticsError::Scoring {
            message: "verdict must be 0 or 1".into(),
            raw: reply.to_string(),
        }),
    }
}

fn verdicts(
    statements: &[String],
    criterion: VerdictCriterion,
    query: &str,
    passages: &[String],
    source: VerdictSource<'_>,
) -> Result<Vec<u8>, AnalyticsError> {
    match source {
        VerdictSource::Labels(labels) => {
            if labels.len() != statements.len() {
                return Err(AnalyticsError::Validation(format!(
                    "{} labels for {} statements",
                    labels.len(),
                    statements.len()
                )));
            }
            if let Some(bad) = labels.iter().find(|&&l| l > 1) {
                return Err(AnalyticsError::Validation(format!("label {bad} is not 0 or 1")));
            }
            Ok(labels.to_vec())
        }
        VerdictSource::Provider(gw) => statements
            .iter()
            .map(|s| {
                let request = CompletionRequest::new(
                    TaskKind::StatementVerdict,
                    Prompt::new(prompt::STATEMENT_VERDICT_INSTRUCTION)
                        .field(prompt::CRITERION, criterion.as_str())
                        .field(prompt::STATEMENT, s.as_str())
                        .field(prompt::QUERY, query)
                        .render(),
                )
                .with_context(passages.to_vec());
                parse_verdict(&gw.complete(&request)?)
            })
            .collect(),
    }
}

fn mean(v: &[u8]) -> f64 {
    v.iter().map(|&x| f64::from(x)).sum::<f64>() / v.len() as f64
}

/// Share of context statements relevant to the query.
pub fn context_precision(
    query: &str,
    passages: &[String],
    source: VerdictSource<'_>,
) -> Result<ContextPrecisionResult, AnalyticsError> {
    if passages.is_empty() {
        return Err(AnalyticsError::Validation("no passages given".into()));
    }
    let mut statements = Vec::new();
    for p in passages {
        statements.extend(extract_statements(p, source)?);
    }
    if statements.is_empty() {
        return Err(AnalyticsError::Validation("passages contain no statements".into()));
    }
    let v = verdicts(&statements, VerdictCriterion::Relevance, query, passages, source)?;
    Ok(ContextPrecisionResult {
        precision: mean(&v),
        statements: statements
            .into_iter()
            .zip(v)
            .map(|(text, verdict)| StatementVerdict { text, verdict })
            .collect(),
    })
}

/// Faithfulness (share of response statements the passages support) and
/// relevance (share addressing the query), each with its band.
pub fn response_quality(
    query: &str,
    response: &str,
    passages: &[String],
    support_source: VerdictSource<'_>,
    relevance_source: VerdictSource<'_>,
) -> Result<ResponseQualityResult, AnalyticsError> {
    if response.trim().is_empty() {
        return Err(AnalyticsError::Validation("response is empty".into()));
    }
    let statements = extract_statements(response, support_source)?;
    if statements.is_empty() {
        return Err(AnalyticsError::Validation("response contains no statements".into()));
    }
    let support = verdicts(&statements, VerdictCriterion::Support, query, passages, support_source)?;
    let relevance = verdicts(&statements, VerdictCriterion::Relevance, query, passages, relevance_source)?;
    let faithfulness = mean(&support);
    let relevance_score = mean(&relevance);
    Ok(ResponseQualityResult {
        statements,
        support,
        relevance,
        faithfulness,
        relevance_score,
        faith_band: QualityBand::of(faithfulness),
        rel_band: QualityBand::of(relevance_score),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn gw() -> ProviderGateway {
        ProviderGateway::local(Arc::new(Lexicon::builtin()))
    }

    #[test]
    fn bands() {
        assert_eq!(QualityBand::of(0.7), QualityBand::Medium);
        assert_eq!(QualityBand::of(0.7 + 1e-9), QualityBand::High);
        assert_eq!(QualityBand::of(0.3), QualityBand::Medium);
        assert_eq!(QualityBand::of(0.3 - 1e-9), QualityBand::Low);
    }

    #[test]
    fn injected_ratio() {
        let passages = vec!["A one. A two. A three. A four.".to_string()];
        let r = context_precision("q", &passages, VerdictSource::Labels(&[1, 1, 0, 1])).unwrap();
        assert_eq!(r.precision, 0.75);
        let r = response_quality(
            "q",
            "S one. S two. S three. S four.",
            &passages,
            VerdictSource::Labels(&[1, 0, 1, 0]),
            VerdictSource::Labels(&[1, 1, 1, 1]),
        )
        .unwrap();
        assert_eq!(r.faithfulness, 0.5);
        assert_eq!(r.faith_band, QualityBand::Medium);
        assert_eq!(r.rel_band, QualityBand::High);
    }

    #[test]
    fn label_errors() {
        let passages = vec!["One. Two.".to_string()];
        assert!(context_precision("q", &passages, VerdictSource::Labels(&[1])).is_err());
        assert!(context_precision("q", &passages, VerdictSource::Labels(&[1, 2])).is_err());
        assert!(context_precision("q", &[], VerdictSource::Labels(&[])).is_err());
        assert!(response_quality("q", " ", &passages, VerdictSource::Labels(&[]), VerdictSource::Labels(&[])).is_err());
    }

    #[test]
    fn unrelated_disease_is_unfaithful() {
        let g = gw();
        let passages = vec!["Coffee berry disease attacks green berries and causes them to drop.".to_string()];
        let r = response_quality(
            "how do I control leaf rust in coffee",
            "Leaf rust shows as orange powder under leaves. Spray copper fungicide against leaf rust.",
            &passages,
            VerdictSource::Provider(&g),
            VerdictSource::Provider(&g),
        )
        .unwrap();
        assert_eq!(r.faithfulness, 0.0);
        assert_eq!(r.faith_band, QualityBand::Low);
    }

    #[test]
    fn verbatim_statements_are_supported() {
        let g = gw();
        let passages = vec!["Prune coffee after the main harvest. Remove suckers monthly.".to_string()];
        let r = response_quality(
            "when to prune coffee",
            "Prune coffee after the main harvest.",
            &passages,
            VerdictSource::Provider(&g),
            VerdictSource::Provider(&g),
        )
        .unwrap();
        assert_eq!(r.faithfulness, 1.0);
        assert_eq!(r.relevance_score, 1.0);
    }
}

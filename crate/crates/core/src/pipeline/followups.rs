use std::collections::BTreeSet;

use crate::lexicon::Lexicon;

/// Most follow-up suggestions offered after one reply.
pub const MAX_FOLLOWUPS: usize = 3;

/// One templated question per topic that has a template, with `{crop}`
/// filled in (`your crop` when none is known), deduplicated and capped at
/// [`MAX_FOLLOWUPS`].
pub fn template_followups(
    topics: &BTreeSet<String>,
    crop: Option<&str>,
    lexicon: &Lexicon,
) -> Vec<String> {
    let crop = crop.filter(|c| !c.trim().is_empty()).unwrap_or("your crop");
    let mut out: Vec<String> = Vec::new();
    for topic in topics {
        let Some(template) = lexicon.followup_template(topic) else {
            continue;
        };
        let question = template.replace("{crop}", crop);
        if !out.contains(&question) {
            out.push(question);
        }
        if out.len() == MAX_FOLLOWUPS {
            break;
        }
    }
    out
}

/// Parses a follow-up reply: one question per line, deduplicated, capped.
pub fn parse_followups(reply: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for line in reply.lines() {
        let q = line.trim().trim_start_matches(['-', '*', '•']).trim();
        if !q.is_empty() && !out.iter().any(|o| o == q) {
            out.push(q.to_string());
        }
        if out.len() == MAX_FOLLOWUPS {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pest_topic_yields_prevention_question() {
        let lx = Lexicon::builtin();
        let out = template_followups(&BTreeSet::from(["pests_diseases".into()]), Some("coffee"), &lx);
        assert_eq!(out, vec!["How do I prevent pests and diseases in coffee?"]);
    }

    #[test]
    fn no_topics_no_followups() {
        assert!(template_followups(&BTreeSet::new(), Some("coffee"), &Lexicon::builtin()).is_empty());
    }

    #[test]
    fn capped_at_three() {
        let lx = Lexicon::builtin();
        let all: BTreeSet<String> = lx.topics().iter().map(|t| t.name.clone()).collect();
        assert_eq!(template_followups(&all, None, &lx).len(), MAX_FOLLOWUPS);
    }

    #[test]
    fn reply_parsing_dedups_and_caps() {
        assert_eq!(parse_followups("- a?\n- a?\nb?\nc?\nd?"), vec!["a?", "b?", "c?"]);
    }
}

//! Prompt wire format shared by remote and local providers.
//!
//! A prompt is an instruction paragraph followed by named fields:
//!
//! ```text
//! Answer the query using only ...
//!
//! ### query
//! how do I prune coffee
//! ### crop
//! coffee
//! ```
//!
//! Remote models read it as plain text; the local provider parses the fields
//! back out. Field values never contain a line starting with `### `; such
//! lines are indented by one space when rendered.

use std::collections::BTreeMap;

const FIELD_MARK: &str = "### ";

pub const QUERY: &str = "query";
pub const TEXT: &str = "text";
pub const CROP: &str = "crop";
pub const TOPICS: &str = "topics";
pub const STATEMENT: &str = "statement";
pub const CRITERION: &str = "criterion";
pub const LIMIT: &str = "limit";

pub const INTENT_INSTRUCTION: &str = "Classify the farmer's message into exactly one label: \
farming_question, greeting, menu_navigation, tool_request, other. Reply with the label only.";

pub const REPHRASE_INSTRUCTION: &str = "Rewrite the query as a standalone question, replacing \
pronouns with the crop under discussion. The context passages are earlier messages, most recent \
last. Reply with the rewritten query only.";

pub const DECOMPOSE_INSTRUCTION: &str = "Split the query into independent sub-questions, one per \
line, keeping the crop name in every line. If it is a single question, reply with it unchanged.";

pub const PASSAGE_RELEVANCE_INSTRUCTION: &str = "For each context passage, in order, reply on its \
own line with `relevant` or `irrelevant` depending on whether it helps answer the query.";

pub const GENERATE_INSTRUCTION: &str = "Answer the query using only sentences copied verbatim \
from the context passages. Write each sentence on its own line, prefixed with the 1-based passage \
number in brackets, for example `[2] Prune after harvest.`";

pub const SUMMARIZE_INSTRUCTION: &str = "Summarize the key insight of the text in a single \
sentence no longer than the given word limit.";

pub const TAG_INSTRUCTION: &str = "List the topics from the allowed topic list that the text \
covers, comma separated. Reply with nothing if none apply.";

pub const STATEMENT_EXTRACT_INSTRUCTION: &str = "Break the text into short standalone factual \
statements, one per line.";

pub const STATEMENT_VERDICT_INSTRUCTION: &str = "Judge the statement. With criterion `support`, \
reply 1 if the context passages support it and 0 otherwise. With criterion `relevance`, reply 1 \
if it addresses the query and 0 otherwise.";

pub const CLARITY_INSTRUCTION: &str = "Given a user input about agriculture, score the prompt on a \
scale of 1 to 3 for each of the following criteria: (a) whether the intent is clear, (b) whether \
the prompt addresses a specific topic, and (c) whether the query references a specific entity and \
its attribute. Provide a reason for each score and calculate the final score as the rounded \
average of the three.";

pub const CLARITY_FORMAT: &str = "Reply in exactly this format:\n\
intent: <1-3> | <reason>\n\
topic: <1-3> | <reason>\n\
entity: <1-3> | <reason>\n\
final: <1-3>";

pub const BLOOM_INSTRUCTION: &str = "Classify the cognitive process the query demands under the \
revised Bloom taxonomy. Reply with one word: remember, understand, apply, analyze, evaluate, \
create, or none when the input is not a question.";

pub const FOLLOWUPS_INSTRUCTION: &str = "Suggest at most three short follow-up questions the \
farmer could ask next about the listed topics and crop, one per line.";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Prompt {
    instruction: String,
    fields: Vec<(String, String)>,
}

impl Prompt {
    pub fn new(instruction: impl Into<String>) -> Self {
        Self {
            instruction: instruction.into(),
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, name: &str, value: impl Into<String>) -> Self {
        self.fields.push((name.to_string(), value.into()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if !self.instruction.is_empty() {
            out.push_str(&self.instruction);
            out.push_str("\n\n");
        }
        for (name, value) in &self.fields {
            out.push_str(FIELD_MARK);
            out.push_str(name);
            out.push('\n');
            for line in value.lines() {
                if line.starts_with(FIELD_MARK) {
                    out.push(' ');
                }
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }
}

/// Fields recovered from a rendered prompt.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedPrompt {
    fields: BTreeMap<String, String>,
}

impl ParsedPrompt {
    pub fn parse(text: &str) -> Self {
        let mut fields = BTreeMap::new();
        let mut current: Option<(String, Vec<&str>)> = None;
        for line in text.lines() {
            if let Some(name) = line.strip_prefix(FIELD_MARK) {
                if let Some((n, body)) = current.take() {
                    fields.insert(n, body.join("\n"));
                }
                current = Some((name.trim().to_string(), Vec::new()));
            } else if let Some((_, body)) = current.as_mut() {
                body.push(line);
            }
        }
        if let Some((n, body)) = current {
            fields.insert(n, body.join("\n"));
        }
        Self { fields }
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.fields.get(name).map(|v| v.trim())
    }

    /// Field value, or the whole prompt text when the field is absent, so that
    /// hand-written prompts without fields still work against the local
    /// provider.
    pub fn get_or<'a>(&'a self, name: &str, raw: &'a str) -> &'a str {
        self.get(name).unwrap_or(raw.trim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_then_parse_recovers_fields() {
        let p = Prompt::new(GENERATE_INSTRUCTION)
            .field(QUERY, "coffee pruning time")
            .field(CROP, "coffee")
            .field(TEXT, "line one\n### not a field\nline three");
        let parsed = ParsedPrompt::parse(&p.render());
        assert_eq!(parsed.get(QUERY), Some("coffee pruning time"));
        assert_eq!(parsed.get(CROP), Some("coffee"));
        assert_eq!(
            parsed.get(TEXT),
            Some("line one\n ### not a field\nline three")
        );
    }

    #[test]
    fn missing_field_falls_back_to_raw() {
        let parsed = ParsedPrompt::parse("hello there");
        assert_eq!(parsed.get_or(QUERY, "hello there"), "hello there");
    }
}

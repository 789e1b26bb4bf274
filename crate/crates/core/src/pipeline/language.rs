use super::PipelineError;
use crate::lexicon::Lexicon;
use crate::provider::LanguageTag;
use crate::text::terms;

/// Word-list language detection: the configured language with the most term
/// hits wins; ties and texts without any hit default to English.
pub fn detect_language(text: &str, lexicon: &Lexicon) -> Result<LanguageTag, PipelineError> {
    if text.trim().is_empty() {
        return Err(PipelineError::Validation("query text is empty".into()));
    }
    let found = terms(text);
    let mut best: Option<(&str, usize)> = None;
    let mut tied = false;
    for (tag, words) in lexicon.languages() {
        let hits = found.iter().filter(|t| words.contains(t.as_str())).count();
        match best {
            Some((_, b)) if hits < b => {}
            Some((_, b)) if hits == b => tied = true,
            _ => {
                best = Some((tag, hits));
                tied = false;
            }
        }
    }
    match best {
        Some((tag, hits)) if hits > 0 && !tied => {
            LanguageTag::parse(tag).map_err(|e| PipelineError::Validation(e.to_string()))
        }
        _ => Ok(LanguageTag::english()),
    }
}

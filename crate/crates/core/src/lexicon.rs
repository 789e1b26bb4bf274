//! Word lists that drive every rule-based behaviour.
//!
//! The defaults are compiled in from `data/`; a deployment can point at a
//! directory holding any subset of the same files to override them.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::text::{contains_phrase, terms};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("failed to read lexicon file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Syntax {
        file: String,
        line: usize,
        message: String,
    },
}

const STOPWORDS: &str = include_str!("../data/stopwords.txt");
const CROPS: &str = include_str!("../data/crops.txt");
const AGRONOMY: &str = include_str!("../data/agronomy.txt");
const TOPICS: &str = include_str!("../data/topics.txt");
const GREETINGS: &str = include_str!("../data/greetings.txt");
const MENU: &str = include_str!("../data/menu.txt");
const TOOLS: &str = include_str!("../data/tools.txt");
const LANGUAGES: &str = include_str!("../data/languages.txt");
const ATTRIBUTES: &str = include_str!("../data/attributes.txt");
const OPENERS: &str = include_str!("../data/openers.txt");
const BLOOM: &str = include_str!("../data/bloom.txt");
const FOLLOWUPS: &str = include_str!("../data/followups.txt");

/// A named topic and the terms that signal it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub name: String,
    pub keywords: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    stopwords: HashSet<String>,
    crop_forms: HashMap<String, String>,
    agronomy: HashSet<String>,
    topics: Vec<Topic>,
    greetings: HashSet<String>,
    menu_phrases: Vec<Vec<String>>,
    tool_triggers: BTreeMap<String, String>,
    languages: Vec<(String, HashSet<String>)>,
    attributes: HashSet<String>,
    direct_openers: Vec<Vec<String>>,
    indirect_openers: Vec<Vec<String>>,
    bloom_cues: Vec<(String, Vec<Vec<String>>)>,
    followup_templates: BTreeMap<String, String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Lexicon {
    /// The compiled-in word lists.
    pub fn builtin() -> Self {
        Self::from_sources(&Sources::builtin()).expect("built-in lexicon files are well-formed")
    }

    /// Loads overrides from `dir`; files that are absent keep the built-in
    /// contents.
    pub fn from_dir(dir: &Path) -> Result<Self, LexiconError> {
        let mut sources = Sources::builtin();
        for (name, slot) in sources.slots_mut() {
            let path = dir.join(name);
            if path.exists() {
                *slot = fs::read_to_string(&path)
                    .map_err(|source| LexiconError::Io { path, source })?
                    .into();
            }
        }
        Self::from_sources(&sources)
    }

    fn from_sources(s: &Sources) -> Result<Self, LexiconError> {
        let mut crop_forms = HashMap::new();
        for (canonical, forms) in parse_mapping("crops.txt", &s.crops)? {
            crop_forms.insert(canonical.clone(), canonical.clone());
            for form in forms {
                crop_forms.insert(form, canonical.clone());
            }
        }
        let topics = parse_mapping("topics.txt", &s.topics)?
            .into_iter()
            .map(|(name, keywords)| Topic {
                name,
                keywords: keywords.into_iter().collect(),
            })
            .collect();
        let tool_triggers = parse_mapping("tools.txt", &s.tools)?
            .into_iter()
            .filter_map(|(trigger, tools)| tools.into_iter().next().map(|t| (trigger, t)))
            .collect();
        let languages = parse_mapping("languages.txt", &s.languages)?
            .into_iter()
            .map(|(tag, words)| (tag, words.into_iter().flat_map(|w| terms(&w)).collect()))
            .collect();

        let mut direct_openers = Vec::new();
        let mut indirect_openers = Vec::new();
        for (kind, phrases) in parse_mapping("openers.txt", &s.openers)? {
            let phrases = phrases.iter().map(|p| terms(p)).collect();
            match kind.as_str() {
                "direct" => direct_openers = phrases,
                "indirect" => indirect_openers = phrases,
                other => {
                    return Err(LexiconError::Syntax {
                        file: "openers.txt".into(),
                        line: 0,
                        message: format!("unknown opener class `{other}`"),
                    })
                }
            }
        }
        let bloom_cues = parse_mapping("bloom.txt", &s.bloom)?
            .into_iter()
            .map(|(level, cues)| (level, cues.iter().map(|c| terms(c)).collect()))
            .collect();

        let mut followup_templates = BTreeMap::new();
        for (idx, line) in content_lines(&s.followups) {
            let (topic, template) = line.split_once('|').ok_or_else(|| LexiconError::Syntax {
                file: "followups.txt".into(),
                line: idx,
                message: "expected `topic | template`".into(),
            })?;
            followup_templates.insert(topic.trim().to_string(), template.trim().to_string());
        }

        Ok(Self {
            stopwords: parse_words(&s.stopwords),
            crop_forms,
            agronomy: parse_words(&s.agronomy),
            topics,
            greetings: parse_words(&s.greetings),
            menu_phrases: content_lines(&s.menu).map(|(_, l)| terms(l)).collect(),
            tool_triggers,
            languages,
            attributes: parse_words(&s.attributes),
            direct_openers,
            indirect_openers,
            bloom_cues,
            followup_templates,
        })
    }

    /// Replaces the topic list.
    pub fn with_topics<I, K>(mut self, topics: I) -> Self
    where
        I: IntoIterator<Item = (K, Vec<K>)>,
        K: Into<String>,
    {
        self.topics = topics
            .into_iter()
            .map(|(name, kws)| Topic {
                name: name.into(),
                keywords: kws.into_iter().map(Into::into).collect(),
            })
            .collect();
        self
    }

    pub fn is_stopword(&self, term: &str) -> bool {
        self.stopwords.contains(term)
    }

    /// Canonical crop name for a surface term (`corn` → `maize`).
    pub fn crop_of(&self, term: &str) -> Option<&str> {
        self.crop_forms.get(term).map(String::as_str)
    }

    /// Canonical crops mentioned in `text`.
    pub fn crops_in(&self, text: &str) -> BTreeSet<String> {
        terms(text)
            .iter()
            .filter_map(|t| self.crop_of(t))
            .map(str::to_string)
            .collect()
    }

    pub fn is_agronomy(&self, term: &str) -> bool {
        self.agronomy.contains(term)
    }

    /// True when any term is a crop or agronomy word.
    pub fn mentions_farming(&self, text: &str) -> bool {
        terms(text)
            .iter()
            .any(|t| self.crop_of(t).is_some() || self.is_agronomy(t))
    }

    pub fn topics(&self) -> &[Topic] {
        &self.topics
    }

    /// Names of topics whose keywords intersect the terms of `text`.
    pub fn topics_in(&self, text: &str) -> BTreeSet<String> {
        let found: HashSet<String> = terms(text).into_iter().collect();
        self.topics
            .iter()
            .filter(|t| t.keywords.iter().any(|k| found.contains(k)))
            .map(|t| t.name.clone())
            .collect()
    }

    pub fn is_greeting(&self, term: &str) -> bool {
        self.greetings.contains(term)
    }

    pub fn menu_phrases(&self) -> &[Vec<String>] {
        &self.menu_phrases
    }

    /// Tool name triggered by a term, if any.
    pub fn tool_for(&self, term: &str) -> Option<&str> {
        self.tool_triggers.get(term).map(String::as_str)
    }

    pub fn languages(&self) -> &[(String, HashSet<String>)] {
        &self.languages
    }

    pub fn is_attribute(&self, term: &str) -> bool {
        self.attributes.contains(term)
    }

    /// True when the leading terms match a direct (explicit ask) opener.
    pub fn has_direct_opener(&self, leading: &[String]) -> bool {
        starts_with_any(leading, &self.direct_openers)
    }

    pub fn has_indirect_opener(&self, leading: &[String]) -> bool {
        starts_with_any(leading, &self.indirect_openers)
    }

    /// Bloom cue phrases in precedence order, keyed by level name.
    pub fn bloom_cues(&self) -> &[(String, Vec<Vec<String>>)] {
        &self.bloom_cues
    }

    /// First level whose cue occurs in `query_terms`.
    pub fn first_bloom_match(&self, query_terms: &[String]) -> Option<&str> {
        self.bloom_cues
            .iter()
            .find(|(_, cues)| cues.iter().any(|c| contains_phrase(query_terms, c)))
            .map(|(level, _)| level.as_str())
    }

    pub fn followup_template(&self, topic: &str) -> Option<&str> {
        self.followup_templates.get(topic).map(String::as_str)
    }
}

fn starts_with_any(leading: &[String], phrases: &[Vec<String>]) -> bool {
    phrases
        .iter()
        .any(|p| !p.is_empty() && leading.len() >= p.len() && leading[..p.len()] == p[..])
}

struct Sources {
    stopwords: String,
    crops: String,
    agronomy: String,
    topics: String,
    greetings: String,
    menu: String,
    tools: String,
    languages: String,
    attributes: String,
    openers: String,
    bloom: String,
    followups: String,
}

impl Sources {
    fn builtin() -> Self {
        Self {
            stopwords: STOPWORDS.into(),
            crops: CROPS.into(),
            agronomy: AGRONOMY.into(),
            topics: TOPICS.into(),
            greetings: GREETINGS.into(),
            menu: MENU.into(),
            tools: TOOLS.into(),
            languages: LANGUAGES.into(),
            attributes: ATTRIBUTES.into(),
            openers: OPENERS.into(),
            bloom: BLOOM.into(),
            followups: FOLLOWUPS.into(),
        }
    }

    fn slots_mut(&mut self) -> [(&'static str, &mut String); 12] {
        [
            ("stopwords.txt", &mut self.stopwords),
            ("crops.txt", &mut self.crops),
            ("agronomy.txt", &mut self.agronomy),
            ("topics.txt", &mut self.topics),
            ("greetings.txt", &mut self.greetings),
            ("menu.txt", &mut self.menu),
            ("tools.txt", &mut self.tools),
            ("languages.txt", &mut self.languages),
            ("attributes.txt", &mut self.attributes),
            ("openers.txt", &mut self.openers),
            ("bloom.txt", &mut self.bloom),
            ("followups.txt", &mut self.followups),
        ]
    }
}

fn content_lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_words(src: &str) -> HashSet<String> {
    content_lines(src)
        .flat_map(|(_, l)| l.split_whitespace())
        .map(str::to_lowercase)
        .collect()
}

/// `key: a, b, c` lines. Values are comma separated when a comma is present,
/// whitespace separated otherwise.
fn parse_mapping(file: &str, src: &str) -> Result<Vec<(String, Vec<String>)>, LexiconError> {
    content_lines(src)
        .map(|(idx, line)| {
            let (key, rest) = line.split_once(':').ok_or_else(|| LexiconError::Syntax {
                file: file.to_string(),
                line: idx,
                message: "expected `key: values`".into(),
            })?;
            let values: Vec<String> = if rest.contains(',') {
                rest.split(',')
            } else {
                rest.split(' ')
            }
            .map(|v| v.trim().to_lowercase())
            .filter(|v| !v.is_empty())
            .collect();
            Ok((key.trim().to_lowercase(), values))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_loads() {
        let lx = Lexicon::builtin();
        assert!(lx.is_stopword("the"));
        assert_eq!(lx.crop_of("corn"), Some("maize"));
        assert_eq!(lx.crop_of("cows"), Some("dairy"));
        assert!(lx.is_agronomy("fertilizer"));
        assert_eq!(lx.tool_for("forecast"), Some("weather"));
        assert_eq!(lx.bloom_cues()[0].0, "apply");
        assert!(lx.followup_template("pests_diseases").unwrap().contains("{crop}"));
    }

    #[test]
    fn topics_match_keywords() {
        let lx = Lexicon::builtin();
        let t = lx.topics_in("maize storage pests");
        assert!(t.contains("storage"));
        assert!(t.contains("pests_diseases"));
    }

    #[test]
    fn openers() {
        let lx = Lexicon::builtin();
        assert!(lx.has_indirect_opener(&terms("How does irrigation work")));
        assert!(lx.has_direct_opener(&terms("When is the time")));
        assert!(!lx.has_direct_opener(&terms("Coffee spraying")));
    }

    #[test]
    fn directory_override_replaces_only_present_files() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("topics.txt"), "storage: silo\n").unwrap();
        let lx = Lexicon::from_dir(dir.path()).unwrap();
        assert_eq!(lx.topics().len(), 1);
        assert!(lx.is_stopword("the"));
    }

    #[test]
    fn malformed_mapping_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("crops.txt"), "# header\ncoffee arabica\n").unwrap();
        let err = Lexicon::from_dir(dir.path()).unwrap_err();
        assert!(err.to_string().contains("crops.txt:2"), "{err}");
    }
}

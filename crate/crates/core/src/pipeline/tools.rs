//! Callable tools (weather and the like) with a small argument schema.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::provider::fnv1a_64;
use crate::text::terms;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ToolError {
    #[error("unknown tool `{0}`")]
    Unknown(String),
    #[error("invalid arguments for `{tool}`: {message}")]
    Validation { tool: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolParam {
    pub name: String,
    pub required: bool,
    pub description: String,
    /// When non-empty, the argument must be one of these values.
    #[serde(default)]
    pub allowed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolSpec {
    pub name: String,
    pub description: String,
    pub input_schema: Vec<ToolParam>,
}

impl ToolSpec {
    /// Rejects missing required arguments, unknown argument names and values
    /// outside an allowed list.
    pub fn validate(&self, args: &BTreeMap<String, String>) -> Result<(), ToolError> {
        let fail = |message: String| ToolError::Validation {
            tool: self.name.clone(),
            message,
        };
        for name in args.keys() {
            if !self.input_schema.iter().any(|p| &p.name == name) {
                return Err(fail(format!("unexpected argument `{name}`")));
            }
        }
        for p in &self.input_schema {
            match args.get(&p.name).map(|v| v.trim()) {
                None | Some("") if p.required => {
                    return Err(fail(format!("missing required argument `{}`", p.name)))
                }
                Some(v) if !v.is_empty() && !p.allowed.is_empty() && !p.allowed.iter().any(|a| a == v) => {
                    return Err(fail(format!(
                        "`{}` must be one of {}, got `{v}`",
                        p.name,
                        p.allowed.join(", ")
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

pub type ToolHandler = Arc<dyn Fn(&BTreeMap<String, String>) -> String + Send + Sync>;

#[derive(Clone, Default)]
pub struct ToolRegistry {
    tools: BTreeMap<String, (ToolSpec, ToolHandler)>,
}

impl fmt::Debug for ToolRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ToolRegistry")
            .field("tools", &self.tools.keys().collect::<Vec<_>>())
            .finish()
    }
}

const DAYS: [&str; 10] = [
    "today", "tomorrow", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
    "sunday", "tonight",
];

impl ToolRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry with the shipped deterministic `weather` stub.
    pub fn with_defaults() -> Self {
        let mut reg = Self::empty();
        reg.register(
            ToolSpec {
                name: "weather".into(),
                description: "Forecast for a location and day".into(),
                input_schema: vec![
                    ToolParam {
                        name: "location".into(),
                        required: true,
                        description: "Town or county name".into(),
                        allowed: Vec::new(),
                    },
                    ToolParam {
                        name: "day".into(),
                        required: false,
                        description: "today, tomorrow or a weekday; defaults to today".into(),
                        allowed: DAYS.iter().map(|d| d.to_string()).collect(),
                    },
                ],
            },
            Arc::new(fixture_forecast),
        );
        reg
    }

    pub fn register(&mut self, spec: ToolSpec, handler: ToolHandler) {
        self.tools.insert(spec.name.clone(), (spec, handler));
    }

    pub fn spec(&self, name: &str) -> Option<&ToolSpec> {
        self.tools.get(name).map(|(s, _)| s)
    }

    pub fn names(&self) -> Vec<&str> {
        self.tools.keys().map(String::as_str).collect()
    }

    pub fn run_tool(&self, name: &str, args: &BTreeMap<String, String>) -> Result<String, ToolError> {
        let (spec, handler) = self
            .tools
            .get(name)
            .ok_or_else(|| ToolError::Unknown(name.to_string()))?;
        spec.validate(args)?;
        Ok(handler(args))
    }
}

/// Deterministic forecast derived from a hash of location and day.
fn fixture_forecast(args: &BTreeMap<String, String>) -> String {
    const SKIES: [&str; 4] = ["sunny", "partly cloudy", "light rain", "heavy showers"];
    let location = args.get("location").map(|s| s.trim()).unwrap_or_default();
    let day = args
        .get("day")
        .map(|s| s.trim())
        .filter(|d| !d.is_empty())
        .unwrap_or("today");
    let h = fnv1a_64(format!("{}|{day}", location.to_lowercase()).as_bytes());
    let sky = SKIES[(h % SKIES.len() as u64) as usize];
    let low = 10 + (h >> 8) % 8;
    let high = low + 6 + (h >> 16) % 8;
    let rain = ((h >> 24) % 10) * 10;
    format!("Forecast for {location} ({day}): {sky}, {low}-{high} °C, {rain}% chance of rain.")
}

/// Pulls `location` and `day` for the weather tool out of free text: the
/// location is the capitalized word after `in`/`at`/`for`, or failing that
/// the first capitalized word past the start; the day is the first day word.
pub fn extract_weather_args(text: &str) -> BTreeMap<String, String> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let clean = |w: &str| {
        w.trim_matches(|c: char| !c.is_alphanumeric())
            .to_string()
    };
    let capitalized = |w: &str| clean(w).chars().next().is_some_and(char::is_uppercase);
    let after_preposition = words.windows(2).find_map(|pair| {
        let prep = clean(pair[0]).to_lowercase();
        (["in", "at", "for"].contains(&prep.as_str()) && capitalized(pair[1])).then(|| clean(pair[1]))
    });
    let location = after_preposition.or_else(|| {
        words
            .iter()
            .skip(1)
            .find(|w| capitalized(w) && !DAYS.contains(&clean(w).to_lowercase().as_str()))
            .map(|w| clean(w))
    });
    let mut args = BTreeMap::new();
    if let Some(loc) = location {
        args.insert("location".to_string(), loc);
    }
    if let Some(day) = terms(text).into_iter().find(|t| DAYS.contains(&t.as_str())) {
        args.insert("day".to_string(), day);
    }
    args
}

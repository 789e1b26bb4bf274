//! JSON configuration shared by the CLI and the server.
//!
//! ```json
//! {
//!   "data_dir": "var",
//!   "lexicon_dir": null,
//!   "providers": [{"name": "remote", "kind": "http", "base_url": "http://127.0.0.1:9000", "max_in_flight": 8}],
//!   "default_provider": "local",
//!   "routes": {"generate": "remote"},
//!   "ingest": {"budget_tokens": 512, "overlap_tokens": 32},
//!   "pipeline": {"retrieval_k": 10},
//!   "histogram_edges": [0, 2.5, 5, 7.5, 10],
//!   "server": {"bind": "127.0.0.1:8080", "api_token": "secret", "default_collection": "kenya"}
//! }
//! ```
//!
//! Every field is optional. A `local` provider is always available.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::latency::default_edges;
use crate::kb::IngestConfig;
use crate::lexicon::{Lexicon, LexiconError};
use crate::pipeline::PipelineConfig;
use crate::provider::HttpProvider;
use crate::provider::{LocalProvider, Provider, ProviderError, ProviderGateway};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Local,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub name: String,
    pub kind: ProviderKind,
    #[serde(default)]
    pub base_url: Option<String>,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

fn default_in_flight() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerConfig {
    pub bind: String,
    /// Bearer token required by the ingest and analytics endpoints. When
    /// unset those endpoints are open (development mode).
    pub api_token: Option<String>,
    pub default_collection: Option<String>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            api_token: None,
            default_collection: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AppConfig {
    pub data_dir: PathBuf,
    /// Conversation log; defaults to `<data_dir>/conversations.ndjson`.
    pub log_path: Option<PathBuf>,
    /// Directory of lexicon files overriding the built-in ones.
    pub lexicon_dir: Option<PathBuf>,
    pub providers: Vec<ProviderConfig>,
    pub default_provider: String,
    /// Task or capability name → provider name.
    pub routes: BTreeMap<String, String>,
    pub ingest: IngestConfig,
    pub pipeline: PipelineConfig,
    pub histogram_edges: Vec<f64>,
    pub server: ServerConfig,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("var"),
            log_path: None,
            lexicon_dir: None,
            providers: Vec::new(),
            default_provider: "local".into(),
            routes: BTreeMap::new(),
            ingest: IngestConfig::default(),
            pipeline: PipelineConfig::default(),
            histogram_edges: default_edges(),
            server: ServerConfig::default(),
        }
    }
}

impl AppConfig {
    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: AppConfig = serde_json::from_str(&text).map_err(|source| ConfigError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.data_dir);
        if let Some(p) = cfg.log_path.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.lexicon_dir.as_mut() {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn log_path(&self) -> PathBuf {
        self.log_path
            .clone()
            .unwrap_or_else(|| self.data_dir.join("conversations.ndjson"))
    }

    pub fn lexicon(&self) -> Result<Lexicon, ConfigError> {
        match &self.lexicon_dir {
            Some(dir) => Ok(Lexicon::from_dir(dir)?),
            None => Ok(Lexicon::builtin()),
        }
    }

    /// Builds the provider gateway: the built-in `local` provider plus every
    /// configured one, with the configured default and routes.
    pub fn gateway(&self, lexicon: Arc<Lexicon>) -> Result<ProviderGateway, ConfigError> {
        let mut named: BTreeMap<String, Arc<dyn Provider>> = BTreeMap::new();
        named.insert("local".into(), Arc::new(LocalProvider::new(lexicon.clone())));
        for p in &self.providers {
            let provider: Arc<dyn Provider> = match p.kind {
                ProviderKind::Local => Arc::new(LocalProvider::named(&p.name, lexicon.clone())),
                ProviderKind::Http => {
                    let url = p.base_url.as_deref().ok_or_else(|| {
                        ConfigError::Invalid(format!("provider `{}` needs a base_url", p.name))
                    })?;
                    Arc::new(HttpProvider::new(&p.name, url, p.max_in_flight)?)
                }
            };
            named.insert(p.name.clone(), provider);
        }
        let default = named.remove(&self.default_provider).ok_or_else(|| {
            ConfigError::Invalid(format!("default provider `{}` is not configured", self.default_provider))
        })?;
        let mut gw = named
            .into_values()
            .fold(ProviderGateway::new(default), |gw, p| gw.with_provider(p));
        for (key, provider) in &self.routes {
            gw = gw.with_route(key, provider)?;
        }
        Ok(gw)
    }
}

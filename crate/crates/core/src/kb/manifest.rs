//! Collection manifests: a JSON file naming the region, its crops and the
//! documents to ingest.
//!
//! ```json
//! {
//!   "collection_id": "kenya",
//!   "region": "Kenya",
//!   "crops": ["coffee", "dairy", "potato"],
//!   "documents": [
//!     {"doc_id": "coffee-pests", "uri": "docs/coffee_pests.md",
//!      "format": "prose", "language": "en", "crop_tags": ["coffee"]}
//!   ]
//! }
//! ```
//!
//! Relative `uri`s resolve against the manifest's directory. A document may
//! carry its `text` inline instead of a `uri`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{KbError, SourceDocument};
use crate::provider::{fnv1a_64, LanguageTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub collection_id: Option<String>,
    pub region: String,
    pub crops: Vec<String>,
    #[serde(default)]
    pub documents: Vec<DocumentEntry>,
    /// Directory that relative document URIs resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentEntry {
    #[serde(default)]
    pub doc_id: Option<String>,
    #[serde(default)]
    pub uri: Option<String>,
    #[serde(default)]
    pub text: Option<String>,
    /// Kept as a string so an unknown format fails only its own document.
    pub format: String,
    #[serde(default = "default_language")]
    pub language: String,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub crop_tags: BTreeSet<String>,
}

fn default_language() -> String {
    "en".into()
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, KbError> {
        let text = fs::read_to_string(path).map_err(|source| KbError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut manifest = Self::parse(&text).map_err(|source| KbError::Json {
            path: path.display().to_string(),
            source,
        })?;
        manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(manifest)
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Collection id named by the manifest, or the slug of its region.
    pub fn collection_id(&self) -> String {
        self.collection_id
            .clone()
            .unwrap_or_else(|| super::slug(&self.region))
    }

    /// Resolves every entry; each element fails or succeeds independently.
    pub fn documents(&self) -> Vec<(usize, Result<SourceDocument, KbError>)> {
        self.documents
            .iter()
            .enumerate()
            .map(|(i, e)| (i, e.resolve(&self.base_dir)))
            .collect()
    }
}

impl DocumentEntry {
    /// Loads the text and validates the entry.
    pub fn resolve(&self, base_dir: &Path) -> Result<SourceDocument, KbError> {
        let format = self.format.parse()?;
        let language = LanguageTag::parse(&self.language)?;
        let (raw_text, source_uri) = match (&self.text, &self.uri) {
            (Some(text), uri) => (text.clone(), uri.clone().unwrap_or_default()),
            (None, Some(uri)) => {
                let path = base_dir.join(uri);
                let text = fs::read_to_string(&path).map_err(|source| KbError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                (text, uri.clone())
            }
            (None, None) => {
                return Err(KbError::Validation(
                    "document entry needs a `uri` or inline `text`".into(),
                ))
            }
        };
        let doc_id = match &self.doc_id {
            Some(id) => id.clone(),
            None => derive_doc_id(&source_uri, &raw_text),
        };
        let doc = SourceDocument {
            title: self.title.clone().unwrap_or_else(|| doc_id.clone()),
            doc_id,
            source_uri,
            format,
            language,
            raw_text,
            crop_tags: self.crop_tags.iter().map(|c| c.to_lowercase()).collect(),
        };
        doc.validate()?;
        Ok(doc)
    }
}

/// File stem of the URI, or a content hash for inline documents.
fn derive_doc_id(uri: &str, text: &str) -> String {
    let stem = Path::new(uri)
        .file_stem()
        .and_then(|s| s.to_str())
        .map(super::slug)
        .unwrap_or_default();
    if stem.is_empty() {
        format!("doc-{:016x}", fnv1a_64(text.as_bytes()))
    } else {
        stem
    }
}

//! Knowledge base: parse source documents, chunk them, enrich each chunk
//! with a summary and topic tags, embed, and index into region-scoped
//! collections.

pub mod chunking;
mod collection;
pub mod enrich;
mod manifest;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::IndexError;
use crate::provider::{EmbeddingVector, LanguageTag, ProviderError};

pub use chunking::{
    chunk_prose, chunk_table, chunk_transcript, normalize_document, parse_table,
    parse_transcript, ChunkText, Cue, Table, TimeSpan,
};
pub use collection::{
    slug, CollectionRegistry, CollectionSnapshot, DocumentOutcome, IngestConfig, Ingestor,
    KnowledgeCollection, ManifestOutcome,
};
pub use manifest::{DocumentEntry, Manifest};

#[derive(Debug, Error)]
pub enum KbError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported document format `{0}`")]
    UnsupportedFormat(String),
    #[error("collection `{0}` already exists")]
    Conflict(String),
    #[error("collection `{0}` not found")]
    NotFound(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentFormat {
    Prose,
    Table,
    Transcript,
}

impl DocumentFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            DocumentFormat::Prose => "prose",
            DocumentFormat::Table => "table",
            DocumentFormat::Transcript => "transcript",
        }
    }
}

impl fmt::Display for DocumentFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DocumentFormat {
    type Err = KbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prose" => Ok(DocumentFormat::Prose),
            "table" => Ok(DocumentFormat::Table),
            "transcript" => Ok(DocumentFormat::Transcript),
            other => Err(KbError::UnsupportedFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub doc_id: String,
    pub source_uri: String,
    pub format: DocumentFormat,
    pub language: LanguageTag,
    pub title: String,
    pub raw_text: String,
    #[serde(default)]
    pub crop_tags: BTreeSet<String>,
}

impl SourceDocument {
    pub fn new(doc_id: &str, format: DocumentFormat, raw_text: impl Into<String>) -> Self {
        Self {
            doc_id: doc_id.to_string(),
            source_uri: String::new(),
            format,
            language: LanguageTag::english(),
            title: doc_id.to_string(),
            raw_text: raw_text.into(),
            crop_tags: BTreeSet::new(),
        }
    }

    pub fn validate(&self) -> Result<(), KbError> {
        if self.doc_id.trim().is_empty() {
            return Err(KbError::Validation("doc_id is empty".into()));
        }
        if self.doc_id.contains('#') || self.doc_id.contains('/') {
            return Err(KbError::Validation(format!(
                "doc_id `{}` must not contain `#` or `/`",
                self.doc_id
            )));
        }
        if self.raw_text.trim().is_empty() {
            return Err(KbError::Validation(format!(
                "document `{}` has no text",
                self.doc_id
            )));
        }
        Ok(())
    }
}

/// The unit of retrieval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub ordinal: usize,
    pub text: String,
    pub summary: String,
    pub topics: BTreeSet<String>,
    /// Restored from the vector index on load; not part of the chunk file.
    #[serde(skip, default = "empty_embedding")]
    pub embedding: EmbeddingVector,
    pub token_count: usize,
    #[serde(default)]
    pub overlap_tokens: usize,
    #[serde(default)]
    pub time_span: Option<TimeSpan>,
}

fn empty_embedding() -> EmbeddingVector {
    EmbeddingVector::zero(0)
}

pub fn chunk_id(doc_id: &str, ordinal: usize) -> String {
    format!("{doc_id}#{ordinal:05}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub doc_id: String,
    pub chunk_count: usize,
    /// Chunks kept in the collection but not indexed because their text has
    /// no embeddable term.
    pub skipped_blocks: usize,
    pub warnings: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_parsing() {
        assert_eq!("table".parse::<DocumentFormat>().unwrap(), DocumentFormat::Table);
        assert!(matches!(
            "pdf".parse::<DocumentFormat>(),
            Err(KbError::UnsupportedFormat(f)) if f == "pdf"
        ));
    }

    #[test]
    fn chunk_ids_sort_by_ordinal() {
        assert!(chunk_id("doc", 2) < chunk_id("doc", 10));
        assert_eq!(chunk_id("doc", 7), "doc#00007");
    }

    #[test]
    fn document_validation() {
        assert!(SourceDocument::new("d", DocumentFormat::Prose, "  ").validate().is_err());
        assert!(SourceDocument::new("a#b", DocumentFormat::Prose, "x").validate().is_err());
        assert!(SourceDocument::new("d", DocumentFormat::Prose, "x").validate().is_ok());
    }
}

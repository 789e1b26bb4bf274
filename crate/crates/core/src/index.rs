//! Exact cosine top-k search over chunk embeddings.
//!
//! Vectors are unit length, so the score is a plain dot product. Results are
//! ordered by score descending, then chunk id ascending, which makes every
//! search reproducible.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::provider::EmbeddingVector;

const FORMAT_NAME: &str = "shamba-vector-index";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("zero vector for chunk `{0}` cannot be indexed")]
    ZeroEntry(String),
    #[error("query vector is zero")]
    ZeroQuery,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("dimension mismatch: index has {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("index file format error: {0}")]
    Format(String),
    #[error("index file I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub chunk_id: String,
    pub embedding: EmbeddingVector,
    pub collection_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub chunk_id: String,
    pub score: f64,
}

/// Descending score, ascending chunk id.
pub fn hit_order(a: &SearchHit, b: &SearchHit) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.chunk_id.cmp(&b.chunk_id))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    dimension: usize,
    entries: BTreeMap<String, IndexEntry>,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    format: String,
    version: u32,
    dimension: usize,
    entries: Vec<FileEntry>,
}

#[derive(Serialize, Deserialize)]
struct FileEntry {
    chunk_id: String,
    collection_id: String,
    values: Vec<f64>,
}

impl VectorIndex {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            entries: BTreeMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, chunk_id: &str) -> bool {
        self.entries.contains_key(chunk_id)
    }

    pub fn get(&self, chunk_id: &str) -> Option<&IndexEntry> {
        self.entries.get(chunk_id)
    }

    pub fn entries(&self) -> impl Iterator<Item = &IndexEntry> {
        self.entries.values()
    }

    /// Inserts or replaces the entry with the same chunk id.
    pub fn upsert(&mut self, entry: IndexEntry) -> Result<(), IndexError> {
        if entry.embedding.dimension() != self.dimension {
            return Err(IndexError::Dimension {
                expected: self.dimension,
                actual: entry.embedding.dimension(),
            });
        }
        if entry.embedding.is_zero() {
            return Err(IndexError::ZeroEntry(entry.chunk_id));
        }
        self.entries.insert(entry.chunk_id.clone(), entry);
        Ok(())
    }

    pub fn remove(&mut self, chunk_id: &str) -> bool {
        self.entries.remove(chunk_id).is_some()
    }

    /// The `min(k, len)` best hits by exhaustive scan.
    pub fn search_topk(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<SearchHit>, IndexError> {
        if k == 0 {
            return Err(IndexError::InvalidK);
        }
        if query.dimension() != self.dimension {
            return Err(IndexError::Dimension {
                expected: self.dimension,
                actual: query.dimension(),
            });
        }
        if query.is_zero() {
            return Err(IndexError::ZeroQuery);
        }
        let mut hits: Vec<SearchHit> = self
            .entries
            .values()
            .map(|e| SearchHit {
                chunk_id: e.chunk_id.clone(),
                score: e.embedding.dot(query),
            })
            .collect();
        if hits.len() > k {
            hits.select_nth_unstable_by(k - 1, hit_order);
            hits.truncate(k);
        }
        hits.sort_by(hit_order);
        Ok(hits)
    }

    /// Writes the index as a versioned JSON document. The write goes to a
    /// sibling temp file first and is renamed into place.
    pub fn persist(&self, path: &Path) -> Result<(), IndexError> {
        let file = IndexFile {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            dimension: self.dimension,
            entries: self
                .entries
                .values()
                .map(|e| FileEntry {
                    chunk_id: e.chunk_id.clone(),
                    collection_id: e.collection_id.clone(),
                    values: e.embedding.values.clone(),
                })
                .collect(),
        };
        let tmp = path.with_extension("tmp");
        {
            let mut out = fs::File::create(&tmp)?;
            serde_json::to_writer(&mut out, &file)
                .map_err(|e| IndexError::Format(e.to_string()))?;
            out.flush()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let bytes = fs::read(path)?;
        let file: IndexFile =
            serde_json::from_slice(&bytes).map_err(|e| IndexError::Format(e.to_string()))?;
        if file.format != FORMAT_NAME {
            return Err(IndexError::Format(format!("unexpected format `{}`", file.format)));
        }
        if file.version != FORMAT_VERSION {
            return Err(IndexError::Format(format!(
                "unsupported version {}",
                file.version
            )));
        }
        let mut index = Self::new(file.dimension);
        for e in file.entries {
            let embedding = EmbeddingVector {
                norm: e.values.iter().map(|v| v * v).sum::<f64>().sqrt(),
                values: e.values,
            };
            index.upsert(IndexEntry {
                chunk_id: e.chunk_id,
                embedding,
                collection_id: e.collection_id,
            })?;
        }
        Ok(index)
    }

    /// Loads and checks the stored dimension.
    pub fn load_expecting(path: &Path, dimension: usize) -> Result<Self, IndexError> {
        let index = Self::load(path)?;
        if index.dimension != dimension {
            return Err(IndexError::Dimension {
                expected: dimension,
                actual: index.dimension,
            });
        }
        Ok(index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(values: &[f64]) -> EmbeddingVector {
        EmbeddingVector::normalized(values.to_vec())
    }

    fn entry(id: &str, values: &[f64]) -> IndexEntry {
        IndexEntry {
            chunk_id: id.into(),
            embedding: unit(values),
            collection_id: "c".into(),
        }
    }

    #[test]
    fn self_similarity_and_orthogonality() {
        let mut idx = VectorIndex::new(3);
        idx.upsert(entry("a", &[1.0, 2.0, 3.0])).unwrap();
        idx.upsert(entry("b", &[0.0, 0.0, 1.0])).unwrap();
        let hits = idx.search_topk(&unit(&[1.0, 2.0, 3.0]), 1).unwrap();
        assert_eq!(hits[0].chunk_id, "a");
        assert!((hits[0].score - 1.0).abs() <= 1e-6);

        let ortho = idx.search_topk(&unit(&[1.0, 0.0, 0.0]), 2).unwrap();
        let b = ortho.iter().find(|h| h.chunk_id == "b").unwrap();
        assert!(b.score.abs() <= 1e-6);
    }

    #[test]
    fn upsert_replaces_and_rejects_zero() {
        let mut idx = VectorIndex::new(2);
        idx.upsert(entry("a", &[1.0, 0.0])).unwrap();
        idx.upsert(entry("a", &[0.0, 1.0])).unwrap();
        assert_eq!(idx.len(), 1);
        assert!(matches!(
            idx.upsert(IndexEntry {
                chunk_id: "z".into(),
                embedding: EmbeddingVector::zero(2),
                collection_id: "c".into()
            }),
            Err(IndexError::ZeroEntry(_))
        ));
        assert!(matches!(
            idx.upsert(entry("d", &[1.0, 0.0, 0.0])),
            Err(IndexError::Dimension { .. })
        ));
    }

    #[test]
    fn search_validation() {
        let mut idx = VectorIndex::new(2);
        idx.upsert(entry("a", &[1.0, 0.0])).unwrap();
        assert!(matches!(
            idx.search_topk(&EmbeddingVector::zero(2), 1),
            Err(IndexError::ZeroQuery)
        ));
        assert!(matches!(idx.search_topk(&unit(&[1.0, 0.0]), 0), Err(IndexError::InvalidK)));
        assert_eq!(idx.search_topk(&unit(&[1.0, 0.0]), 10).unwrap().len(), 1);
    }

    #[test]
    fn ties_break_by_chunk_id() {
        let mut idx = VectorIndex::new(2);
        for id in ["c", "a", "b"] {
            idx.upsert(entry(id, &[1.0, 1.0])).unwrap();
        }
        let ids: Vec<_> = idx
            .search_topk(&unit(&[1.0, 1.0]), 3)
            .unwrap()
            .into_iter()
            .map(|h| h.chunk_id)
            .collect();
        assert_eq!(ids, vec!["a", "b", "c"]);
    }

    #[test]
    fn remove_absent_is_false() {
        let mut idx = VectorIndex::new(2);
        assert!(!idx.remove("missing"));
    }

    #[test]
    fn corrupt_file_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.json");
        fs::write(&path, b"{not json").unwrap();
        assert!(matches!(VectorIndex::load(&path), Err(IndexError::Format(_))));
    }

    #[test]
    fn dimension_mismatch_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.json");
        let mut idx = VectorIndex::new(2);
        idx.upsert(entry("a", &[1.0, 0.0])).unwrap();
        idx.persist(&path).unwrap();
        assert!(matches!(
            VectorIndex::load_expecting(&path, 8),
            Err(IndexError::Dimension { expected: 8, actual: 2 })
        ));
    }
}

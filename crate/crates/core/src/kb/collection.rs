use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::chunking::{
    chunk_prose, chunk_table, chunk_transcript, parse_table, parse_transcript, ChunkText,
};
use super::enrich::{first_sentence_summary, parse_topic_reply, SUMMARY_MAX_WORDS};
use super::{chunk_id, Chunk, DocumentFormat, IngestReport, KbError, Manifest, SourceDocument};
use crate::index::{IndexEntry, SearchHit, VectorIndex};
use crate::lexicon::Lexicon;
use crate::provider::prompt::{self, Prompt};
use crate::provider::{
    CompletionRequest, EmbeddingVector, ProviderGateway, TaskKind, DEFAULT_EMBEDDING_DIMENSION,
};

const COLLECTION_FORMAT: &str = "shamba-collection";
const COLLECTION_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    pub budget_tokens: usize,
    pub overlap_tokens: usize,
    pub transcript_window_s: f64,
    pub table_delimiter: char,
    pub embedding_dimension: usize,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            budget_tokens: 512,
            overlap_tokens: 32,
            transcript_window_s: 60.0,
            table_delimiter: ',',
            embedding_dimension: DEFAULT_EMBEDDING_DIMENSION,
        }
    }
}

/// An immutable view of a collection's documents, chunks and index. Readers
/// hold one for the duration of a query so they never observe a
/// half-applied ingestion.
#[derive(Debug, Clone)]
pub struct CollectionSnapshot {
    pub documents: BTreeMap<String, SourceDocument>,
    pub chunks: BTreeMap<String, Chunk>,
    pub index: VectorIndex,
}

impl CollectionSnapshot {
    fn empty(dimension: usize) -> Self {
        Self {
            documents: BTreeMap::new(),
            chunks: BTreeMap::new(),
            index: VectorIndex::new(dimension),
        }
    }

    pub fn chunk(&self, chunk_id: &str) -> Option<&Chunk> {
        self.chunks.get(chunk_id)
    }

    pub fn search(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<SearchHit>, KbError> {
        if self.index.is_empty() {
            return Ok(Vec::new());
        }
        Ok(self.index.search_topk(query, k)?)
    }
}

/// A region-scoped set of documents plus their index. Its crop set is the
/// boundary for "unsupported crop" answers.
#[derive(Debug)]
pub struct KnowledgeCollection {
    id: String,
    region: String,
    crops: BTreeSet<String>,
    dimension: usize,
    state: RwLock<Arc<CollectionSnapshot>>,
    writer: Mutex<()>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_')
}

/// Lowercase id derived from a region name (`Kenya West` → `kenya-west`).
pub fn slug(text: &str) -> String {
    let mut out = String::new();
    for ch in text.trim().chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    out.trim_end_matches('-').to_string()
}

#[derive(Serialize, Deserialize)]
struct CollectionFile {
    format: String,
    version: u32,
    id: String,
    region: String,
    crops: BTreeSet<String>,
    dimension: usize,
    documents: Vec<SourceDocument>,
    chunks: Vec<Chunk>,
}

impl KnowledgeCollection {
    pub fn new<I, S>(id: &str, region: &str, crops: I, dimension: usize) -> Result<Self, KbError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if !valid_id(id) {
            return Err(KbError::Validation(format!(
                "collection id `{id}` must be lowercase letters, digits, `-` or `_`"
            )));
        }
        if region.trim().is_empty() {
            return Err(KbError::Validation("region is empty".into()));
        }
        let crops: BTreeSet<String> = crops
            .into_iter()
            .map(|c| c.as_ref().trim().to_lowercase())
            .filter(|c| !c.is_empty())
            .collect();
        if crops.is_empty() {
            return Err(KbError::Validation("a collection needs at least one crop".into()));
        }
        Ok(Self {
            id: id.to_string(),
            region: region.trim().to_string(),
            crops,
            dimension,
            state: RwLock::new(Arc::new(CollectionSnapshot::empty(dimension))),
            writer: Mutex::new(()),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn region(&self) -> &str {
        &self.region
    }

    pub fn crops(&self) -> &BTreeSet<String> {
        &self.crops
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn snapshot(&self) -> Arc<CollectionSnapshot> {
        Arc::clone(&self.state.read().unwrap_or_else(|e| e.into_inner()))
    }

    pub fn doc_ids(&self) -> BTreeSet<String> {
        self.snapshot().documents.keys().cloned().collect()
    }

    pub fn chunk_count(&self) -> usize {
        self.snapshot().chunks.len()
    }

    pub fn indexed_count(&self) -> usize {
        self.snapshot().index.len()
    }

    /// Swaps in `doc` with its new chunks, dropping whatever the document
    /// contributed before. Readers see either the old or the new state.
    fn replace_document(&self, doc: SourceDocument, chunks: Vec<Chunk>) -> Result<(), KbError> {
        let _writer = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = (*self.snapshot()).clone();
        let stale: Vec<String> = next
            .chunks
            .values()
            .filter(|c| c.doc_id == doc.doc_id)
            .map(|c| c.chunk_id.clone())
            .collect();
        for id in stale {
            next.chunks.remove(&id);
            next.index.remove(&id);
        }
        for chunk in chunks {
            if !chunk.embedding.is_zero() {
                next.index.upsert(IndexEntry {
                    chunk_id: chunk.chunk_id.clone(),
                    embedding: chunk.embedding.clone(),
                    collection_id: self.id.clone(),
                })?;
            }
            next.chunks.insert(chunk.chunk_id.clone(), chunk);
        }
        next.documents.insert(doc.doc_id.clone(), doc);
        *self.state.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
        Ok(())
    }

    /// Writes `collection.json` and `index.json` under `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), KbError> {
        let _writer = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let snap = self.snapshot();
        fs::create_dir_all(dir).map_err(|source| io_err(dir, source))?;
        let file = CollectionFile {
            format: COLLECTION_FORMAT.into(),
            version: COLLECTION_VERSION,
            id: self.id.clone(),
            region: self.region.clone(),
            crops: self.crops.clone(),
            dimension: self.dimension,
            documents: snap.documents.values().cloned().collect(),
            chunks: snap.chunks.values().cloned().collect(),
        };
        let path = dir.join("collection.json");
        let tmp = dir.join("collection.json.tmp");
        let json = serde_json::to_vec_pretty(&file).map_err(|source| KbError::Json {
            path: path.display().to_string(),
            source,
        })?;
        fs::write(&tmp, json).map_err(|source| io_err(&tmp, source))?;
        fs::rename(&tmp, &path).map_err(|source| io_err(&path, source))?;
        snap.index.persist(&dir.join("index.json"))?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, KbError> {
        let path = dir.join("collection.json");
        let bytes = fs::read(&path).map_err(|source| io_err(&path, source))?;
        let file: CollectionFile = serde_json::from_slice(&bytes).map_err(|source| KbError::Json {
            path: path.display().to_string(),
            source,
        })?;
        if file.format != COLLECTION_FORMAT || file.version != COLLECTION_VERSION {
            return Err(KbError::Validation(format!(
                "{}: unsupported collection format {} v{}",
                path.display(),
                file.format,
                file.version
            )));
        }
        let index = VectorIndex::load_expecting(&dir.join("index.json"), file.dimension)?;
        let collection = Self::new(&file.id, &file.region, &file.crops, file.dimension)?;
        let mut snap = CollectionSnapshot::empty(file.dimension);
        for mut chunk in file.chunks {
            chunk.embedding = index
                .get(&chunk.chunk_id)
                .map(|e| e.embedding.clone())
                .unwrap_or_else(|| EmbeddingVector::zero(file.dimension));
            snap.chunks.insert(chunk.chunk_id.clone(), chunk);
        }
        if let Some(orphan) = index.entries().find(|e| !snap.chunks.contains_key(&e.chunk_id)) {
            return Err(KbError::Validation(format!(
                "index entry `{}` has no chunk in {}",
                orphan.chunk_id,
                path.display()
            )));
        }
        snap.index = index;
        snap.documents = file
            .documents
            .into_iter()
            .map(|d| (d.doc_id.clone(), d))
            .collect();
        *collection.state.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(snap);
        Ok(collection)
    }
}

fn io_err(path: &Path, source: std::io::Error) -> KbError {
    KbError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Parses, chunks, enriches and embeds documents into collections.
#[derive(Debug, Clone)]
pub struct Ingestor {
    gateway: Arc<ProviderGateway>,
    lexicon: Arc<Lexicon>,
    config: IngestConfig,
}

impl Ingestor {
    pub fn new(gateway: Arc<ProviderGateway>, lexicon: Arc<Lexicon>, config: IngestConfig) -> Self {
        Self {
            gateway,
            lexicon,
            config,
        }
    }

    pub fn config(&self) -> &IngestConfig {
        &self.config
    }

    /// Chunk texts for `doc` according to its format.
    pub fn chunk_document(&self, doc: &SourceDocument) -> Result<Vec<ChunkText>, KbError> {
        let cfg = &self.config;
        match doc.format {
            DocumentFormat::Prose => {
                chunk_prose(&doc.raw_text, cfg.budget_tokens, cfg.overlap_tokens)
            }
            DocumentFormat::Table => {
                let delimiter = u8::try_from(cfg.table_delimiter).map_err(|_| {
                    KbError::Validation(format!(
                        "table delimiter `{}` must be a single-byte character",
                        cfg.table_delimiter
                    ))
                })?;
                chunk_table(&parse_table(&doc.raw_text, delimiter)?, cfg.budget_tokens)
            }
            DocumentFormat::Transcript => chunk_transcript(
                &parse_transcript(&doc.raw_text)?,
                cfg.transcript_window_s,
                cfg.budget_tokens,
            ),
        }
    }

    /// Summary and topics for one chunk. Provider failures leave the
    /// enrichment empty and are returned as warnings.
    pub fn enrich(&self, text: &str) -> (String, BTreeSet<String>, Vec<String>) {
        let mut warnings = Vec::new();
        let summary_req = CompletionRequest::new(
            TaskKind::Summarize,
            Prompt::new(prompt::SUMMARIZE_INSTRUCTION)
                .field(prompt::LIMIT, SUMMARY_MAX_WORDS.to_string())
                .field(prompt::TEXT, text)
                .render(),
        );
        let summary = match self.gateway.complete(&summary_req) {
            Ok(s) => first_sentence_summary(s.trim(), SUMMARY_MAX_WORDS),
            Err(e) => {
                warnings.push(format!("summary unavailable: {e}"));
                String::new()
            }
        };
        let topic_names: Vec<&str> = self.lexicon.topics().iter().map(|t| t.name.as_str()).collect();
        let tag_req = CompletionRequest::new(
            TaskKind::Tag,
            Prompt::new(prompt::TAG_INSTRUCTION)
                .field(prompt::TOPICS, topic_names.join(", "))
                .field(prompt::TEXT, text)
                .render(),
        );
        let topics = match self.gateway.complete(&tag_req) {
            Ok(reply) => parse_topic_reply(&reply, &self.lexicon),
            Err(e) => {
                warnings.push(format!("topics unavailable: {e}"));
                BTreeSet::new()
            }
        };
        (summary, topics, warnings)
    }

    /// Ingests `doc` into `collection`, replacing any earlier version of the
    /// same document. Nothing is written unless every step succeeds.
    pub fn ingest(
        &self,
        doc: &SourceDocument,
        collection: &KnowledgeCollection,
    ) -> Result<IngestReport, KbError> {
        doc.validate()?;
        if collection.dimension() != self.config.embedding_dimension {
            return Err(KbError::Validation(format!(
                "collection `{}` uses dimension {}, ingestion is configured for {}",
                collection.id(),
                collection.dimension(),
                self.config.embedding_dimension
            )));
        }
        let texts = self.chunk_document(doc)?;
        let mut warnings = Vec::new();
        let mut skipped = 0;
        let mut chunks = Vec::with_capacity(texts.len());
        for (ordinal, piece) in texts.into_iter().enumerate() {
            let id = chunk_id(&doc.doc_id, ordinal);
            let (summary, topics, enrich_warnings) = self.enrich(&piece.text);
            warnings.extend(enrich_warnings.into_iter().map(|w| format!("{id}: {w}")));
            let embedding = self
                .gateway
                .embed(&piece.text, self.config.embedding_dimension)?;
            if embedding.is_zero() {
                skipped += 1;
                warnings.push(format!("{id}: no embeddable terms; chunk not indexed"));
            }
            chunks.push(Chunk {
                chunk_id: id,
                doc_id: doc.doc_id.clone(),
                ordinal,
                text: piece.text,
                summary,
                topics,
                embedding,
                token_count: piece.token_count,
                overlap_tokens: piece.overlap_tokens,
                time_span: piece.time_span,
            });
        }
        let chunk_count = chunks.len();
        collection.replace_document(doc.clone(), chunks)?;
        for w in &warnings {
            tracing::warn!(collection = collection.id(), doc = %doc.doc_id, "{w}");
        }
        Ok(IngestReport {
            doc_id: doc.doc_id.clone(),
            chunk_count,
            skipped_blocks: skipped,
            warnings,
        })
    }
}

/// Result of ingesting one manifest entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentOutcome {
    /// Position in the manifest's document list.
    pub index: usize,
    pub doc_id: Option<String>,
    pub report: Option<IngestReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestOutcome {
    pub collection_id: String,
    pub documents: Vec<DocumentOutcome>,
}

impl ManifestOutcome {
    pub fn failures(&self) -> usize {
        self.documents.iter().filter(|d| d.error.is_some()).count()
    }
}

/// All known collections, optionally persisted under
/// `<data_dir>/collections/<id>/`.
#[derive(Debug, Default)]
pub struct CollectionRegistry {
    data_dir: Option<PathBuf>,
    collections: RwLock<BTreeMap<String, Arc<KnowledgeCollection>>>,
}

impl CollectionRegistry {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens `data_dir`, loading every collection already saved there.
    pub fn open(data_dir: &Path) -> Result<Self, KbError> {
        let root = data_dir.join("collections");
        let mut collections = BTreeMap::new();
        if root.is_dir() {
            let entries = fs::read_dir(&root).map_err(|source| io_err(&root, source))?;
            for entry in entries {
                let entry = entry.map_err(|source| io_err(&root, source))?;
                if entry.path().join("collection.json").is_file() {
                    let c = KnowledgeCollection::load(&entry.path())?;
                    collections.insert(c.id().to_string(), Arc::new(c));
                }
            }
        }
        Ok(Self {
            data_dir: Some(data_dir.to_path_buf()),
            collections: RwLock::new(collections),
        })
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.data_dir.as_deref()
    }

    fn dir_for(&self, id: &str) -> Option<PathBuf> {
        self.data_dir
            .as_ref()
            .map(|d| d.join("collections").join(id))
    }

    /// Creates an empty collection. The id defaults to a slug of the region.
    pub fn build_collection<I, S>(
        &self,
        id: Option<&str>,
        region: &str,
        crops: I,
        dimension: usize,
    ) -> Result<Arc<KnowledgeCollection>, KbError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let id = id.map(str::to_string).unwrap_or_else(|| slug(region));
        let collection = Arc::new(KnowledgeCollection::new(&id, region, crops, dimension)?);
        {
            let mut map = self.collections.write().unwrap_or_else(|e| e.into_inner());
            if map.contains_key(&id) {
                return Err(KbError::Conflict(id));
            }
            map.insert(id.clone(), Arc::clone(&collection));
        }
        if let Some(dir) = self.dir_for(&id) {
            collection.save(&dir)?;
        }
        Ok(collection)
    }

    pub fn get(&self, id: &str) -> Result<Arc<KnowledgeCollection>, KbError> {
        self.collections
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| KbError::NotFound(id.to_string()))
    }

    pub fn ids(&self) -> Vec<String> {
        self.collections
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .keys()
            .cloned()
            .collect()
    }

    /// Ingests into a registered collection and persists it when the registry
    /// is disk-backed.
    pub fn ingest(
        &self,
        ingestor: &Ingestor,
        collection_id: &str,
        doc: &SourceDocument,
    ) -> Result<IngestReport, KbError> {
        let collection = self.get(collection_id)?;
        let report = ingestor.ingest(doc, &collection)?;
        self.save(collection_id)?;
        Ok(report)
    }

    /// Ingests every document of a manifest into `collection_id` (default:
    /// the manifest's), creating the collection first if needed. A failing
    /// document is reported and skipped; the collection is persisted once at
    /// the end.
    pub fn ingest_manifest(
        &self,
        ingestor: &Ingestor,
        manifest: &Manifest,
        collection_id: Option<&str>,
    ) -> Result<ManifestOutcome, KbError> {
        let id = collection_id
            .map(str::to_string)
            .unwrap_or_else(|| manifest.collection_id());
        let collection = match self.get(&id) {
            Ok(c) => c,
            Err(KbError::NotFound(_)) => self.build_collection(
                Some(&id),
                &manifest.region,
                &manifest.crops,
                ingestor.config().embedding_dimension,
            )?,
            Err(e) => return Err(e),
        };
        let mut documents = Vec::new();
        for (index, doc) in manifest.documents() {
            let doc_id = doc.as_ref().ok().map(|d| d.doc_id.clone());
            let result = doc.and_then(|d| ingestor.ingest(&d, &collection));
            documents.push(match result {
                Ok(report) => DocumentOutcome {
                    index,
                    doc_id,
                    report: Some(report),
                    error: None,
                },
                Err(e) => DocumentOutcome {
                    index,
                    doc_id,
                    report: None,
                    error: Some(e.to_string()),
                },
            });
        }
        self.save(&id)?;
        Ok(ManifestOutcome {
            collection_id: id,
            documents,
        })
    }

    pub fn save(&self, collection_id: &str) -> Result<(), KbError> {
        let collection = self.get(collection_id)?;
        if let Some(dir) = self.dir_for(collection_id) {
            collection.save(&dir)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::{ScriptedProvider, TaskKind};

    fn ingestor(cfg: IngestConfig) -> Ingestor {
        let lx = Arc::new(Lexicon::builtin());
        Ingestor::new(Arc::new(ProviderGateway::local(Arc::clone(&lx))), lx, cfg)
    }

    fn kenya() -> KnowledgeCollection {
        KnowledgeCollection::new("kenya", "Kenya", ["coffee", "dairy", "potato"], 256).unwrap()
    }

    #[test]
    fn build_validation_and_conflict() {
        let reg = CollectionRegistry::in_memory();
        let c = reg
            .build_collection(None, "Kenya", ["coffee", "dairy", "potato"], 256)
            .unwrap();
        assert_eq!(c.id(), "kenya");
        assert!(c.doc_ids().is_empty());
        assert!(matches!(
            reg.build_collection(None, "Kenya", ["maize"], 256),
            Err(KbError::Conflict(_))
        ));
        assert!(matches!(
            reg.build_collection(Some("x"), "X", Vec::<String>::new(), 256),
            Err(KbError::Validation(_))
        ));
    }

    #[test]
    fn three_small_paragraphs_make_one_chunk() {
        let c = kenya();
        let doc = SourceDocument::new(
            "coffee-basics",
            DocumentFormat::Prose,
            "Coffee berry borer is a beetle. It bores into berries.\n\nPrune coffee after harvest.\n\nMulch keeps soil moist.",
        );
        let report = ingestor(IngestConfig::default()).ingest(&doc, &c).unwrap();
        assert_eq!(report.chunk_count, 1);
        let snap = c.snapshot();
        let chunk = snap.chunk("coffee-basics#00000").unwrap();
        assert_eq!(chunk.summary, "Coffee berry borer is a beetle.");
        assert!(chunk.topics.contains("pests_diseases"));
        assert!(chunk.topics.contains("pruning"));
    }

    #[test]
    fn reingest_is_idempotent() {
        let c = kenya();
        let text = (0..3)
            .map(|p| (0..40).map(|i| format!("coffee{p}x{i}")).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n\n");
        let doc = SourceDocument::new("d", DocumentFormat::Prose, text);
        let ing = ingestor(IngestConfig {
            budget_tokens: 50,
            overlap_tokens: 5,
            ..IngestConfig::default()
        });
        ing.ingest(&doc, &c).unwrap();
        let before = (c.chunk_count(), c.indexed_count());
        ing.ingest(&doc, &c).unwrap();
        assert_eq!((c.chunk_count(), c.indexed_count()), before);
        assert_eq!(before.0, 3);

        let shorter = SourceDocument::new("d", DocumentFormat::Prose, "coffee only now");
        ing.ingest(&shorter, &c).unwrap();
        assert_eq!(c.chunk_count(), 1);
    }

    #[test]
    fn parse_failure_leaves_collection_untouched() {
        let c = kenya();
        let ing = ingestor(IngestConfig::default());
        ing.ingest(
            &SourceDocument::new("t", DocumentFormat::Table, "a,b\n1,2\n"),
            &c,
        )
        .unwrap();
        let before = c.snapshot();
        let err = ing
            .ingest(&SourceDocument::new("t", DocumentFormat::Table, "a,b\n1,2\n3\n"), &c)
            .unwrap_err();
        assert!(matches!(err, KbError::Parse { line: 3, .. }));
        let after = c.snapshot();
        assert_eq!(before.chunks, after.chunks);
        assert_eq!(before.index, after.index);
    }

    #[test]
    fn enrichment_failure_is_a_warning() {
        let lx = Arc::new(Lexicon::builtin());
        let gateway = ProviderGateway::local(Arc::clone(&lx))
            .with_provider(Arc::new(
                ScriptedProvider::new("flaky")
                    .failing(TaskKind::Summarize)
                    .failing(TaskKind::Tag),
            ))
            .with_route("summarize", "flaky")
            .unwrap()
            .with_route("tag", "flaky")
            .unwrap();
        let ing = Ingestor::new(Arc::new(gateway), lx, IngestConfig::default());
        let c = kenya();
        let report = ing
            .ingest(&SourceDocument::new("d", DocumentFormat::Prose, "Prune coffee."), &c)
            .unwrap();
        assert_eq!(report.chunk_count, 1);
        assert_eq!(report.warnings.len(), 2);
        let snap = c.snapshot();
        let chunk = snap.chunk("d#00000").unwrap();
        assert!(chunk.summary.is_empty() && chunk.topics.is_empty());
    }

    #[test]
    fn termless_chunk_is_kept_but_not_indexed() {
        let c = kenya();
        let report = ingestor(IngestConfig::default())
            .ingest(&SourceDocument::new("d", DocumentFormat::Prose, "... !!!"), &c)
            .unwrap();
        assert_eq!(report.skipped_blocks, 1);
        assert_eq!(c.chunk_count(), 1);
        assert_eq!(c.indexed_count(), 0);
    }

    #[test]
    fn registry_persists_and_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let ing = ingestor(IngestConfig::default());
        {
            let reg = CollectionRegistry::open(dir.path()).unwrap();
            reg.build_collection(Some("kenya"), "Kenya", ["coffee"], 256).unwrap();
            reg.ingest(
                &ing,
                "kenya",
                &SourceDocument::new("d", DocumentFormat::Prose, "Prune coffee after harvest."),
            )
            .unwrap();
        }
        let reg = CollectionRegistry::open(dir.path()).unwrap();
        let c = reg.get("kenya").unwrap();
        assert_eq!(c.chunk_count(), 1);
        let snap = c.snapshot();
        let chunk = snap.chunk("d#00000").unwrap();
        assert_eq!(chunk.embedding.dimension(), 256);
        assert!(matches!(reg.get("nope"), Err(KbError::NotFound(_))));
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Kenya West"), "kenya-west");
        assert_eq!(slug("  Uttar Pradesh! "), "uttar-pradesh");
    }
}

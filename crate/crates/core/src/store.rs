//! Append-only conversation log: user profiles, turns and feedback.
//!
//! On disk the log is newline-delimited JSON, one record per line. Every
//! line carries the schema version `v` and a `type` discriminator:
//!
//! ```text
//! {"v":1,"type":"header","format":"shamba-conversation-log","created_at":"...","from":null,"to":null}
//! {"v":1,"type":"profile","user_id":"u1","role":"farmer",...}
//! {"v":1,"type":"turn","turn_id":"...","session_id":"s1","timestamp":"...","query":{...},"result":{...},"source":"typed"}
//! {"v":1,"type":"feedback","turn_id":"...","thumb":"up","stars":null,...}
//! ```
//!
//! A single mutex serializes appends; readers see every record committed
//! before their call.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::{PipelineResult, UserQuery};
use crate::provider::LanguageTag;

pub const LOG_VERSION: u32 = 1;
pub const LOG_FORMAT: &str = "shamba-conversation-log";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("unknown turn `{0}`")]
    UnknownTurn(String),
    #[error("duplicate turn id `{0}`")]
    DuplicateTurn(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    ExtensionAgent,
    LeadFarmer,
    Farmer,
    Agripreneur,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Female,
    Male,
    Unspecified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub role: Role,
    pub gender: Gender,
    pub language: LanguageTag,
    pub county: String,
    #[serde(default)]
    pub crops: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnSource {
    Typed,
    Voice,
    FollowupClick,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub turn_id: String,
    pub session_id: String,
    pub user_id: String,
    pub timestamp: DateTime<Utc>,
    pub query: UserQuery,
    pub result: PipelineResult,
    pub source: TurnSource,
}

impl Turn {
    /// A turn stamped now with a fresh random id.
    pub fn new(user_id: &str, query: UserQuery, result: PipelineResult, source: TurnSource) -> Self {
        Self {
            turn_id: uuid::Uuid::new_v4().to_string(),
            session_id: query.session_id.clone(),
            user_id: user_id.to_string(),
            timestamp: Utc::now(),
            query,
            result,
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thumb {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueTag {
    Incomplete,
    Irrelevant,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub turn_id: String,
    #[serde(default)]
    pub thumb: Option<Thumb>,
    #[serde(default)]
    pub stars: Option<u8>,
    #[serde(default)]
    pub issue_tags: BTreeSet<IssueTag>,
    #[serde(default)]
    pub freeform: Option<String>,
    pub recorded_at: DateTime<Utc>,
}

impl FeedbackRecord {
    pub fn validate(&self) -> Result<(), StoreError> {
        if self.thumb.is_none() && self.stars.is_none() {
            return Err(StoreError::Validation(
                "feedback needs a thumb or a star rating".into(),
            ));
        }
        if let Some(s) = self.stars {
            if !(1..=5).contains(&s) {
                return Err(StoreError::Validation(format!(
                    "stars must be between 1 and 5, got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// Time window: `from` inclusive, `to` exclusive; either end may be open.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeRange {
    pub from: Option<DateTime<Utc>>,
    pub to: Option<DateTime<Utc>>,
}

impl TimeRange {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.from.map_or(true, |f| t >= f) && self.to.map_or(true, |e| t < e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format: String,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub from: Option<DateTime<Utc>>,
    #[serde(default)]
    pub to: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Header(LogHeader),
    Profile(UserProfile),
    Turn(Box<Turn>),
    Feedback(FeedbackRecord),
}

/// One line of the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub v: u32,
    #[serde(flatten)]
    pub record: LogRecord,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TurnFilter {
    pub user_id: Option<String>,
    pub session_id: Option<String>,
    pub range: TimeRange,
    pub crop: Option<String>,
}

impl TurnFilter {
    pub fn matches(&self, t: &Turn) -> bool {
        self.user_id.as_ref().map_or(true, |u| &t.user_id == u)
            && self.session_id.as_ref().map_or(true, |s| &t.session_id == s)
            && self.range.contains(t.timestamp)
            && self
                .crop
                .as_ref()
                .map_or(true, |c| t.query.selected_crop.as_deref() == Some(c.as_str()))
    }
}

#[derive(Default)]
struct Inner {
    records: Vec<LogRecord>,
    turns: Vec<Turn>,
    turn_pos: HashMap<String, usize>,
    sessions: HashMap<String, Vec<usize>>,
    feedback: HashMap<String, Vec<FeedbackRecord>>,
    profiles: BTreeMap<String, UserProfile>,
    file: Option<File>,
}

impl Inner {
    fn check_turn(&self, turn: &Turn) -> Result<(), StoreError> {
        if self.turn_pos.contains_key(&turn.turn_id) {
            return Err(StoreError::DuplicateTurn(turn.turn_id.clone()));
        }
        if turn.session_id.is_empty() || turn.user_id.is_empty() {
            return Err(StoreError::Validation("turn needs a session and a user".into()));
        }
        if let Some(last) = self.last_timestamp(&turn.session_id) {
            if turn.timestamp < last {
                return Err(StoreError::Validation(format!(
                    "turn {} at {} precedes the previous turn of session {} at {}",
                    turn.turn_id, turn.timestamp, turn.session_id, last
                )));
            }
        }
        Ok(())
    }

    fn last_timestamp(&self, session: &str) -> Option<DateTime<Utc>> {
        self.sessions
            .get(session)
            .and_then(|v| v.last())
            .map(|&i| self.turns[i].timestamp)
    }

    fn check_feedback(&self, fb: &FeedbackRecord) -> Result<(), StoreError> {
        fb.validate()?;
        if !self.turn_pos.contains_key(&fb.turn_id) {
            return Err(StoreError::UnknownTurn(fb.turn_id.clone()));
        }
        Ok(())
    }

    /// Validates and indexes a record; the caller has already persisted it.
    fn apply(&mut self, record: LogRecord) {
        match &record {
            LogRecord::Header(_) => return,
            LogRecord::Profile(p) => {
                self.profiles.insert(p.user_id.clone(), p.clone());
            }
            LogRecord::Turn(t) => {
                let i = self.turns.len();
                self.turn_pos.insert(t.turn_id.clone(), i);
                self.sessions.entry(t.session_id.clone()).or_default().push(i);
                self.turns.push((**t).clone());
            }
            LogRecord::Feedback(f) => {
                self.feedback.entry(f.turn_id.clone()).or_default().push(f.clone());
            }
        }
        self.records.push(record);
    }

    fn check(&self, record: &LogRecord) -> Result<(), StoreError> {
        match record {
            LogRecord::Header(_) => Ok(()),
            LogRecord::Profile(p) if p.user_id.is_empty() => {
                Err(StoreError::Validation("profile needs a user id".into()))
            }
            LogRecord::Profile(_) => Ok(()),
            LogRecord::Turn(t) => self.check_turn(t),
            LogRecord::Feedback(f) => self.check_feedback(f),
        }
    }

    fn persist(&mut self, record: &LogRecord, path: Option<&Path>) -> Result<(), StoreError> {
        if let Some(file) = self.file.as_mut() {
            let mut line = serde_json::to_string(&LogLine {
                v: LOG_VERSION,
                record: record.clone(),
            })
            .map_err(|e| StoreError::Validation(e.to_string()))?;
            line.push('\n');
            file.write_all(line.as_bytes())
                .and_then(|_| file.flush())
                .map_err(|source| StoreError::Io {
                    path: path.map(|p| p.display().to_string()).unwrap_or_default(),
                    source,
                })?;
        }
        Ok(())
    }
}

pub struct ConversationStore {
    path: Option<PathBuf>,
    inner: Mutex<Inner>,
}

impl std::fmt::Debug for ConversationStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConversationStore").field("path", &self.path).finish()
    }
}

impl Default for ConversationStore {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl ConversationStore {
    pub fn in_memory() -> Self {
        Self {
            path: None,
            inner: Mutex::new(Inner::default()),
        }
    }

    /// Opens (or creates) a log file, replaying whatever it already holds.
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let io = |source| StoreError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut inner = Inner::default();
        let existed = path.exists();
        if existed {
            let file = File::open(path).map_err(io)?;
            let log = import_log(BufReader::new(file))?;
            for r in log.records {
                inner.apply(r);
            }
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        inner.file = Some(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(io)?,
        );
        let store = Self {
            path: Some(path.to_path_buf()),
            inner: Mutex::new(inner),
        };
        if !existed {
            let header = LogRecord::Header(LogHeader {
                format: LOG_FORMAT.into(),
                created_at: Utc::now(),
                from: None,
                to: None,
            });
            store.lock().persist(&header, store.path.as_deref())?;
        }
        Ok(store)
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn append(&self, record: LogRecord) -> Result<(), StoreError> {
        let mut inner = self.lock();
        inner.check(&record)?;
        inner.persist(&record, self.path.as_deref())?;
        inner.apply(record);
        Ok(())
    }

    pub fn append_turn(&self, turn: Turn) -> Result<(), StoreError> {
        self.append(LogRecord::Turn(Box::new(turn)))
    }

    /// Appends after moving the timestamp up to the session's latest turn if
    /// the clock went backwards. Returns the stored turn.
    pub fn append_turn_clamped(&self, mut turn: Turn) -> Result<Turn, StoreError> {
        let mut inner = self.lock();
        if let Some(last) = inner.last_timestamp(&turn.session_id) {
            turn.timestamp = turn.timestamp.max(last);
        }
        let record = LogRecord::Turn(Box::new(turn.clone()));
        inner.check(&record)?;
        inner.persist(&record, self.path.as_deref())?;
        inner.apply(record);
        Ok(turn)
    }

    pub fn record_feedback(&self, feedback: FeedbackRecord) -> Result<(), StoreError> {
        self.append(LogRecord::Feedback(feedback))
    }

    pub fn upsert_profile(&self, profile: UserProfile) -> Result<(), StoreError> {
        self.append(LogRecord::Profile(profile))
    }

    /// Appends every non-header record of an imported log, in order.
    pub fn extend(&self, records: Vec<LogRecord>) -> Result<(), StoreError> {
        for r in records {
            if !matches!(r, LogRecord::Header(_)) {
                self.append(r)?;
            }
        }
        Ok(())
    }

    pub fn records(&self) -> Vec<LogRecord> {
        self.lock().records.clone()
    }

    pub fn turn_count(&self) -> usize {
        self.lock().turns.len()
    }

    pub fn turn(&self, turn_id: &str) -> Option<Turn> {
        let inner = self.lock();
        inner.turn_pos.get(turn_id).map(|&i| inner.turns[i].clone())
    }

    pub fn has_session(&self, session_id: &str) -> bool {
        self.lock().sessions.contains_key(session_id)
    }

    /// Turns of one session, oldest first.
    pub fn session_turns(&self, session_id: &str) -> Vec<Turn> {
        let inner = self.lock();
        inner
            .sessions
            .get(session_id)
            .map(|v| v.iter().map(|&i| inner.turns[i].clone()).collect())
            .unwrap_or_default()
    }

    pub fn query_turns(&self, filter: &TurnFilter) -> Vec<Turn> {
        self.lock()
            .turns
            .iter()
            .filter(|t| filter.matches(t))
            .cloned()
            .collect()
    }

    pub fn all_turns(&self) -> Vec<Turn> {
        self.lock().turns.clone()
    }

    /// The most recent feedback for a turn.
    pub fn feedback_for(&self, turn_id: &str) -> Option<FeedbackRecord> {
        self.lock()
            .feedback
            .get(turn_id)
            .and_then(|v| v.last().cloned())
    }

    /// Every feedback record for a turn, oldest first.
    pub fn feedback_history(&self, turn_id: &str) -> Vec<FeedbackRecord> {
        self.lock().feedback.get(turn_id).cloned().unwrap_or_default()
    }

    pub fn profile(&self, user_id: &str) -> Option<UserProfile> {
        self.lock().profiles.get(user_id).cloned()
    }

    /// Turns and thumbs-up pairs suitable as curated question/answer
    /// examples.
    pub fn golden_candidates(&self) -> Vec<Turn> {
        let inner = self.lock();
        inner
            .turns
            .iter()
            .filter(|t| {
                t.result.answered
                    && inner
                        .feedback
                        .get(&t.turn_id)
                        .and_then(|v| v.last())
                        .is_some_and(|f| f.thumb == Some(Thumb::Up))
            })
            .cloned()
            .collect()
    }

    /// Writes a header plus every profile, the turns inside `range`, and the
    /// feedback on those turns, in original order. Returns the number of
    /// records written after the header.
    pub fn export_log<W: Write>(&self, range: TimeRange, out: &mut W) -> Result<usize, StoreError> {
        let inner = self.lock();
        let io = |source| StoreError::Io {
            path: "<export>".into(),
            source,
        };
        let mut kept_turns = BTreeSet::new();
        let mut selected: Vec<&LogRecord> = Vec::new();
        for r in &inner.records {
            let keep = match r {
                LogRecord::Header(_) => false,
                LogRecord::Profile(_) => true,
                LogRecord::Turn(t) => {
                    let keep = range.contains(t.timestamp);
                    if keep {
                        kept_turns.insert(t.turn_id.as_str());
                    }
                    keep
                }
                LogRecord::Feedback(f) => kept_turns.contains(f.turn_id.as_str()),
            };
            if keep {
                selected.push(r);
            }
        }
        let header = LogRecord::Header(LogHeader {
            format: LOG_FORMAT.into(),
            created_at: Utc::now(),
            from: range.from,
            to: range.to,
        });
        for r in std::iter::once(&header).chain(selected.iter().copied()) {
            let line = serde_json::to_string(&LogLine {
                v: LOG_VERSION,
                record: r.clone(),
            })
            .map_err(|e| StoreError::Validation(e.to_string()))?;
            out.write_all(line.as_bytes()).map_err(io)?;
            out.write_all(b"\n").map_err(io)?;
        }
        out.flush().map_err(io)?;
        Ok(selected.len())
    }
}

/// A parsed log: its header (if the first line is one) and the remaining
/// records in order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedLog {
    pub header: Option<LogHeader>,
    pub records: Vec<LogRecord>,
}

impl ImportedLog {
    pub fn turns(&self) -> Vec<Turn> {
        self.records
            .iter()
            .filter_map(|r| match r {
                LogRecord::Turn(t) => Some((**t).clone()),
                _ => None,
            })
            .collect()
    }

    pub fn feedback(&self) -> Vec<FeedbackRecord> {
        self.records
            .iter()
            .filter_map(|r| match r {
                LogRecord::Feedback(f) => Some(f.clone()),
                _ => None,
            })
            .collect()
    }
}

/// Parses a log, checking versions, per-session timestamp order and that
/// every feedback record refers to an earlier turn. Errors name the 1-based
/// line.
pub fn import_log<R: BufRead>(reader: R) -> Result<ImportedLog, StoreError> {
    let mut header = None;
    let mut checker = Inner::default();
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|source| StoreError::Io {
            path: format!("<log line {n}>"),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: LogLine = serde_json::from_str(&line).map_err(|e| StoreError::Malformed {
            line: n,
            message: e.to_string(),
        })?;
        if parsed.v != LOG_VERSION {
            return Err(StoreError::Malformed {
                line: n,
                message: format!("unsupported record version {}", parsed.v),
            });
        }
        if let LogRecord::Header(h) = parsed.record {
            if header.is_some() || !checker.records.is_empty() {
                return Err(StoreError::Malformed {
                    line: n,
                    message: "header must be the first record".into(),
                });
            }
            if h.format != LOG_FORMAT {
                return Err(StoreError::Malformed {
                    line: n,
                    message: format!("unexpected log format `{}`", h.format),
                });
            }
            header = Some(h);
            continue;
        }
        checker.check(&parsed.record).map_err(|e| StoreError::Malformed {
            line: n,
            message: e.to_string(),
        })?;
        checker.apply(parsed.record);
    }
    Ok(ImportedLog {
        header,
        records: checker.records,
    })
}

/// Reads and parses a log file.
pub fn read_log_file(path: &Path) -> Result<ImportedLog, StoreError> {
    let file = File::open(path).map_err(|source| StoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    import_log(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{LatencyBreakdown, Modality, PipelineTrace, Route};
    use chrono::TimeZone;

    fn at(secs: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_700_000_000 + secs, 0).unwrap()
    }

    fn turn(id: &str, session: &str, secs: i64) -> Turn {
        Turn {
            turn_id: id.into(),
            session_id: session.into(),
            user_id: "u1".into(),
            timestamp: at(secs),
            query: UserQuery {
                session_id: session.into(),
                raw_text: "how do I prune coffee".into(),
                language: LanguageTag::english(),
                modality: Modality::Text,
                selected_crop: Some("coffee".into()),
            },
            result: PipelineResult {
                answered: true,
                response_text: "Prune after harvest.".into(),
                citations: vec!["coffee#00000".into()],
                unanswered_category: None,
                followups: vec![],
                latency: LatencyBreakdown {
                    total: 0.1 + 0.2,
                    ..Default::default()
                },
                route: Route::Retrieval,
                trace: PipelineTrace::default(),
            },
            source: TurnSource::Typed,
        }
    }

    fn thumb(turn_id: &str, t: Thumb) -> FeedbackRecord {
        FeedbackRecord {
            turn_id: turn_id.into(),
            thumb: Some(t),
            stars: None,
            issue_tags: BTreeSet::new(),
            freeform: None,
            recorded_at: at(100),
        }
    }

    #[test]
    fn feedback_needs_existing_turn() {
        let s = ConversationStore::in_memory();
        assert!(matches!(
            s.record_feedback(thumb("missing", Thumb::Up)),
            Err(StoreError::UnknownTurn(_))
        ));
    }

    #[test]
    fn duplicate_feedback_latest_wins_and_both_kept() {
        let s = ConversationStore::in_memory();
        s.append_turn(turn("t1", "s1", 0)).unwrap();
        s.record_feedback(thumb("t1", Thumb::Up)).unwrap();
        s.record_feedback(thumb("t1", Thumb::Down)).unwrap();
        assert_eq!(s.feedback_for("t1").unwrap().thumb, Some(Thumb::Down));
        assert_eq!(s.feedback_history("t1").len(), 2);
    }

    #[test]
    fn decreasing_timestamp_rejected() {
        let s = ConversationStore::in_memory();
        s.append_turn(turn("t1", "s1", 10)).unwrap();
        assert!(matches!(
            s.append_turn(turn("t2", "s1", 5)),
            Err(StoreError::Validation(_))
        ));
        s.append_turn(turn("t3", "s2", 5)).unwrap();
        let clamped = s.append_turn_clamped(turn("t4", "s1", 5)).unwrap();
        assert_eq!(clamped.timestamp, at(10));
    }

    #[test]
    fn feedback_validation() {
        let s = ConversationStore::in_memory();
        s.append_turn(turn("t1", "s1", 0)).unwrap();
        let mut fb = thumb("t1", Thumb::Up);
        fb.thumb = None;
        assert!(matches!(s.record_feedback(fb.clone()), Err(StoreError::Validation(_))));
        fb.stars = Some(6);
        assert!(matches!(s.record_feedback(fb.clone()), Err(StoreError::Validation(_))));
        fb.stars = Some(4);
        s.record_feedback(fb).unwrap();
    }

    #[test]
    fn empty_range_exports_only_header() {
        let s = ConversationStore::in_memory();
        s.append_turn(turn("t1", "s1", 0)).unwrap();
        let mut out = Vec::new();
        let n = s
            .export_log(TimeRange { from: Some(at(1000)), to: Some(at(2000)) }, &mut out)
            .unwrap();
        assert_eq!(n, 0);
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains(r#""type":"header""#));
        let log = import_log(text.as_bytes()).unwrap();
        assert!(log.header.is_some() && log.records.is_empty());
    }

    #[test]
    fn malformed_line_is_named() {
        let s = ConversationStore::in_memory();
        s.append_turn(turn("t1", "s1", 0)).unwrap();
        let mut out = Vec::new();
        s.export_log(TimeRange::all(), &mut out).unwrap();
        out.extend_from_slice(b"{not json}\n");
        match import_log(out.as_slice()) {
            Err(StoreError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_feedback_in_file_is_rejected() {
        let line = serde_json::to_string(&LogLine {
            v: 1,
            record: LogRecord::Feedback(thumb("ghost", Thumb::Up)),
        })
        .unwrap();
        assert!(matches!(
            import_log(line.as_bytes()),
            Err(StoreError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn file_store_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log").join("conversations.ndjson");
        {
            let s = ConversationStore::open(&path).unwrap();
            s.append_turn(turn("t1", "s1", 0)).unwrap();
            s.record_feedback(thumb("t1", Thumb::Up)).unwrap();
        }
        let s = ConversationStore::open(&path).unwrap();
        assert_eq!(s.turn_count(), 1);
        assert_eq!(s.feedback_for("t1").unwrap().thumb, Some(Thumb::Up));
        assert_eq!(s.golden_candidates().len(), 1);
        s.append_turn(turn("t2", "s1", 1)).unwrap();
        assert_eq!(read_log_file(&path).unwrap().turns().len(), 2);
    }

    #[test]
    fn filters() {
        let s = ConversationStore::in_memory();
        s.append_turn(turn("t1", "s1", 0)).unwrap();
        s.append_turn(turn("t2", "s2", 50)).unwrap();
        let by_user = TurnFilter { user_id: Some("nobody".into()), ..Default::default() };
        assert!(s.query_turns(&by_user).is_empty());
        let window = TurnFilter {
            range: TimeRange { from: Some(at(10)), to: Some(at(60)) },
            ..Default::default()
        };
        assert_eq!(s.query_turns(&window).len(), 1);
        let crop = TurnFilter { crop: Some("coffee".into()), ..Default::default() };
        assert_eq!(s.query_turns(&crop).len(), 2);
        let other_crop = TurnFilter { crop: Some("dairy".into()), ..Default::default() };
        assert!(s.query_turns(&other_crop).is_empty());
    }
}

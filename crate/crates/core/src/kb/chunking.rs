//! Prose, table and transcript chunkers.
//!
//! Token counts are whitespace-delimited words throughout.

use serde::{Deserialize, Serialize};

use super::KbError;
use crate::text::is_terminator;

/// Text of one chunk before enrichment and embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkText {
    pub text: String,
    pub token_count: usize,
    /// Leading words repeated from the end of the previous chunk.
    pub overlap_tokens: usize,
    pub time_span: Option<TimeSpan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpan {
    pub start_s: f64,
    pub end_s: f64,
}

/// CRLF/CR to LF, trailing whitespace trimmed per line, runs of blank lines
/// collapsed to one.
pub fn normalize_document(text: &str) -> String {
    let unified = text.replace("\r\n", "\n").replace('\r', "\n");
    let mut out = String::with_capacity(unified.len());
    let mut blank_run = 0;
    for line in unified.lines() {
        let line = line.trim_end();
        if line.trim().is_empty() {
            blank_run += 1;
            if blank_run == 1 && !out.is_empty() {
                out.push('\n');
            }
            continue;
        }
        blank_run = 0;
        out.push_str(line);
        out.push('\n');
    }
    out.trim_end().to_string()
}

fn paragraphs(text: &str) -> Vec<Vec<&str>> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        } else {
            current.extend(line.split_whitespace());
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

fn ends_sentence(word: &str) -> bool {
    word.trim_end_matches(['"', '\'', ')', ']', '”', '’'])
        .chars()
        .last()
        .is_some_and(is_terminator)
}

fn sentences<'a>(words: &[&'a str]) -> Vec<Vec<&'a str>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for w in words {
        current.push(*w);
        if ends_sentence(w) {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

struct ProsePacker<'a> {
    budget: usize,
    overlap: usize,
    done: Vec<ChunkText>,
    prefix: Vec<&'a str>,
    /// Paragraph index and words of each segment in the open chunk.
    segments: Vec<(usize, Vec<&'a str>)>,
    len: usize,
}

impl<'a> ProsePacker<'a> {
    fn fits(&self, n: usize) -> bool {
        self.len + n <= self.budget - self.prefix.len()
    }

    fn push(&mut self, para: usize, words: &[&'a str]) {
        match self.segments.last_mut() {
            Some((p, seg)) if *p == para => seg.extend_from_slice(words),
            _ => self.segments.push((para, words.to_vec())),
        }
        self.len += words.len();
    }

    fn flush(&mut self) {
        if self.len == 0 {
            return;
        }
        let mut blocks: Vec<String> = Vec::new();
        if !self.prefix.is_empty() {
            blocks.push(self.prefix.join(" "));
        }
        blocks.extend(self.segments.iter().map(|(_, w)| w.join(" ")));
        let all: Vec<&'a str> = self
            .prefix
            .iter()
            .copied()
            .chain(self.segments.iter().flat_map(|(_, w)| w.iter().copied()))
            .collect();
        self.done.push(ChunkText {
            text: blocks.join("\n\n"),
            token_count: all.len(),
            overlap_tokens: self.prefix.len(),
            time_span: None,
        });
        // Carry the tail forward, starting at the first sentence start inside
        // the window when there is one.
        let start = all.len() - self.overlap.min(all.len());
        let snapped = (start..all.len())
            .find(|&j| j > 0 && all[j - 1].chars().last().is_some_and(is_terminator))
            .unwrap_or(start);
        self.prefix = all[snapped..].to_vec();
        self.segments.clear();
        self.len = 0;
    }

    fn add_paragraph(&mut self, para: usize, words: &[&'a str]) {
        if self.fits(words.len()) {
            self.push(para, words);
            return;
        }
        self.flush();
        if self.fits(words.len()) {
            self.push(para, words);
            return;
        }
        for sentence in sentences(words) {
            if !self.fits(sentence.len()) {
                self.flush();
            }
            if self.fits(sentence.len()) {
                self.push(para, &sentence);
                continue;
            }
            for piece in sentence.chunks(self.budget - self.overlap) {
                if !self.fits(piece.len()) {
                    self.flush();
                }
                self.push(para, piece);
            }
        }
    }
}

/// Paragraph-greedy packing with sentence and hard-split fallback.
///
/// Consecutive blank-line paragraphs are packed into one chunk until the next
/// would exceed `budget_tokens`. A paragraph that cannot fit even a fresh
/// chunk is split at sentence ends, and an overlong sentence is hard-split.
/// Every chunk after the first starts with at most `overlap_tokens` trailing
/// words of its predecessor, trimmed to begin at a sentence start when one
/// falls inside that window; the count is recorded in `overlap_tokens`.
/// Dropping those prefixes and joining the rest reproduces the source words
/// in order.
pub fn chunk_prose(
    text: &str,
    budget_tokens: usize,
    overlap_tokens: usize,
) -> Result<Vec<ChunkText>, KbError> {
    if budget_tokens <= overlap_tokens {
        return Err(KbError::Validation(format!(
            "chunk budget {budget_tokens} must exceed overlap {overlap_tokens}"
        )));
    }
    let normalized = normalize_document(text);
    let paras = paragraphs(&normalized);
    if paras.is_empty() {
        return Err(KbError::Validation("document text is empty".into()));
    }
    let mut packer = ProsePacker {
        budget: budget_tokens,
        overlap: overlap_tokens,
        done: Vec::new(),
        prefix: Vec::new(),
        segments: Vec::new(),
        len: 0,
    };
    for (i, p) in paras.iter().enumerate() {
        packer.add_paragraph(i, p);
    }
    packer.flush();
    Ok(packer.done)
}

/// A delimited table: header plus data rows of equal width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Parses delimited text whose first record is the header. Ragged records are
/// rejected with their 1-based line number.
pub fn parse_table(text: &str, delimiter: u8) -> Result<Table, KbError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| KbError::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push((line, rec.iter().map(str::to_string).collect::<Vec<_>>()));
    }
    let mut iter = records.into_iter();
    let (_, header) = iter
        .next()
        .ok_or_else(|| KbError::Validation("table has no header row".into()))?;
    let mut rows = Vec::new();
    for (line, row) in iter {
        if row.len() != header.len() {
            return Err(KbError::Parse {
                line,
                message: format!(
                    "row has {} fields, header has {}",
                    row.len(),
                    header.len()
                ),
            });
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// `label: value` pairs joined by `; `.
pub fn render_row(header: &[String], row: &[String]) -> String {
    header
        .iter()
        .zip(row)
        .map(|(h, v)| format!("{h}: {v}"))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Packs consecutive rendered rows under the budget; each row lands in
/// exactly one chunk.
pub fn chunk_table(table: &Table, budget_tokens: usize) -> Result<Vec<ChunkText>, KbError> {
    if table.header.is_empty() {
        return Err(KbError::Validation("table header is empty".into()));
    }
    if table.rows.is_empty() {
        return Err(KbError::Validation("table has no data rows".into()));
    }
    let mut out = Vec::new();
    let mut lines: Vec<String> = Vec::new();
    let mut len = 0;
    for (i, row) in table.rows.iter().enumerate() {
        if row.len() != table.header.len() {
            return Err(KbError::Parse {
                line: i + 2,
                message: format!("row has {} fields, header has {}", row.len(), table.header.len()),
            });
        }
        let rendered = render_row(&table.header, row);
        let n = rendered.split_whitespace().count();
        if n > budget_tokens {
            return Err(KbError::Validation(format!(
                "table row {} renders to {n} tokens, over the budget of {budget_tokens}",
                i + 2
            )));
        }
        if len + n > budget_tokens {
            out.push(ChunkText {
                text: lines.join("\n"),
                token_count: len,
                overlap_tokens: 0,
                time_span: None,
            });
            lines.clear();
            len = 0;
        }
        lines.push(rendered);
        len += n;
    }
    out.push(ChunkText {
        text: lines.join("\n"),
        token_count: len,
        overlap_tokens: 0,
        time_span: None,
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cue {
    pub start_s: f64,
    pub end_s: f64,
    pub text: String,
}

/// Parses `start_s<TAB>end_s<TAB>text` lines; blank lines are skipped.
pub fn parse_transcript(text: &str) -> Result<Vec<Cue>, KbError> {
    let mut cues = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let (Some(start), Some(end), Some(body)) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(KbError::Parse {
                line: i + 1,
                message: "expected start<TAB>end<TAB>text".into(),
            });
        };
        let parse = |v: &str| {
            v.trim().parse::<f64>().map_err(|e| KbError::Parse {
                line: i + 1,
                message: format!("bad timestamp `{v}`: {e}"),
            })
        };
        cues.push(Cue {
            start_s: parse(start)?,
            end_s: parse(end)?,
            text: body.trim().to_string(),
        });
    }
    Ok(cues)
}

/// Merges consecutive cues while the merged span stays within `window_s`
/// seconds and the text within `budget_tokens` words.
pub fn chunk_transcript(
    cues: &[Cue],
    window_s: f64,
    budget_tokens: usize,
) -> Result<Vec<ChunkText>, KbError> {
    if !(window_s > 0.0) {
        return Err(KbError::Validation("transcript window must be positive".into()));
    }
    if cues.is_empty() {
        return Err(KbError::Validation("transcript has no cues".into()));
    }
    for (i, cue) in cues.iter().enumerate() {
        if !(cue.start_s >= 0.0 && cue.start_s < cue.end_s) {
            return Err(KbError::Validation(format!(
                "cue {} has an empty or negative span",
                i + 1
            )));
        }
        if i > 0 && cue.start_s < cues[i - 1].end_s {
            return Err(KbError::Validation(format!(
                "cue {} starts before the previous cue ends",
                i + 1
            )));
        }
        let n = cue.text.split_whitespace().count();
        if n > budget_tokens {
            return Err(KbError::Validation(format!(
                "cue {} has {n} tokens, over the budget of {budget_tokens}",
                i + 1
            )));
        }
    }

    let mut out = Vec::new();
    let mut group: Vec<&Cue> = Vec::new();
    let mut len = 0;
    let close = |group: &mut Vec<&Cue>, len: &mut usize, out: &mut Vec<ChunkText>| {
        if let (Some(first), Some(last)) = (group.first(), group.last()) {
            out.push(ChunkText {
                text: group
                    .iter()
                    .map(|c| c.text.as_str())
                    .filter(|t| !t.is_empty())
                    .collect::<Vec<_>>()
                    .join(" "),
                token_count: *len,
                overlap_tokens: 0,
                time_span: Some(TimeSpan {
                    start_s: first.start_s,
                    end_s: last.end_s,
                }),
            });
        }
        group.clear();
        *len = 0;
    };
    for cue in cues {
        let n = cue.text.split_whitespace().count();
        if let Some(first) = group.first() {
            if cue.end_s - first.start_s > window_s || len + n > budget_tokens {
                close(&mut group, &mut len, &mut out);
            }
        }
        group.push(cue);
        len += n;
    }
    close(&mut group, &mut len, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn para(n: usize, tag: &str) -> String {
        (0..n).map(|i| format!("{tag}{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn small_paragraph_is_one_chunk() {
        let chunks = chunk_prose(&para(50, "w"), 512, 32).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_count, 50);
        assert_eq!(chunks[0].overlap_tokens, 0);
    }

    #[test]
    fn three_large_paragraphs_do_not_pair() {
        let text = format!("{}\n\n{}\n\n{}", para(300, "a"), para(300, "b"), para(300, "c"));
        let chunks = chunk_prose(&text, 512, 0).unwrap();
        assert_eq!(chunks.len(), 3);
        assert!(chunks[0].text.starts_with("a0 ") && chunks[0].text.ends_with("a299"));
        assert!(chunks[1].text.starts_with("b0 ") && chunks[1].text.ends_with("b299"));
        assert!(chunks[2].text.starts_with("c0 ") && chunks[2].text.ends_with("c299"));
    }

    #[test]
    fn small_paragraphs_pack_together() {
        let text = format!("{}\n\n{}\n\n{}", para(10, "a"), para(10, "b"), para(10, "c"));
        let chunks = chunk_prose(&text, 25, 0).unwrap();
        assert_eq!(chunks.len(), 2);
        assert_eq!(chunks[0].token_count, 20);
        assert!(chunks[0].text.contains("a9\n\nb0"));
    }

    #[test]
    fn overlap_repeats_tail_of_previous_chunk() {
        let text = format!("{}\n\n{}", para(20, "a"), para(20, "b"));
        let chunks = chunk_prose(&text, 25, 3).unwrap();
        assert_eq!(chunks.len(), 2);
        assert_eq!(chunks[1].overlap_tokens, 3);
        assert!(chunks[1].text.starts_with("a17 a18 a19\n\nb0"));
        assert_eq!(chunks[1].token_count, 23);
    }

    #[test]
    fn overlap_snaps_to_sentence_start() {
        let text = "One two three four five. Six seven eight.\n\nNine ten eleven twelve thirteen.";
        let chunks = chunk_prose(text, 9, 4).unwrap();
        assert_eq!(chunks.len(), 2);
        assert_eq!(chunks[1].overlap_tokens, 3);
        assert!(chunks[1].text.starts_with("Six seven eight.\n\nNine"));
    }

    #[test]
    fn oversized_paragraph_splits_on_sentences() {
        let text = "One two three four. Five six seven eight. Nine ten eleven twelve.";
        let chunks = chunk_prose(text, 8, 0).unwrap();
        let texts: Vec<_> = chunks.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(
            texts,
            vec!["One two three four. Five six seven eight.", "Nine ten eleven twelve."]
        );
    }

    #[test]
    fn overlong_sentence_is_hard_split() {
        let chunks = chunk_prose(&para(25, "w"), 10, 0).unwrap();
        let counts: Vec<_> = chunks.iter().map(|c| c.token_count).collect();
        assert_eq!(counts, vec![10, 10, 5]);
    }

    #[test]
    fn empty_and_bad_budget_rejected() {
        assert!(matches!(chunk_prose("  \n\n ", 10, 0), Err(KbError::Validation(_))));
        assert!(matches!(chunk_prose("x", 4, 4), Err(KbError::Validation(_))));
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_document("a\r\nb\r\n\r\n\r\n\r\nc  "), "a\nb\n\nc");
    }

    #[test]
    fn table_single_row_has_all_labels() {
        let t = parse_table("product,active_ingredient,status\nFuradan,carbofuran,banned\n", b',')
            .unwrap();
        let chunks = chunk_table(&t, 512).unwrap();
        assert_eq!(chunks.len(), 1);
        for label in &t.header {
            assert!(chunks[0].text.contains(&format!("{label}: ")));
        }
        assert!(chunks[0].text.contains("product: Furadan"));
    }

    #[test]
    fn ragged_table_reports_line() {
        let err = parse_table("a,b\n1,2\n3\n", b',').unwrap_err();
        match err {
            KbError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn custom_delimiter() {
        let t = parse_table("a;b\n1;2\n", b';').unwrap();
        assert_eq!(t.rows, vec![vec!["1".to_string(), "2".to_string()]]);
    }

    fn cue(s: f64, e: f64, t: &str) -> Cue {
        Cue { start_s: s, end_s: e, text: t.into() }
    }

    #[test]
    fn transcript_window_merge() {
        let cues = vec![cue(0.0, 10.0, "a"), cue(10.0, 20.0, "b"), cue(20.0, 30.0, "c")];
        let chunks = chunk_transcript(&cues, 25.0, 512).unwrap();
        let spans: Vec<_> = chunks
            .iter()
            .map(|c| c.time_span.map(|s| (s.start_s, s.end_s)).unwrap())
            .collect();
        assert_eq!(spans, vec![(0.0, 20.0), (20.0, 30.0)]);
        assert_eq!(chunks[0].text, "a b");
    }

    #[test]
    fn single_cue_keeps_span() {
        let chunks = chunk_transcript(&[cue(3.5, 9.0, "prune now")], 30.0, 512).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].time_span, Some(TimeSpan { start_s: 3.5, end_s: 9.0 }));
    }

    #[test]
    fn unordered_cues_rejected() {
        let cues = vec![cue(10.0, 20.0, "b"), cue(0.0, 10.0, "a")];
        assert!(matches!(chunk_transcript(&cues, 25.0, 512), Err(KbError::Validation(_))));
        let overlapping = vec![cue(0.0, 10.0, "a"), cue(5.0, 12.0, "b")];
        assert!(chunk_transcript(&overlapping, 25.0, 512).is_err());
    }

    #[test]
    fn transcript_file_parsing() {
        let cues = parse_transcript("0\t4.5\tWelcome to the farm\n\n4.5\t9\tToday we prune\n").unwrap();
        assert_eq!(cues.len(), 2);
        assert_eq!(cues[1].start_s, 4.5);
        let err = parse_transcript("0\t1\tok\nbroken line\n").unwrap_err();
        assert!(matches!(err, KbError::Parse { line: 2, .. }));
    }
}

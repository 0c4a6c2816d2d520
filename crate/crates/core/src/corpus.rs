//! JSON-lines corpora, per-language statistics and report rendering.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::lexer::{self, CharCounts, Language, LexError};

/// Meta key recording the original line-ending style of a normalized document.
pub const LINE_ENDING_KEY: &str = "line_ending";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line_number}: {reason}")]
    Schema { line_number: usize, reason: String },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One source file of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeDocument {
    pub id: String,
    /// Corpus language name; see [`CodeDocument::lang`].
    pub language: String,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Map<String, Value>>,
}

impl CodeDocument {
    pub fn new(id: impl Into<String>, language: Language, content: impl Into<String>) -> Self {
        CodeDocument {
            id: id.into(),
            language: language.as_str().to_string(),
            content: content.into(),
            meta: None,
        }
    }

    pub fn lang(&self) -> Result<Language, LexError> {
        self.language.parse()
    }

    /// Rewrites CRLF content to LF and records the original style in `meta`.
    /// Content with any bare `\n` is left alone.
    pub fn normalize_line_endings(&mut self) {
        if !self.content.contains("\r\n") {
            return;
        }
        let bare = self
            .content
            .match_indices('\n')
            .any(|(i, _)| i == 0 || self.content.as_bytes()[i - 1] != b'\r');
        if bare {
            return;
        }
        self.content = self.content.replace("\r\n", "\n");
        self.meta
            .get_or_insert_with(Map::new)
            .insert(LINE_ENDING_KEY.into(), Value::String("crlf".into()));
    }

    /// Applies the line-ending style recorded by [`normalize_line_endings`] to `text`.
    ///
    /// [`normalize_line_endings`]: CodeDocument::normalize_line_endings
    pub fn restore_line_endings(&self, text: &str) -> String {
        let crlf = self
            .meta
            .as_ref()
            .and_then(|m| m.get(LINE_ENDING_KEY))
            .and_then(Value::as_str)
            == Some("crlf");
        if crlf {
            text.replace('\n', "\r\n")
        } else {
            text.to_string()
        }
    }
}

/// Validates one parsed JSON line against the corpus schema.
pub(crate) fn document_from_value(value: Value, line_number: usize) -> Result<CodeDocument, CorpusError> {
    let schema = |reason: String| CorpusError::Schema { line_number, reason };
    let Value::Object(mut obj) = value else {
        return Err(schema("record is not a JSON object".into()));
    };
    let mut take_string = |key: &str| match obj.remove(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(schema(format!("`{key}` must be a string"))),
        None => Err(schema(format!("missing `{key}`"))),
    };
    let id = take_string("id")?;
    let language = take_string("language")?;
    let content = take_string("content")?;
    if id.is_empty() {
        return Err(schema("`id` is empty".into()));
    }
    let meta = match obj.remove("meta") {
        None | Some(Value::Null) => None,
        Some(Value::Object(m)) => Some(m),
        Some(_) => return Err(schema("`meta` must be an object".into())),
    };
    Ok(CodeDocument {
        id,
        language,
        content,
        meta,
    })
}

/// Streams JSON lines from a reader, yielding one item per non-blank line.
pub struct JsonLines<R> {
    reader: R,
    path: PathBuf,
    line_number: usize,
    buf: String,
}

impl<R: BufRead> JsonLines<R> {
    pub fn new(reader: R, path: impl Into<PathBuf>) -> Self {
        JsonLines {
            reader,
            path: path.into(),
            line_number: 0,
            buf: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for JsonLines<R> {
    /// `(line_number, parsed value)`; line numbers are 1-based.
    type Item = Result<(usize, Value), CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(CorpusError::io(&self.path, e))),
            }
            self.line_number += 1;
            if self.buf.trim().is_empty() {
                continue;
            }
            let line_number = self.line_number;
            return Some(
                serde_json::from_str(&self.buf)
                    .map(|v| (line_number, v))
                    .map_err(|e| CorpusError::Schema {
                        line_number,
                        reason: format!("invalid JSON: {e}"),
                    }),
            );
        }
    }
}

/// Stream of documents in file order. Invalid records come through as
/// [`CorpusError::Schema`] and do not end the stream.
pub struct CorpusReader<R> {
    lines: JsonLines<R>,
    seen: HashSet<String>,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, path: impl Into<PathBuf>) -> Self {
        CorpusReader {
            lines: JsonLines::new(reader, path),
            seen: HashSet::new(),
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<CodeDocument, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line_number, value) = match self.lines.next()? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        let doc = match document_from_value(value, line_number) {
            Ok(doc) => doc,
            Err(e) => return Some(Err(e)),
        };
        if !self.seen.insert(doc.id.clone()) {
            return Some(Err(CorpusError::Schema {
                line_number,
                reason: format!("duplicate id `{}`", doc.id),
            }));
        }
        Some(Ok(doc))
    }
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<CorpusReader<BufReader<File>>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    Ok(CorpusReader::new(BufReader::new(file), path))
}

/// Line-at-a-time JSON writer.
pub struct JsonLinesWriter {
    out: BufWriter<File>,
    path: PathBuf,
    written: usize,
}

impl JsonLinesWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
        Ok(Self::from_file(file, path))
    }

    pub fn append(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let file = File::options()
            .append(true)
            .create(true)
            .open(path)
            .map_err(|e| CorpusError::io(path, e))?;
        Ok(Self::from_file(file, path))
    }

    fn from_file(file: File, path: &Path) -> Self {
        JsonLinesWriter {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
            written: 0,
        }
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> Result<(), CorpusError> {
        // serde_json escapes control characters, so every record is one line
        serde_json::to_writer(&mut self.out, record).map_err(|e| CorpusError::io(&self.path, e.into()))?;
        self.out.write_all(b"\n").map_err(|e| CorpusError::io(&self.path, e))?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<usize, CorpusError> {
        self.out.flush().map_err(|e| CorpusError::io(&self.path, e))?;
        Ok(self.written)
    }
}

pub fn write_corpus<I>(docs: I, path: impl AsRef<Path>) -> Result<usize, CorpusError>
where
    I: IntoIterator<Item = CodeDocument>,
{
    let mut writer = JsonLinesWriter::create(path)?;
    for doc in docs {
        writer.write(&doc)?;
    }
    writer.finish()
}

/// Token counting. Implement this to plug in a model tokenizer.
pub trait Tokenizer: Send + Sync {
    fn count_tokens(&self, text: &str) -> usize;
}

/// Counts whitespace-delimited words.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

impl Tokenizer for WhitespaceTokenizer {
    fn count_tokens(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRow {
    pub comment_chars: u64,
    pub total_chars: u64,
    pub samples: u64,
    pub tokens: u64,
}

impl StatsRow {
    pub fn density(&self) -> f64 {
        CharCounts {
            comment: self.comment_chars,
            total: self.total_chars,
        }
        .density()
    }

    fn add(&mut self, other: &StatsRow) {
        self.comment_chars += other.comment_chars;
        self.total_chars += other.total_chars;
        self.samples += other.samples;
        self.tokens += other.tokens;
    }
}

/// Per-language character and token totals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub rows: BTreeMap<Language, StatsRow>,
}

impl CorpusStats {
    pub fn observe(&mut self, doc: &CodeDocument, tokenizer: &dyn Tokenizer) -> Result<(), LexError> {
        let lang = doc.lang()?;
        let counts = lexer::count_chars(&doc.content, lang.syntax());
        self.rows.entry(lang).or_default().add(&StatsRow {
            comment_chars: counts.comment,
            total_chars: counts.total,
            samples: 1,
            tokens: tokenizer.count_tokens(&doc.content) as u64,
        });
        Ok(())
    }

    /// Combines partial statistics from another worker.
    pub fn merge(&mut self, other: &CorpusStats) {
        for (lang, row) in &other.rows {
            self.rows.entry(*lang).or_default().add(row);
        }
    }

    /// Column sums over every language. Its density is total comment bytes over
    /// total bytes, not a mean of per-language densities.
    pub fn aggregate(&self) -> StatsRow {
        let mut total = StatsRow::default();
        for row in self.rows.values() {
            total.add(row);
        }
        total
    }

    /// Unweighted mean of the per-language densities.
    pub fn macro_density(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.values().map(StatsRow::density).sum::<f64>() / self.rows.len() as f64
    }
}

/// A document left out of the statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedDocument {
    pub id: String,
    pub error: LexError,
}

pub fn corpus_stats<I>(docs: I, tokenizer: &dyn Tokenizer) -> (CorpusStats, Vec<SkippedDocument>)
where
    I: IntoIterator<Item = CodeDocument>,
{
    let mut stats = CorpusStats::default();
    let mut skipped = Vec::new();
    for doc in docs {
        if let Err(error) = stats.observe(&doc, tokenizer) {
            skipped.push(SkippedDocument { id: doc.id, error });
        }
    }
    (stats, skipped)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

const AGGREGATE_LABEL: &str = "aggregate";

pub fn render_report(stats: &CorpusStats, format: ReportFormat) -> String {
    let mut rows: Vec<(&str, StatsRow)> = stats.rows.iter().map(|(l, r)| (l.as_str(), *r)).collect();
    rows.push((AGGREGATE_LABEL, stats.aggregate()));
    match format {
        ReportFormat::Csv => render_csv(&rows),
        ReportFormat::Text => render_text(&rows, stats.macro_density()),
    }
}

fn render_csv(rows: &[(&str, StatsRow)]) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let header = [
        "language",
        "comment_chars",
        "total_chars",
        "density",
        "samples",
        "tokens",
    ];
    // writing to a Vec cannot fail
    writer.write_record(header).expect("in-memory csv");
    for (label, row) in rows {
        writer
            .write_record([
                label.to_string(),
                row.comment_chars.to_string(),
                row.total_chars.to_string(),
                format!("{:.4}", row.density()),
                row.samples.to_string(),
                row.tokens.to_string(),
            ])
            .expect("in-memory csv");
    }
    let bytes = writer.into_inner().expect("in-memory csv");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

fn render_text(rows: &[(&str, StatsRow)], macro_density: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>16} {:>16} {:>8} {:>10} {:>14}",
        "language", "comment chars", "chars", "density", "samples", "tokens"
    );
    for (label, row) in rows {
        if *label == AGGREGATE_LABEL {
            let _ = writeln!(out, "{}", "-".repeat(81));
        }
        let _ = writeln!(
            out,
            "{:<12} {:>16} {:>16} {:>8.4} {:>10} {:>14}",
            label,
            row.comment_chars,
            row.total_chars,
            row.density(),
            row.samples,
            row.tokens
        );
    }
    let _ = writeln!(out, "macro-average density: {macro_density:.4}");
    out
}

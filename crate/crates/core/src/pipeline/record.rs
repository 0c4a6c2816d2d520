use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::TokenSource;
use crate::corpus::{CodeDocument, CorpusError, JsonLines};
use crate::decoder::MarkdownIssue;
use crate::filters::FilterVerdict;
use crate::lexer::CharCounts;

/// Filter verdict of a record, or the reason no verdict could be reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RecordVerdict {
    Pass,
    TooLong,
    ImplicitEot,
    MarkdownReject { reason: MarkdownIssue },
    LengthReject { ratio: f64 },
    Failed { error: String },
}

impl RecordVerdict {
    pub const LABELS: [&'static str; 6] = [
        "pass",
        "too_long",
        "implicit_eot",
        "markdown_reject",
        "length_reject",
        "failed",
    ];

    pub fn label(&self) -> &'static str {
        match self {
            RecordVerdict::Pass => "pass",
            RecordVerdict::TooLong => "too_long",
            RecordVerdict::ImplicitEot => "implicit_eot",
            RecordVerdict::MarkdownReject { .. } => "markdown_reject",
            RecordVerdict::LengthReject { .. } => "length_reject",
            RecordVerdict::Failed { .. } => "failed",
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, RecordVerdict::Pass)
    }
}

impl From<FilterVerdict> for RecordVerdict {
    fn from(v: FilterVerdict) -> Self {
        match v {
            FilterVerdict::Pass => RecordVerdict::Pass,
            FilterVerdict::TooLong => RecordVerdict::TooLong,
            FilterVerdict::ImplicitEot => RecordVerdict::ImplicitEot,
            FilterVerdict::MarkdownReject { reason } => RecordVerdict::MarkdownReject { reason },
            FilterVerdict::LengthReject { ratio } => RecordVerdict::LengthReject { ratio },
        }
    }
}

/// One line of an augmented-records file: the corpus document plus its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedRecord {
    #[serde(flatten)]
    pub doc: CodeDocument,
    #[serde(flatten)]
    pub verdict: RecordVerdict,
    /// Commented body, present for passing records only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated: Option<String>,
    pub density_before: f64,
    pub density_after: f64,
    pub lm_tokens: usize,
    pub copied_tokens: usize,
    pub token_source: TokenSource,
    /// Milliseconds spent on the record. Kept out of the file unless requested,
    /// so identical runs produce identical files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// Reads an augmented-records file.
pub fn read_records(path: impl AsRef<Path>) -> Result<RecordReader<std::io::BufReader<std::fs::File>>, CorpusError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
    Ok(RecordReader {
        lines: JsonLines::new(std::io::BufReader::new(file), path),
    })
}

pub struct RecordReader<R> {
    lines: JsonLines<R>,
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<AugmentedRecord, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line_number, value) = match self.lines.next()? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        Some(serde_json::from_value(value).map_err(|e| CorpusError::Schema {
            line_number,
            reason: e.to_string(),
        }))
    }
}

/// Counts and aggregates of one augmentation run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunSummary {
    /// Documents processed in this run.
    pub input: usize,
    /// Documents skipped because the output already had them.
    pub resumed: usize,
    pub verdicts: BTreeMap<String, usize>,
    pub density_before: f64,
    pub density_after: f64,
    pub lm_tokens: usize,
    pub copied_tokens: usize,
    #[serde(skip)]
    pub(crate) chars_before: CharCounts,
    #[serde(skip)]
    pub(crate) chars_after: CharCounts,
}

impl RunSummary {
    pub fn new() -> Self {
        let verdicts = RecordVerdict::LABELS.iter().map(|l| (l.to_string(), 0)).collect();
        RunSummary {
            verdicts,
            ..Default::default()
        }
    }

    pub(crate) fn observe(&mut self, record: &AugmentedRecord, before: CharCounts, after: CharCounts) {
        self.input += 1;
        *self.verdicts.entry(record.verdict.label().to_string()).or_default() += 1;
        self.lm_tokens += record.lm_tokens;
        self.copied_tokens += record.copied_tokens;
        self.chars_before.comment += before.comment;
        self.chars_before.total += before.total;
        self.chars_after.comment += after.comment;
        self.chars_after.total += after.total;
        self.density_before = self.chars_before.density();
        self.density_after = self.chars_after.density();
    }

    pub fn count(&self, label: &str) -> usize {
        self.verdicts.get(label).copied().unwrap_or(0)
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "documents:      {}", self.input)?;
        if self.resumed > 0 {
            writeln!(f, "resumed:        {}", self.resumed)?;
        }
        for (label, n) in &self.verdicts {
            writeln!(f, "  {label:<16}{n}")?;
        }
        writeln!(f, "density before: {:.4}", self.density_before)?;
        writeln!(f, "density after:  {:.4}", self.density_after)?;
        writeln!(f, "lm tokens:      {}", self.lm_tokens)?;
        write!(f, "copied tokens:  {}", self.copied_tokens)
    }
}

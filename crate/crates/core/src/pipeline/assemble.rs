use std::path::Path;

use serde::{Deserialize, Serialize};

use super::record::{read_records, AugmentedRecord};
use super::PipelineError;
use crate::corpus::{read_corpus, CodeDocument, JsonLinesWriter};
use crate::lexer::strip_comments;

/// Which training set to build from augmented records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetVariant {
    /// Commented bodies of passing records; the rest is dropped.
    Remove,
    /// Commented bodies of passing records, originals for the rest.
    Restore,
    /// Every original with all comments stripped.
    Absent,
    /// Every original unchanged.
    PassThrough,
    /// Originals of passing records only.
    OriginalRemove,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AssembleCounts {
    pub written: usize,
    pub substituted: usize,
    pub dropped: usize,
}

/// Content the variant keeps for `record`, with its original line endings.
/// `None` means the record is dropped; the flag marks an original standing in
/// for a rejected record.
pub fn select(record: &AugmentedRecord, variant: DatasetVariant) -> Option<(String, bool)> {
    let doc = &record.doc;
    let pass = record.verdict.is_pass();
    let generated = || record.generated.clone().unwrap_or_default();
    let content = match variant {
        DatasetVariant::Remove if pass => generated(),
        DatasetVariant::Remove => return None,
        DatasetVariant::Restore if pass => generated(),
        DatasetVariant::Restore => return Some((doc.restore_line_endings(&doc.content), true)),
        DatasetVariant::Absent => stripped(doc),
        DatasetVariant::PassThrough => doc.content.clone(),
        DatasetVariant::OriginalRemove if pass => doc.content.clone(),
        DatasetVariant::OriginalRemove => return None,
    };
    Some((doc.restore_line_endings(&content), false))
}

/// Comments removed; text in a language the lexer does not know is kept as is.
fn stripped(doc: &CodeDocument) -> String {
    match doc.lang() {
        Ok(lang) => strip_comments(&doc.content, lang.syntax()),
        Err(_) => doc.content.clone(),
    }
}

fn output_doc(doc: &CodeDocument, content: String) -> CodeDocument {
    CodeDocument {
        id: doc.id.clone(),
        language: doc.language.clone(),
        content,
        meta: doc.meta.clone(),
    }
}

/// Writes the chosen variant of a records file as a corpus.
pub fn assemble(records: &Path, variant: DatasetVariant, out: &Path) -> Result<AssembleCounts, PipelineError> {
    let mut writer = JsonLinesWriter::create(out)?;
    let mut counts = AssembleCounts::default();
    for record in read_records(records)? {
        let record = record?;
        match select(&record, variant) {
            Some((content, substituted)) => {
                writer.write(&output_doc(&record.doc, content))?;
                counts.written += 1;
                counts.substituted += usize::from(substituted);
            }
            None => counts.dropped += 1,
        }
    }
    writer.finish()?;
    Ok(counts)
}

/// Strips every comment from a corpus file.
pub fn strip_corpus(input: &Path, out: &Path) -> Result<AssembleCounts, PipelineError> {
    let mut writer = JsonLinesWriter::create(out)?;
    let mut counts = AssembleCounts::default();
    for doc in read_corpus(input)? {
        let mut doc: CodeDocument = doc?;
        doc.normalize_line_endings();
        let content = doc.restore_line_endings(&stripped(&doc));
        writer.write(&output_doc(&doc, content))?;
        counts.written += 1;
    }
    writer.finish()?;
    Ok(counts)
}

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;
use std::thread;
use std::time::Instant;

use crossbeam_channel::bounded;

use super::record::{AugmentedRecord, RecordVerdict, RunSummary};
use super::PipelineError;
use crate::backend::{Backend, TokenSource};
use crate::corpus::{read_corpus, CodeDocument, CorpusError, JsonLines, JsonLinesWriter, Tokenizer};
use crate::decoder::{constrained_generate, DecoderConfig};
use crate::filters::{apply_all, prefilter_length, FilterVerdict, LengthLimits};
use crate::lexer::{count_chars, CharCounts};

/// Everything needed to turn one document into one record.
#[derive(Clone)]
pub struct Augmenter {
    pub backend: Arc<dyn Backend>,
    pub tokenizer: Arc<dyn Tokenizer>,
    pub decoder: DecoderConfig,
    pub limits: LengthLimits,
    pub record_timing: bool,
}

pub(crate) struct Processed {
    record: AugmentedRecord,
    before: CharCounts,
    after: CharCounts,
}

impl Augmenter {
    pub fn new(backend: Arc<dyn Backend>, tokenizer: Arc<dyn Tokenizer>) -> Self {
        Augmenter {
            backend,
            tokenizer,
            decoder: DecoderConfig::default(),
            limits: LengthLimits::default(),
            record_timing: false,
        }
    }

    pub fn augment(&self, doc: CodeDocument) -> AugmentedRecord {
        self.process(doc).record
    }

    fn process(&self, mut doc: CodeDocument) -> Processed {
        let started = Instant::now();
        doc.normalize_line_endings();
        let mut record = AugmentedRecord {
            doc,
            verdict: RecordVerdict::Pass,
            generated: None,
            density_before: 0.0,
            density_after: 0.0,
            lm_tokens: 0,
            copied_tokens: 0,
            token_source: TokenSource::Reported,
            wall_time_ms: None,
        };
        let (before, after) = self.fill(&mut record);
        record.density_before = before.density();
        record.density_after = after.density();
        if self.record_timing {
            record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
        }
        Processed { record, before, after }
    }

    fn fill(&self, record: &mut AugmentedRecord) -> (CharCounts, CharCounts) {
        let doc = &record.doc;
        let lang = match doc.lang() {
            Ok(l) => l,
            Err(e) => {
                record.verdict = RecordVerdict::Failed { error: e.to_string() };
                return (CharCounts::default(), CharCounts::default());
            }
        };
        let before = count_chars(&doc.content, lang.syntax());
        let tokenizer = self.tokenizer.as_ref();
        if prefilter_length(doc, tokenizer, &self.limits) == Ok(FilterVerdict::TooLong) {
            record.verdict = RecordVerdict::TooLong;
            return (before, before);
        }
        let result = match constrained_generate(doc, self.backend.as_ref(), tokenizer, &self.decoder) {
            Ok(r) => r,
            Err(e) => {
                record.verdict = RecordVerdict::Failed { error: e.to_string() };
                return (before, before);
            }
        };
        record.lm_tokens = result.lm_tokens;
        record.copied_tokens = result.copied_tokens;
        record.token_source = result.token_source;
        record.verdict = match apply_all(doc, &result, tokenizer, &self.limits) {
            Ok(v) => v.into(),
            Err(e) => RecordVerdict::Failed { error: e.to_string() },
        };
        if !record.verdict.is_pass() {
            return (before, before);
        }
        let after = count_chars(&result.body, lang.syntax());
        record.generated = Some(result.body);
        (before, after)
    }

    /// Processes `docs` on `workers` threads and hands records to `sink` in input order.
    pub fn run<I, F>(&self, docs: I, workers: usize, mut sink: F) -> Result<RunSummary, PipelineError>
    where
        I: IntoIterator<Item = Result<CodeDocument, CorpusError>>,
        I::IntoIter: Send,
        F: FnMut(&AugmentedRecord) -> Result<(), PipelineError>,
    {
        let workers = workers.max(1);
        let mut summary = RunSummary::new();
        let docs = docs.into_iter();
        thread::scope(|scope| {
            let (job_tx, job_rx) = bounded::<(usize, CodeDocument)>(workers * 2);
            let (done_tx, done_rx) = bounded::<(usize, Processed)>(workers * 2);
            for _ in 0..workers {
                let jobs = job_rx.clone();
                let done = done_tx.clone();
                scope.spawn(move || {
                    for (index, doc) in jobs {
                        if done.send((index, self.process(doc))).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(job_rx);
            drop(done_tx);
            let feeder = scope.spawn(move || -> Result<(), CorpusError> {
                for (index, doc) in docs.enumerate() {
                    if job_tx.send((index, doc?)).is_err() {
                        break;
                    }
                }
                Ok(())
            });

            let mut pending = BTreeMap::new();
            let mut next = 0;
            for (index, processed) in done_rx {
                pending.insert(index, processed);
                while let Some(p) = pending.remove(&next) {
                    summary.observe(&p.record, p.before, p.after);
                    sink(&p.record)?;
                    next += 1;
                }
            }
            feeder.join().expect("corpus reader panicked")?;
            Ok::<(), PipelineError>(())
        })?;
        Ok(summary)
    }
}

/// Ids already present in a records file. A torn last line is cut off so the
/// file can be appended to.
fn completed_ids(path: &Path) -> Result<HashSet<String>, PipelineError> {
    let bytes = fs::read(path).map_err(|e| CorpusError::io(path, e))?;
    if !bytes.is_empty() && !bytes.ends_with(b"\n") {
        let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let file = File::options()
            .write(true)
            .open(path)
            .map_err(|e| CorpusError::io(path, e))?;
        file.set_len(keep as u64).map_err(|e| CorpusError::io(path, e))?;
    }
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut ids = HashSet::new();
    for item in JsonLines::new(BufReader::new(file), path) {
        let (line_number, value) = item?;
        match value.get("id").and_then(|v| v.as_str()) {
            Some(id) => ids.insert(id.to_string()),
            None => {
                return Err(CorpusError::Schema {
                    line_number,
                    reason: "record without an `id`".into(),
                }
                .into())
            }
        };
    }
    Ok(ids)
}

/// Augments the corpus at `input` into a records file at `output`.
pub fn augment_corpus(
    input: &Path,
    output: &Path,
    augmenter: &Augmenter,
    workers: usize,
    resume: bool,
) -> Result<RunSummary, PipelineError> {
    let done = if resume && output.exists() {
        completed_ids(output)?
    } else {
        HashSet::new()
    };
    let mut writer = if resume {
        JsonLinesWriter::append(output)?
    } else {
        JsonLinesWriter::create(output)?
    };
    let mut resumed = 0;
    let docs = read_corpus(input)?.filter(|d| match d {
        Ok(doc) if done.contains(&doc.id) => {
            resumed += 1;
            false
        }
        _ => true,
    });
    let mut summary = augmenter.run(docs, workers, |record| Ok(writer.write(record)?))?;
    writer.finish()?;
    summary.resumed = resumed;
    Ok(summary)
}

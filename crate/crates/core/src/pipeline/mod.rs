//! Corpus-level augmentation, dataset assembly and benchmarking.

mod assemble;
mod augment;
pub mod bench;
mod record;

use thiserror::Error;

use crate::backend::BackendError;
use crate::corpus::CorpusError;
use crate::lexer::LexError;

pub use assemble::{assemble, select, strip_corpus, AssembleCounts, DatasetVariant};
pub use augment::{augment_corpus, Augmenter};
pub use bench::{bench_speedup, BenchGrid, BenchReport, LatencyModel};
pub use record::{read_records, AugmentedRecord, RecordReader, RecordVerdict, RunSummary};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Lex(#[from] LexError),
}

//! Simulated-latency comparison of constrained and unconstrained generation.
//!
//! Both engines run against the same deterministic backend; only the amount of
//! work differs. Work is turned into time with a simple serving model: each
//! request pays a fixed overhead, each decoded token pays a step cost shared by
//! the sequences decoded together plus a per-sequence floor, and each context
//! token pays a prefill cost.

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::backend::{Backend, CompletionRequest};
use crate::corpus::{CodeDocument, Tokenizer};
use crate::decoder::prompt::engine_context;
use crate::decoder::{build_prompt, constrained_generate, DecoderConfig};
use crate::lexer::Language;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatencyModel {
    pub request_ms: f64,
    /// Cost of one decode step, split across concurrently decoded sequences.
    pub step_ms: f64,
    /// Per-token cost that concurrency does not amortize.
    pub token_ms: f64,
    pub prefill_ms: f64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel {
            request_ms: 2.0,
            step_ms: 20.0,
            token_ms: 0.5,
            prefill_ms: 0.25,
        }
    }
}

impl LatencyModel {
    pub fn decode_ms(&self, concurrency: usize) -> f64 {
        self.step_ms / concurrency.max(1) as f64 + self.token_ms
    }

    pub fn time_ms(&self, work: &Work, concurrency: usize) -> f64 {
        work.calls as f64 * self.request_ms
            + work.decoded as f64 * self.decode_ms(concurrency)
            + work.prefill as f64 * self.prefill_ms
    }
}

/// Backend work done for a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Work {
    pub calls: usize,
    pub decoded: usize,
    pub prefill: usize,
}

impl std::ops::AddAssign for Work {
    fn add_assign(&mut self, o: Work) {
        self.calls += o.calls;
        self.decoded += o.decoded;
        self.prefill += o.prefill;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchGrid {
    pub instance_nums: Vec<usize>,
    pub batch_sizes: Vec<usize>,
}

impl Default for BenchGrid {
    fn default() -> Self {
        let powers: Vec<usize> = (0..8).map(|k| 1 << k).collect();
        BenchGrid {
            instance_nums: powers.clone(),
            batch_sizes: powers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub grid: BenchGrid,
    pub model: LatencyModel,
    pub constrained: Work,
    pub baseline: Work,
    /// Speedups, one row per instance count, one column per batch size.
    pub cells: Vec<Vec<f64>>,
}

impl BenchReport {
    pub fn speedup(&self, concurrency: usize) -> f64 {
        self.model.time_ms(&self.baseline, concurrency) / self.model.time_ms(&self.constrained, concurrency)
    }

    pub fn to_csv(&self) -> String {
        let mut out = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["instances".to_string()];
        header.extend(self.grid.batch_sizes.iter().map(|b| b.to_string()));
        out.write_record(&header).expect("in-memory write");
        for (instances, row) in self.grid.instance_nums.iter().zip(&self.cells) {
            let mut line = vec![instances.to_string()];
            line.extend(row.iter().map(|s| format!("{s:.2}")));
            out.write_record(&line).expect("in-memory write");
        }
        String::from_utf8(out.into_inner().expect("in-memory flush")).expect("ascii csv")
    }
}

/// Work of constrained generation and of a one-shot baseline over `docs`.
pub fn measure_work(
    docs: &[CodeDocument],
    backend: &dyn Backend,
    tokenizer: &dyn Tokenizer,
    decoder: &DecoderConfig,
) -> Result<(Work, Work), PipelineError> {
    let mut constrained = Work::default();
    let mut baseline = Work::default();
    for doc in docs {
        let result = constrained_generate(doc, backend, tokenizer, decoder)?;
        constrained += Work {
            calls: result.backend_calls,
            decoded: result.lm_tokens,
            prefill: result.prefill_tokens,
        };
        let lang = doc.lang()?;
        let prompt = build_prompt(doc)?;
        let request = CompletionRequest {
            prompt: engine_context(&prompt, lang, ""),
            stop: vec!["```".to_string()],
            max_tokens: 1 << 24,
            temperature: decoder.temperature,
        };
        let resp = backend.complete(&request)?;
        baseline += Work {
            calls: 1,
            decoded: resp.tokens_generated,
            prefill: tokenizer.count_tokens(&prompt),
        };
    }
    Ok((constrained, baseline))
}

pub fn bench_speedup(
    docs: &[CodeDocument],
    backend: &dyn Backend,
    tokenizer: &dyn Tokenizer,
    decoder: &DecoderConfig,
    grid: &BenchGrid,
    model: &LatencyModel,
) -> Result<BenchReport, PipelineError> {
    let (constrained, baseline) = measure_work(docs, backend, tokenizer, decoder)?;
    let mut report = BenchReport {
        grid: grid.clone(),
        model: *model,
        constrained,
        baseline,
        cells: Vec::new(),
    };
    report.cells = grid
        .instance_nums
        .iter()
        .map(|&i| grid.batch_sizes.iter().map(|&b| report.speedup(i * b)).collect())
        .collect();
    Ok(report)
}

/// Code line of the synthetic corpus: eight tokens.
pub const SYNTHETIC_CODE: &str = "x = min ( a , b )";
/// Comment the synthetic script places before every line: two tokens.
pub const SYNTHETIC_COMMENT: &str = "# note";

/// Python documents of `lines` identical code lines each, for use with a mock
/// that comments every line with [`SYNTHETIC_COMMENT`]. Code is 80% of the tokens
/// of the commented output.
pub fn synthetic_corpus(docs: usize, lines: usize) -> Vec<CodeDocument> {
    (0..docs)
        .map(|i| {
            let content = format!("{SYNTHETIC_CODE}\n").repeat(lines);
            CodeDocument::new(format!("bench-{i:04}"), Language::Python, content)
        })
        .collect()
}

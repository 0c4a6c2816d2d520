//! Command-line front end.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{ColorChoice, Parser, Subcommand};
use serde::Deserialize;

use crate::backend::{BackendConfig, BackendKind};
use crate::corpus::{corpus_stats, read_corpus, ReportFormat, Tokenizer, WhitespaceTokenizer};
use crate::decoder::DecoderConfig;
use crate::filters::LengthLimits;
use crate::pipeline::{
    assemble, augment_corpus, bench::synthetic_corpus, bench::SYNTHETIC_COMMENT, bench_speedup, read_records,
    strip_corpus, Augmenter, BenchGrid, DatasetVariant, LatencyModel,
};

#[derive(Debug, Parser)]
#[command(name = "codealign", version, about = "Comment augmentation for code corpora")]
struct Cli {
    /// TOML run file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-language comment density and size.
    Stats {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Remove every comment from a corpus.
    Strip {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Generate comments for a corpus and record filter verdicts.
    Augment(AugmentArgs),
    /// Build a dataset variant from augmented records.
    Assemble {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_enum)]
        variant: DatasetVariant,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Simulated speedup of constrained over unconstrained generation.
    Bench(BenchArgs),
    /// Check a corpus or records file against its schema.
    Validate {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Validate an augmented-records file instead of a corpus.
        #[arg(long)]
        records: bool,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Debug, clap::Args)]
struct BackendArgs {
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    /// Mock behavior script (JSON rules).
    #[arg(long, value_name = "FILE")]
    script: Option<PathBuf>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long, value_name = "VAR")]
    api_key_env: Option<String>,
    #[arg(long)]
    max_retries: Option<u32>,
    #[arg(long, value_name = "SECS")]
    timeout: Option<f64>,
    #[arg(long)]
    probe_len: Option<usize>,
    #[arg(long)]
    segment_budget: Option<usize>,
    #[arg(long)]
    temperature: Option<f64>,
}

#[derive(Debug, clap::Args)]
struct AugmentArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    /// Skip documents whose ids are already in the output file.
    #[arg(long)]
    resume: bool,
    /// Store per-record wall time in the output.
    #[arg(long)]
    record_timing: bool,
    #[arg(long)]
    max_context: Option<usize>,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Debug, clap::Args)]
struct BenchArgs {
    /// Corpus to run; without it a synthetic corpus is used.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    /// Documents in the synthetic corpus.
    #[arg(long, default_value_t = 20)]
    synthetic: usize,
    #[arg(long, value_delimiter = ',')]
    instances: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    batch_sizes: Option<Vec<usize>>,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(flatten)]
    backend: BackendArgs,
}

/// Declarative run file mirroring the command-line flags.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    workers: Option<usize>,
    resume: bool,
    record_timing: bool,
    backend: BackendConfig,
    decoder: DecoderConfig,
    limits: LengthLimits,
    bench: BenchGrid,
    latency: LatencyModel,
}

impl RunConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    fn apply(&mut self, args: &BackendArgs) {
        let b = &mut self.backend;
        if let Some(kind) = args.backend {
            b.kind = kind;
        }
        if args.script.is_some() {
            b.script = args.script.clone();
        }
        if args.endpoint.is_some() {
            b.endpoint = args.endpoint.clone();
        }
        if args.model.is_some() {
            b.model = args.model.clone();
        }
        if args.api_key_env.is_some() {
            b.api_key_env = args.api_key_env.clone();
        }
        if let Some(n) = args.max_retries {
            b.max_retries = n;
        }
        if let Some(t) = args.timeout {
            b.timeout_secs = t;
        }
        let d = &mut self.decoder;
        if let Some(n) = args.probe_len {
            d.probe_len = n;
        }
        if let Some(n) = args.segment_budget {
            d.segment_budget = n;
        }
        if let Some(t) = args.temperature {
            d.temperature = t;
        }
    }

    fn check(&self) -> Result<()> {
        if self.decoder.probe_len == 0 || self.decoder.segment_budget == 0 {
            bail!("probe_len and segment_budget must be at least 1");
        }
        if self.limits.max_context == 0 {
            bail!("max_context must be at least 1");
        }
        if !(0.0..1.0).contains(&self.limits.headroom) {
            bail!("headroom must be in [0, 1)");
        }
        Ok(())
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let color = if std::env::var_os("NO_COLOR").is_some() {
        ColorChoice::Never
    } else {
        ColorChoice::Auto
    };
    let cli = match <Cli as clap::CommandFactory>::command()
        .color(color)
        .try_get_matches_from(argv)
        .and_then(|m| <Cli as clap::FromArgMatches>::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    let tokenizer: Arc<dyn Tokenizer> = Arc::new(WhitespaceTokenizer);
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Stats { input, format } => {
            let docs = read_corpus(&input)?.collect::<Result<Vec<_>, _>>()?;
            let (stats, skipped) = corpus_stats(docs, tokenizer.as_ref());
            for s in &skipped {
                eprintln!("skipped {}: {}", s.id, s.error);
            }
            let format = match format {
                Format::Text => ReportFormat::Text,
                Format::Csv => ReportFormat::Csv,
            };
            write!(out, "{}", crate::corpus::render_report(&stats, format))?;
        }
        Command::Strip { input, out: path } => {
            let counts = strip_corpus(&input, &path)?;
            writeln!(out, "written: {}", counts.written)?;
        }
        Command::Augment(args) => {
            config.apply(&args.backend);
            if let Some(n) = args.max_context {
                config.limits.max_context = n;
            }
            config.check()?;
            let workers = args.workers.or(config.workers).unwrap_or(1);
            let backend = config.backend.build(tokenizer.clone())?;
            let mut augmenter = Augmenter::new(backend, tokenizer);
            augmenter.decoder = config.decoder;
            augmenter.limits = config.limits;
            augmenter.record_timing = args.record_timing || config.record_timing;
            let resume = args.resume || config.resume;
            let summary = augment_corpus(&args.input, &args.out, &augmenter, workers, resume)?;
            writeln!(out, "{summary}")?;
        }
        Command::Assemble {
            input,
            variant,
            out: path,
        } => {
            let c = assemble(&input, variant, &path)?;
            writeln!(
                out,
                "written: {}\nsubstituted: {}\ndropped: {}",
                c.written, c.substituted, c.dropped
            )?;
        }
        Command::Bench(args) => {
            config.apply(&args.backend);
            config.check()?;
            let mut grid = config.bench.clone();
            if let Some(i) = args.instances {
                grid.instance_nums = i;
            }
            if let Some(b) = args.batch_sizes {
                grid.batch_sizes = b;
            }
            if grid.instance_nums.contains(&0) || grid.batch_sizes.contains(&0) {
                bail!("grid values must be at least 1");
            }
            let docs = match &args.input {
                Some(path) => read_corpus(path)?.collect::<Result<Vec<_>, _>>()?,
                None => synthetic_corpus(args.synthetic, 20),
            };
            let backend: Arc<dyn crate::backend::Backend> = match (&args.input, &config.backend.script) {
                (None, None) if config.backend.kind == BackendKind::Mock => {
                    Arc::new(crate::backend::mock::mock_script(&[crate::backend::MockRule::any(
                        crate::backend::MockAction::Comment(SYNTHETIC_COMMENT.into()),
                    )])?)
                }
                _ => config.backend.build(tokenizer.clone())?,
            };
            let report = bench_speedup(
                &docs,
                backend.as_ref(),
                tokenizer.as_ref(),
                &config.decoder,
                &grid,
                &config.latency,
            )?;
            let csv = report.to_csv();
            match &args.out {
                Some(path) => fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
                None => write!(out, "{csv}")?,
            }
        }
        Command::Validate { input, records } => {
            let mut count = 0;
            let mut errors = 0;
            if records {
                for r in read_records(&input)? {
                    match r {
                        Ok(_) => count += 1,
                        Err(e) => {
                            errors += 1;
                            eprintln!("{e}");
                        }
                    }
                }
            } else {
                for d in read_corpus(&input)? {
                    match d {
                        Ok(doc) => {
                            count += 1;
                            if let Err(e) = doc.lang() {
                                eprintln!("{}: {e}", doc.id);
                            }
                        }
                        Err(e) => {
                            errors += 1;
                            eprintln!("{e}");
                        }
                    }
                }
            }
            writeln!(out, "valid: {count}\ninvalid: {errors}")?;
            if errors > 0 {
                bail!("{errors} invalid line(s) in {}", input.display());
            }
        }
    }
    Ok(())
}

//! Constrained comment generation.
//!
//! The decoder walks the original lines of a document. Before each line it asks
//! the backend for a short probe and classifies it. A comment probe is extended to
//! a whole comment segment and kept; anything else is thrown away and the original
//! line is copied verbatim. Comments are only inserted where the lexer is in plain
//! code at a line start, so inserted segments cannot change how the original text
//! lexes.

pub mod prompt;

use serde::{Deserialize, Serialize};

use crate::backend::{Backend, BackendError, CompletionRequest, Finish, TokenSource};
use crate::corpus::{CodeDocument, Tokenizer};
use crate::lexer::{classify_prefix, line_start_states, scan, CommentSyntax, Language, LexError, PrefixClass};

pub use prompt::{build_prompt, parse_output, render_output, MalformedMarkdown, MarkdownIssue, EOT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderConfig {
    /// Max backend tokens in one comment segment.
    pub segment_budget: usize,
    /// Tokens requested to classify a line start.
    pub probe_len: usize,
    pub temperature: f64,
    /// Comment segments allowed back to back before the next line is forced.
    pub max_segments_per_gap: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            segment_budget: 512,
            probe_len: 8,
            temperature: 0.0,
            max_segments_per_gap: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenerationStatus {
    Completed,
    ImplicitEot,
    SegmentBudgetExceeded,
    BackendFailed { error: BackendError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineOrigin {
    Copied,
    Generated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationResult {
    pub status: GenerationStatus,
    /// Model-format answer, fences included.
    pub output: String,
    pub body: String,
    /// One entry per line of `body`.
    pub line_origins: Vec<LineOrigin>,
    pub lm_tokens: usize,
    pub copied_tokens: usize,
    pub token_source: TokenSource,
    pub backend_calls: usize,
    /// Context tokens the backend had to ingest: the prompt plus copied lines.
    pub prefill_tokens: usize,
}

/// Lines of a document and whether it ends with a newline. Empty text has no lines.
pub fn split_code_lines(content: &str) -> (Vec<&str>, bool) {
    if content.is_empty() {
        return (Vec::new(), false);
    }
    let trailing = content.ends_with('\n');
    let text = if trailing {
        &content[..content.len() - 1]
    } else {
        content
    };
    (text.split('\n').collect(), trailing)
}

/// Whether a comment may be inserted before line `j`, for `j` in `0..=n`.
/// Lines after a backslash continuation are excluded as well.
fn insertion_points(content: &str, lines: &[&str], syntax: &CommentSyntax) -> Vec<bool> {
    let mut points = if content.is_empty() || content.ends_with('\n') {
        line_start_states(content, syntax)
    } else {
        line_start_states(&format!("{content}\n"), syntax)
    };
    for (j, line) in lines.iter().enumerate() {
        if line.trim_end_matches('\r').ends_with('\\') {
            if let Some(p) = points.get_mut(j + 1) {
                *p = false;
            }
        }
    }
    points
}

/// Outcome of trying to read one comment segment.
enum Segment {
    Keep(String),
    Discard,
}

struct Session<'a> {
    backend: &'a dyn Backend,
    tokenizer: &'a dyn Tokenizer,
    syntax: &'static CommentSyntax,
    config: &'a DecoderConfig,
    lang: Language,
    prompt: String,
    emitted: String,
    origins: Vec<LineOrigin>,
    lm_tokens: usize,
    copied_tokens: usize,
    estimated: bool,
    calls: usize,
}

enum Stop {
    Eot,
    Budget,
    Failed(BackendError),
}

impl<'a> Session<'a> {
    fn call(&mut self, partial: &str, max_tokens: usize) -> Result<(String, Finish, usize), Stop> {
        let mut ctx = prompt::engine_context(&self.prompt, self.lang, &self.emitted);
        ctx.push_str(partial);
        let request = CompletionRequest {
            prompt: ctx,
            stop: vec!["\n".to_string()],
            max_tokens: max_tokens.max(1),
            temperature: self.config.temperature,
        };
        self.calls += 1;
        let resp = self.backend.complete(&request).map_err(Stop::Failed)?;
        self.lm_tokens += resp.tokens_generated;
        self.estimated |= resp.token_source == TokenSource::Estimated;
        Ok((resp.text, resp.finish, resp.tokens_generated))
    }

    fn push_line(&mut self, line: &str, origin: LineOrigin) {
        self.emitted.push_str(line);
        self.emitted.push('\n');
        self.origins.push(origin);
    }

    /// Probes the gap and, on a comment, reads the whole segment.
    fn gap(&mut self, first_call: bool) -> Result<Segment, Stop> {
        let (text, finish, tokens) = self.call("", self.config.probe_len)?;
        if first_call && text.trim_start().starts_with(EOT) {
            return Err(Stop::Eot);
        }
        let mut seg = text;
        if finish == Finish::Stop("\n".into()) {
            seg.push('\n');
        }
        if classify_prefix(&seg, self.syntax, false) != PrefixClass::Comment {
            return Ok(Segment::Discard);
        }
        self.finish_segment(seg, finish, tokens)
    }

    fn finish_segment(&mut self, mut seg: String, mut finish: Finish, mut used: usize) -> Result<Segment, Stop> {
        let indent = seg.len() - seg.trim_start().len();
        loop {
            match first_comment(&seg, self.syntax, indent) {
                CommentState::Closed(end) => {
                    seg.truncate(end);
                    return Ok(Segment::Keep(seg));
                }
                CommentState::Missing => return Ok(Segment::Discard),
                CommentState::Open => {}
            }
            if finish == Finish::End {
                return Ok(self.auto_close(seg));
            }
            if used >= self.config.segment_budget {
                return Err(Stop::Budget);
            }
            let (text, f, tokens) = self.call(&seg, self.config.segment_budget - used)?;
            used += tokens;
            seg.push_str(&text);
            if f == Finish::Stop("\n".into()) {
                seg.push('\n');
            }
            finish = f;
            if used > self.config.segment_budget {
                return Err(Stop::Budget);
            }
        }
    }

    /// Closes a block the backend left open, or gives up on it.
    fn auto_close(&mut self, mut seg: String) -> Segment {
        let indent = seg.len() - seg.trim_start().len();
        let Some(close) = self
            .syntax
            .block_markers
            .iter()
            .filter(|b| seg[indent..].starts_with(b.open))
            .max_by_key(|b| b.open.len())
            .map(|b| b.close)
        else {
            // an unterminated line comment
            let line = seg.trim_end_matches('\n').to_string();
            return Segment::Keep(line);
        };
        let before = seg.len();
        for _ in 0..64 {
            if !seg.ends_with('\n') {
                seg.push('\n');
            }
            seg.push_str(close);
            if let CommentState::Closed(end) = first_comment(&seg, self.syntax, indent) {
                seg.truncate(end);
                self.lm_tokens += self.tokenizer.count_tokens(&seg[before.min(seg.len())..]);
                self.estimated = true;
                return Segment::Keep(seg);
            }
        }
        Segment::Discard
    }
}

enum CommentState {
    /// The segment's comment ends at this byte offset.
    Closed(usize),
    Open,
    /// The segment does not start with a comment.
    Missing,
}

fn first_comment(seg: &str, syntax: &CommentSyntax, indent: usize) -> CommentState {
    // trailing sentinel text: a comment that absorbs it was still open
    let probe = format!("{seg} _\n_");
    match scan(&probe, syntax).first() {
        Some(span) if span.start == indent => {
            if span.end <= seg.len() {
                CommentState::Closed(span.end)
            } else {
                CommentState::Open
            }
        }
        _ => CommentState::Missing,
    }
}

/// Runs constrained generation for one document.
pub fn constrained_generate(
    doc: &CodeDocument,
    backend: &dyn Backend,
    tokenizer: &dyn Tokenizer,
    config: &DecoderConfig,
) -> Result<GenerationResult, LexError> {
    let lang = doc.lang()?;
    let syntax = lang.syntax();
    let prompt = build_prompt(doc)?;
    let (lines, trailing_newline) = split_code_lines(&doc.content);
    let neutral = insertion_points(&doc.content, &lines, syntax);
    let mut session = Session {
        backend,
        tokenizer,
        syntax,
        config,
        lang,
        prompt,
        emitted: String::new(),
        origins: Vec::new(),
        lm_tokens: 0,
        copied_tokens: 0,
        estimated: false,
        calls: 0,
    };
    let outcome = run(&mut session, &lines, &neutral);
    let prompt_tokens = tokenizer.count_tokens(&session.prompt);
    let token_source = if session.estimated {
        TokenSource::Estimated
    } else {
        TokenSource::Reported
    };
    let mut result = GenerationResult {
        status: GenerationStatus::Completed,
        output: String::new(),
        body: String::new(),
        line_origins: Vec::new(),
        lm_tokens: session.lm_tokens,
        copied_tokens: session.copied_tokens,
        token_source,
        backend_calls: session.calls,
        prefill_tokens: prompt_tokens + session.copied_tokens,
    };
    match outcome {
        Ok(()) => {
            let mut body = session.emitted;
            if !trailing_newline {
                body.pop();
            }
            result.output = render_output(lang, &body);
            result.body = body;
            result.line_origins = session.origins;
        }
        Err(Stop::Eot) => {
            result.status = GenerationStatus::ImplicitEot;
            result.output = EOT.to_string();
        }
        Err(Stop::Budget) => result.status = GenerationStatus::SegmentBudgetExceeded,
        Err(Stop::Failed(error)) => result.status = GenerationStatus::BackendFailed { error },
    }
    Ok(result)
}

fn run(session: &mut Session<'_>, lines: &[&str], neutral: &[bool]) -> Result<(), Stop> {
    let n = lines.len();
    let mut first_call = true;
    for j in 0..=n {
        if neutral.get(j).copied().unwrap_or(false) {
            for _ in 0..session.config.max_segments_per_gap {
                let segment = session.gap(first_call)?;
                first_call = false;
                match segment {
                    Segment::Keep(seg) => {
                        for line in seg.trim_end_matches('\n').split('\n') {
                            session.push_line(line, LineOrigin::Generated);
                        }
                    }
                    Segment::Discard => break,
                }
            }
        }
        if let Some(line) = lines.get(j) {
            session.copied_tokens += session.tokenizer.count_tokens(line);
            session.push_line(line, LineOrigin::Copied);
        }
    }
    Ok(())
}

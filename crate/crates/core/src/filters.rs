//! Per-record quality verdicts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CodeDocument, Tokenizer};
use crate::decoder::{build_prompt, parse_output, GenerationResult, GenerationStatus, MarkdownIssue};
use crate::lexer::{count_chars, CommentSyntax, LexError};

/// Largest tolerated relative change in code size.
pub const MAX_LENGTH_RATIO: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FilterVerdict {
    Pass,
    TooLong,
    ImplicitEot,
    MarkdownReject { reason: MarkdownIssue },
    LengthReject { ratio: f64 },
}

impl FilterVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            FilterVerdict::Pass => "pass",
            FilterVerdict::TooLong => "too_long",
            FilterVerdict::ImplicitEot => "implicit_eot",
            FilterVerdict::MarkdownReject { .. } => "markdown_reject",
            FilterVerdict::LengthReject { .. } => "length_reject",
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, FilterVerdict::Pass)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("original code has no non-whitespace code bytes")]
    EmptyOriginal,
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("generation did not finish: {0}")]
    GenerationFailed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LengthLimits {
    pub max_context: usize,
    /// Share of the context reserved for generated comments.
    pub headroom: f64,
}

impl Default for LengthLimits {
    fn default() -> Self {
        Self {
            max_context: 4096,
            headroom: 0.25,
        }
    }
}

impl LengthLimits {
    pub fn headroom_tokens(&self) -> usize {
        (self.max_context as f64 * self.headroom).floor() as usize
    }
}

/// TooLong when the prompt leaves less than the reserved headroom free.
pub fn prefilter_length(
    doc: &CodeDocument,
    tokenizer: &dyn Tokenizer,
    limits: &LengthLimits,
) -> Result<FilterVerdict, LexError> {
    let tokens = tokenizer.count_tokens(&build_prompt(doc)?);
    Ok(if tokens + limits.headroom_tokens() >= limits.max_context {
        FilterVerdict::TooLong
    } else {
        FilterVerdict::Pass
    })
}

pub fn filter_markdown(raw_output: &str, language: crate::lexer::Language) -> FilterVerdict {
    match parse_output(raw_output, language) {
        Ok(_) => FilterVerdict::Pass,
        Err(e) => FilterVerdict::MarkdownReject { reason: e.reason },
    }
}

fn code_bytes(text: &str, syntax: &CommentSyntax) -> u64 {
    let counts = count_chars(text, syntax);
    counts.total - counts.comment
}

/// Relative change in non-whitespace code bytes, comments excluded.
pub fn length_ratio(generated_body: &str, original: &str, syntax: &CommentSyntax) -> Result<f64, FilterError> {
    let o = code_bytes(original, syntax);
    if o == 0 {
        return Err(FilterError::EmptyOriginal);
    }
    let g = code_bytes(generated_body, syntax);
    Ok(g.abs_diff(o) as f64 / o as f64)
}

pub fn filter_length(
    generated_body: &str,
    original: &str,
    syntax: &CommentSyntax,
) -> Result<FilterVerdict, FilterError> {
    let ratio = length_ratio(generated_body, original, syntax)?;
    Ok(if ratio > MAX_LENGTH_RATIO {
        FilterVerdict::LengthReject { ratio }
    } else {
        FilterVerdict::Pass
    })
}

pub fn filter_implicit(result: &GenerationResult) -> Result<FilterVerdict, FilterError> {
    match &result.status {
        GenerationStatus::Completed => Ok(FilterVerdict::Pass),
        GenerationStatus::ImplicitEot => Ok(FilterVerdict::ImplicitEot),
        GenerationStatus::SegmentBudgetExceeded => Err(FilterError::GenerationFailed(
            "comment segment exceeded its token budget".into(),
        )),
        GenerationStatus::BackendFailed { error } => Err(FilterError::GenerationFailed(error.to_string())),
    }
}

/// First failing filter in the order TooLong, ImplicitEot, Markdown, Length.
pub fn apply_all(
    doc: &CodeDocument,
    result: &GenerationResult,
    tokenizer: &dyn Tokenizer,
    limits: &LengthLimits,
) -> Result<FilterVerdict, FilterError> {
    let lang = doc.lang()?;
    let checks = [
        prefilter_length(doc, tokenizer, limits)?,
        filter_implicit(result)?,
        filter_markdown(&result.output, lang),
    ];
    if let Some(v) = checks.into_iter().find(|v| !v.is_pass()) {
        return Ok(v);
    }
    let body = parse_output(&result.output, lang).expect("markdown filter passed");
    filter_length(&body, &doc.content, lang.syntax())
}

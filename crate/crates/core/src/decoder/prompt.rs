//! Instruction prompt and the fenced answer format.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CodeDocument;
use crate::lexer::{Language, LexError};

pub const INSTRUCTION: &str = "Please add detailed comments to the following code";

/// Sentinel a model emits to decline commenting a document.
pub const EOT: &str = "<|EOT|>";

const FENCE: &str = "```";

/// Instruction line followed by the document in a fenced block.
pub fn build_prompt(doc: &CodeDocument) -> Result<String, LexError> {
    let lang = doc.lang()?;
    Ok(format!("{INSTRUCTION}\n{FENCE}{lang}\n{}\n{FENCE}", doc.content))
}

/// Wraps a generated body in the answer fences.
pub fn render_output(lang: Language, body: &str) -> String {
    format!("{FENCE}{lang}\n{body}\n{FENCE}")
}

/// Text sent to the backend: the prompt, then the opened answer fence and the
/// answer body generated so far.
pub fn engine_context(prompt: &str, lang: Language, body_so_far: &str) -> String {
    let mut ctx = String::with_capacity(prompt.len() + body_so_far.len() + 16);
    ctx.push_str(prompt);
    ctx.push('\n');
    ctx.push_str(FENCE);
    ctx.push_str(lang.as_str());
    ctx.push('\n');
    ctx.push_str(body_so_far);
    ctx
}

/// Pieces of an [`engine_context`] string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextParts<'a> {
    pub fence_tag: &'a str,
    pub original: &'a str,
    pub generated: &'a str,
}

/// Inverse of [`engine_context`]. Returns `None` for text that is not shaped like one.
pub fn split_context(ctx: &str) -> Option<ContextParts<'_>> {
    let rest = ctx.strip_prefix(INSTRUCTION)?.strip_prefix('\n')?.strip_prefix(FENCE)?;
    let tag_end = rest.find('\n')?;
    let fence_tag = &rest[..tag_end];
    let rest = &rest[tag_end + 1..];
    let separator = format!("\n{FENCE}\n{FENCE}{fence_tag}\n");
    let at = rest.find(&separator)?;
    Some(ContextParts {
        fence_tag,
        original: &rest[..at],
        generated: &rest[at + separator.len()..],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkdownIssue {
    MissingOpenFence,
    MissingCloseFence,
    WrongLanguageTag,
    MultipleBlocks,
    ProseOutside,
}

impl MarkdownIssue {
    pub fn as_str(self) -> &'static str {
        match self {
            MarkdownIssue::MissingOpenFence => "missing_open_fence",
            MarkdownIssue::MissingCloseFence => "missing_close_fence",
            MarkdownIssue::WrongLanguageTag => "wrong_language_tag",
            MarkdownIssue::MultipleBlocks => "multiple_blocks",
            MarkdownIssue::ProseOutside => "prose_outside",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("malformed markdown: {}", reason.as_str())]
pub struct MalformedMarkdown {
    pub reason: MarkdownIssue,
}

/// Extracts the body of the single fenced block in `raw`.
///
/// A fence is a line starting with three backticks. Inside a block only a bare
/// fence closes it. Non-blank text outside the block is rejected.
pub fn parse_output(raw: &str, lang: Language) -> Result<String, MalformedMarkdown> {
    let mut blocks = 0;
    let mut inside = false;
    let mut tag = "";
    let mut body: Option<(usize, usize)> = None;
    let mut body_start = 0;
    let mut prose = false;
    let mut offset = 0;
    for line in raw.split('\n') {
        let line_start = offset;
        offset += line.len() + 1;
        let fence_info = line.strip_prefix(FENCE).map(str::trim);
        if inside {
            if fence_info == Some("") {
                inside = false;
                if blocks == 1 {
                    // the newline before the closing fence belongs to the fence
                    body = Some((body_start, line_start.saturating_sub(1).max(body_start)));
                }
            }
        } else if let Some(info) = fence_info {
            blocks += 1;
            inside = true;
            if blocks == 1 {
                tag = info;
                body_start = offset.min(raw.len());
            }
        } else if !line.trim().is_empty() {
            prose = true;
        }
    }
    let fail = |reason| Err(MalformedMarkdown { reason });
    if blocks == 0 {
        return fail(MarkdownIssue::MissingOpenFence);
    }
    if blocks > 1 {
        return fail(MarkdownIssue::MultipleBlocks);
    }
    let Some((start, end)) = body.filter(|_| !inside) else {
        return fail(MarkdownIssue::MissingCloseFence);
    };
    if !lang.matches_fence_tag(tag) {
        return fail(MarkdownIssue::WrongLanguageTag);
    }
    if prose {
        return fail(MarkdownIssue::ProseOutside);
    }
    Ok(raw[start..end].to_string())
}

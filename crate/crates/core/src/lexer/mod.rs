//! Comment/code classification for source files.
//!
//! The lexer is a hand-written state machine over UTF-8 bytes. It knows just enough
//! about string literals to avoid reading comment markers inside them; it is not a
//! parser and does not validate syntax. Unterminated strings and block comments run
//! to the end of the text.
//!
//! All character counts are byte counts of non-whitespace characters, where
//! whitespace is Unicode whitespace. Comment markers count as comment bytes.

mod scan;
pub mod syntax;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use syntax::{syntax_for, syntax_for_name, CommentSyntax, Language};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexError {
    #[error("unsupported language '{0}'")]
    UnsupportedLanguage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommentKind {
    Line,
    Block,
    Doc,
}

/// A half-open byte range `[start, end)` of comment text, markers included.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommentSpan {
    pub start: usize,
    pub end: usize,
    pub kind: CommentKind,
}

impl CommentSpan {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineClass {
    Code,
    CommentOnly,
    Mixed,
    Blank,
}

/// Verdict on the first few bytes of a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixClass {
    Comment,
    Code,
    NeedMore,
}

/// Non-whitespace byte counts behind the density ratio.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CharCounts {
    pub comment: u64,
    pub total: u64,
}

impl CharCounts {
    pub fn density(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.comment as f64 / self.total as f64
        }
    }
}

/// Comment spans of `text`, sorted and disjoint.
pub fn scan(text: &str, syntax: &CommentSyntax) -> Vec<CommentSpan> {
    scan::lex(text, syntax).comments
}

/// For each `\n`-separated line of `text` (`count('\n') + 1` entries), whether the
/// lexer is in plain code at the start of that line. A whole-line comment inserted
/// at a neutral line start cannot change how the rest of the text lexes.
pub fn line_start_states(text: &str, syntax: &CommentSyntax) -> Vec<bool> {
    scan::lex(text, syntax).line_start_neutral
}

/// Byte ranges of the lines of `text`, excluding terminators. A trailing `\n` does
/// not start an extra line; the empty text has one empty line.
pub fn line_ranges(text: &str) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, b) in text.bytes().enumerate() {
        if b == b'\n' {
            out.push(start..i);
            start = i + 1;
        }
    }
    if start < text.len() || out.is_empty() {
        out.push(start..text.len());
    }
    out
}

fn non_ws_bytes(s: &str) -> u64 {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| c.len_utf8() as u64)
        .sum()
}

pub fn count_chars(text: &str, syntax: &CommentSyntax) -> CharCounts {
    let comment = scan(text, syntax).iter().map(|s| non_ws_bytes(&text[s.range()])).sum();
    CharCounts {
        comment,
        total: non_ws_bytes(text),
    }
}

/// Share of non-whitespace bytes that sit inside comments; 0 for blank input.
pub fn comment_density(text: &str, syntax: &CommentSyntax) -> f64 {
    count_chars(text, syntax).density()
}

pub fn classify_lines(text: &str, syntax: &CommentSyntax) -> Vec<LineClass> {
    let spans = scan(text, syntax);
    let mut cursor = 0;
    line_ranges(text)
        .into_iter()
        .map(|line| {
            let mut in_comment = 0usize;
            let mut in_code = 0usize;
            for (off, ch) in text[line.clone()].char_indices() {
                if ch.is_whitespace() {
                    continue;
                }
                let at = line.start + off;
                while cursor < spans.len() && spans[cursor].end <= at {
                    cursor += 1;
                }
                if cursor < spans.len() && spans[cursor].start <= at {
                    in_comment += 1;
                } else {
                    in_code += 1;
                }
            }
            match (in_comment, in_code) {
                (0, 0) => LineClass::Blank,
                (_, 0) => LineClass::CommentOnly,
                (0, _) => LineClass::Code,
                _ => LineClass::Mixed,
            }
        })
        .collect()
}

/// Removes every comment.
///
/// Lines that held comment bytes and are left blank are dropped together with their
/// terminator (a dropped last line takes the preceding `\n` instead). Lines that keep
/// code lose trailing whitespace. A comment removed from between two non-blank code
/// bytes on the same line leaves one space, so the neighbours cannot fuse into a new
/// token. Everything else is copied byte for byte.
pub fn strip_comments(text: &str, syntax: &CommentSyntax) -> String {
    let spans = scan(text, syntax);
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for line in line_ranges(text) {
        let terminated = line.end < text.len();
        let reach = if terminated { line.end + 1 } else { line.end };
        while cursor < spans.len() && spans[cursor].end <= line.start {
            cursor += 1;
        }
        let mut touched = false;
        let mut kept = String::new();
        let mut pos = line.start;
        let mut k = cursor;
        while k < spans.len() && spans[k].start < reach {
            let span = spans[k];
            touched = true;
            let cut_start = span.start.max(line.start).min(line.end);
            if cut_start > pos {
                push_code(&mut kept, &text[pos..cut_start]);
            }
            pos = pos.max(span.end.min(line.end));
            k += 1;
        }
        if pos < line.end {
            push_code(&mut kept, &text[pos..line.end]);
        }
        if !touched {
            out.push_str(&text[line.clone()]);
            if terminated {
                out.push('\n');
            }
            continue;
        }
        let kept = kept.trim_end();
        if kept.is_empty() {
            if !terminated && out.ends_with('\n') {
                out.pop();
            }
            continue;
        }
        out.push_str(kept);
        if terminated {
            out.push('\n');
        }
    }
    out
}

/// Appends a code fragment that followed a removed comment, inserting a separating
/// space when both sides of the removed comment were non-blank.
fn push_code(kept: &mut String, fragment: &str) {
    let joins = kept.chars().last().is_some_and(|c| !c.is_whitespace())
        && fragment.chars().next().is_some_and(|c| !c.is_whitespace());
    if joins {
        kept.push(' ');
    }
    kept.push_str(fragment);
}

/// Classifies the start of a line from its first bytes.
///
/// `prefix` begins at a line start where the lexer is in plain code. A `\n` inside
/// `prefix` marks the line as complete, so a partial marker followed by `\n` is code.
pub fn classify_prefix(prefix: &str, syntax: &CommentSyntax, in_block: bool) -> PrefixClass {
    if in_block {
        return PrefixClass::Comment;
    }
    let rest = prefix.trim_start_matches(|c: char| c.is_whitespace() && c != '\n');
    let indented = rest.len() != prefix.len();
    let (line, complete) = match rest.find('\n') {
        Some(k) => (&rest[..k], true),
        None => (rest, false),
    };
    if line.is_empty() {
        return if complete {
            PrefixClass::Code
        } else {
            PrefixClass::NeedMore
        };
    }
    let openers = syntax.line_markers.iter().copied().chain(
        syntax
            .block_markers
            .iter()
            .filter(|b| !(indented && b.anchor == syntax::Anchor::ColumnZero))
            .map(|b| b.open),
    );
    let mut partial = false;
    for marker in openers {
        if line.starts_with(marker) {
            return PrefixClass::Comment;
        }
        if marker.len() > line.len() && marker.starts_with(line) {
            partial = true;
        }
    }
    if partial && !complete {
        PrefixClass::NeedMore
    } else {
        PrefixClass::Code
    }
}

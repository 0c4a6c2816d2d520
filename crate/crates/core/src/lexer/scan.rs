use std::ops::Range;

use super::syntax::{Anchor, BlockMarker, CommentSyntax, Escape, StringDelim};
use super::{CommentKind, CommentSpan};

/// Everything one pass over a text yields.
#[derive(Debug, Default)]
pub(crate) struct Lexed {
    pub comments: Vec<CommentSpan>,
    pub strings: Vec<Range<usize>>,
    /// Entry `k` tells whether the lexer is back in plain code (and, for languages
    /// that track statements, at bracket depth zero) at the start of the `k`-th
    /// `\n`-separated line. Always `count('\n') + 1` entries.
    pub line_start_neutral: Vec<bool>,
}

enum Opener {
    Line(&'static str),
    Block(&'static BlockMarker),
    Str(&'static StringDelim),
}

impl Opener {
    fn len(&self) -> usize {
        match self {
            Opener::Line(m) => m.len(),
            Opener::Block(b) => b.open.len(),
            Opener::Str(s) => s.open.len(),
        }
    }

    fn is_comment(&self) -> bool {
        !matches!(self, Opener::Str(_))
    }
}

struct Scanner<'a> {
    text: &'a str,
    bytes: &'a [u8],
    syntax: &'a CommentSyntax,
    pos: usize,
    depth: usize,
    at_statement_start: bool,
    out: Lexed,
}

pub(crate) fn lex(text: &str, syntax: &CommentSyntax) -> Lexed {
    let mut scanner = Scanner {
        text,
        bytes: text.as_bytes(),
        syntax,
        pos: 0,
        depth: 0,
        at_statement_start: true,
        out: Lexed::default(),
    };
    scanner.out.line_start_neutral.push(true);
    scanner.run();
    debug_assert_eq!(
        scanner.out.line_start_neutral.len(),
        text.bytes().filter(|&b| b == b'\n').count() + 1
    );
    scanner.out
}

fn is_ident(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

fn is_ascii_space(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\r' | 0x0b | 0x0c)
}

impl<'a> Scanner<'a> {
    fn starts_with(&self, at: usize, pat: &str) -> bool {
        self.bytes.len() >= at + pat.len() && &self.bytes[at..at + pat.len()] == pat.as_bytes()
    }

    fn newline_inside(&mut self) {
        self.out.line_start_neutral.push(false);
    }

    fn run(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'\n' {
                let neutral = !self.syntax.tracks_statements || self.depth == 0;
                if neutral {
                    self.at_statement_start = true;
                }
                self.out.line_start_neutral.push(neutral);
                self.pos += 1;
                continue;
            }
            if is_ascii_space(b) {
                self.pos += 1;
                continue;
            }
            if b >= 0x80 {
                let ch = self.text[self.pos..].chars().next().unwrap_or('\u{fffd}');
                if !ch.is_whitespace() {
                    self.at_statement_start = false;
                }
                self.pos += ch.len_utf8();
                continue;
            }
            if self.syntax.raw_strings && b == b'r' && self.try_raw_string() {
                continue;
            }
            if self.syntax.char_or_lifetime && b == b'\'' {
                self.char_or_lifetime();
                continue;
            }
            match self.best_opener() {
                Some(Opener::Line(marker)) => self.line_comment(marker),
                Some(Opener::Block(block)) => self.block_comment(block),
                Some(Opener::Str(delim)) => self.string(delim),
                None => self.code_byte(b),
            }
        }
    }

    fn code_byte(&mut self, b: u8) {
        if self.syntax.tracks_statements {
            match b {
                b'(' | b'[' | b'{' => self.depth += 1,
                b')' | b']' | b'}' => self.depth = self.depth.saturating_sub(1),
                _ => {}
            }
        }
        self.at_statement_start = false;
        self.pos += 1;
    }

    fn block_allowed(&self, block: &BlockMarker) -> bool {
        match block.anchor {
            Anchor::Anywhere => true,
            Anchor::StatementStart => self.at_statement_start && self.depth == 0,
            Anchor::ColumnZero => self.pos == 0 || self.bytes[self.pos - 1] == b'\n',
        }
    }

    /// Longest opener at the cursor; comments win ties against strings.
    fn best_opener(&self) -> Option<Opener> {
        let mut best: Option<Opener> = None;
        let mut consider = |cand: Opener| {
            let better = match &best {
                None => true,
                Some(cur) => {
                    cand.len() > cur.len() || (cand.len() == cur.len() && cand.is_comment() && !cur.is_comment())
                }
            };
            if better {
                best = Some(cand);
            }
        };
        for m in self.syntax.line_markers {
            if self.starts_with(self.pos, m) {
                consider(Opener::Line(m));
            }
        }
        for block in self.syntax.block_markers {
            if self.starts_with(self.pos, block.open) && self.block_allowed(block) {
                consider(Opener::Block(block));
            }
        }
        for delim in self.syntax.string_delims {
            if self.starts_with(self.pos, delim.open) {
                consider(Opener::Str(delim));
            }
        }
        best
    }

    fn line_comment(&mut self, _marker: &str) {
        let start = self.pos;
        let end = memchr_newline(self.bytes, start).unwrap_or(self.bytes.len());
        self.push_comment(start, end, false);
        self.pos = end;
    }

    fn block_comment(&mut self, block: &BlockMarker) {
        let start = self.pos;
        let mut j = start + block.open.len();
        let mut depth = 1usize;
        let len = self.bytes.len();
        let mut end = len;
        while j < len {
            let b = self.bytes[j];
            if block.escape == Escape::Backslash && b == b'\\' {
                if j + 1 < len && self.bytes[j + 1] == b'\n' {
                    self.newline_inside();
                }
                j += 2;
                continue;
            }
            if block.anchor == Anchor::ColumnZero {
                if self.bytes[j - 1] == b'\n' && self.starts_with(j, block.close) {
                    end = memchr_newline(self.bytes, j).unwrap_or(len);
                    break;
                }
            } else {
                if self.syntax.nests_blocks && self.starts_with(j, block.open) {
                    depth += 1;
                    j += block.open.len();
                    continue;
                }
                if self.starts_with(j, block.close) {
                    depth -= 1;
                    j += block.close.len();
                    if depth == 0 {
                        end = j;
                        break;
                    }
                    continue;
                }
            }
            if b == b'\n' {
                self.newline_inside();
            }
            j += 1;
        }
        self.push_comment(start, end.min(len), true);
        self.pos = end.min(len);
    }

    fn string(&mut self, delim: &StringDelim) {
        let start = self.pos;
        let len = self.bytes.len();
        let mut j = start + delim.open.len();
        let mut end = len;
        while j < len {
            let b = self.bytes[j];
            if delim.escape == Escape::Backslash && b == b'\\' {
                if j + 1 < len && self.bytes[j + 1] == b'\n' {
                    self.newline_inside();
                }
                j += 2;
                continue;
            }
            if self.starts_with(j, delim.close) {
                let after = j + delim.close.len();
                if delim.escape == Escape::DoubledClose && self.starts_with(after, delim.close) {
                    j = after + delim.close.len();
                    continue;
                }
                end = after;
                break;
            }
            if b == b'\n' {
                self.newline_inside();
            }
            j += 1;
        }
        let end = end.min(len);
        self.out.strings.push(start..end);
        self.at_statement_start = false;
        self.pos = end;
    }

    /// `r"..."`, `r#"..."#`, `br"..."`. Returns false when the `r` is plain code.
    fn try_raw_string(&mut self) -> bool {
        let i = self.pos;
        let prefix_ok = match i {
            0 => true,
            _ => {
                let prev = self.bytes[i - 1];
                !is_ident(prev) || (prev == b'b' && (i < 2 || !is_ident(self.bytes[i - 2])))
            }
        };
        if !prefix_ok {
            return false;
        }
        let mut j = i + 1;
        while j < self.bytes.len() && self.bytes[j] == b'#' {
            j += 1;
        }
        if j >= self.bytes.len() || self.bytes[j] != b'"' {
            return false;
        }
        let hashes = j - i - 1;
        let mut k = j + 1;
        let len = self.bytes.len();
        let mut end = len;
        while k < len {
            if self.bytes[k] == b'"'
                && k + 1 + hashes <= len
                && self.bytes[k + 1..k + 1 + hashes].iter().all(|&h| h == b'#')
            {
                end = k + 1 + hashes;
                break;
            }
            if self.bytes[k] == b'\n' {
                self.newline_inside();
            }
            k += 1;
        }
        self.out.strings.push(i..end);
        self.pos = end;
        true
    }

    /// Rust `'x'`, `'\n'`, `'\u{1F600}'` are literals; `'a` in `&'a T` is code.
    fn char_or_lifetime(&mut self) {
        let i = self.pos;
        let len = self.bytes.len();
        // an escape cannot swallow a line break
        if i + 2 < len && self.bytes[i + 1] == b'\\' && self.bytes[i + 2] != b'\n' {
            let mut k = i + 3;
            while k < len && self.bytes[k] != b'\n' {
                if self.bytes[k] == b'\'' {
                    self.out.strings.push(i..k + 1);
                    self.pos = k + 1;
                    return;
                }
                k += 1;
            }
        } else if let Some(ch) = self.text.get(i + 1..).and_then(|s| s.chars().next()) {
            let after = i + 1 + ch.len_utf8();
            if ch != '\n' && ch != '\'' && after < len && self.bytes[after] == b'\'' {
                self.out.strings.push(i..after + 1);
                self.pos = after + 1;
                return;
            }
        }
        self.pos += 1;
    }

    fn push_comment(&mut self, start: usize, end: usize, block: bool) {
        if end <= start {
            return;
        }
        let text = &self.text[start..end];
        let kind = if block {
            let doc = (text.starts_with("/**") && !text.starts_with("/**/"))
                || text.starts_with("/*!")
                || text.starts_with("'''")
                || text.starts_with("\"\"\"");
            if doc {
                CommentKind::Doc
            } else {
                CommentKind::Block
            }
        } else if (text.starts_with("///") && !text.starts_with("////")) || text.starts_with("//!") {
            CommentKind::Doc
        } else {
            CommentKind::Line
        };
        self.out.comments.push(CommentSpan { start, end, kind });
    }
}

fn memchr_newline(bytes: &[u8], from: usize) -> Option<usize> {
    bytes[from..].iter().position(|&b| b == b'\n').map(|p| p + from)
}

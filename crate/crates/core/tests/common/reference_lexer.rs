//! Character-at-a-time reference interpreter for comment classification.
//!
//! Written against the language rules directly (hard-coded per language, explicit
//! priority order) rather than the production syntax tables, so the two can be
//! compared. Produces one label per byte: `true` for comment bytes.

use codealign::lexer::Language;

#[derive(Clone, Copy, PartialEq)]
enum Esc {
    None,
    Backslash,
    Doubled,
}

enum State {
    Code,
    LineComment,
    Block {
        close: &'static str,
        nest_open: Option<&'static str>,
        depth: u32,
        esc: bool,
    },
    RubyDoc,
    Str {
        close: String,
        esc: Esc,
    },
}

struct Ref<'a> {
    lang: Language,
    chars: Vec<(usize, char)>,
    text: &'a str,
    labels: Vec<bool>,
}

fn ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl<'a> Ref<'a> {
    fn rest(&self, i: usize) -> &'a str {
        if i >= self.chars.len() {
            ""
        } else {
            &self.text[self.chars[i].0..]
        }
    }

    fn mark(&mut self, from: usize, to: usize) {
        let start = self.chars.get(from).map(|c| c.0).unwrap_or(self.text.len());
        let end = self.chars.get(to).map(|c| c.0).unwrap_or(self.text.len());
        for l in &mut self.labels[start..end] {
            *l = true;
        }
    }

    fn run(&mut self) {
        let n = self.chars.len();
        let mut state = State::Code;
        let mut i = 0;
        let mut stmt_start = true;
        let mut depth: u32 = 0;
        let mut comment_from = 0;
        let python = self.lang == Language::Python;
        while i < n {
            let c = self.chars[i].1;
            let rest = self.rest(i);
            match &mut state {
                State::Code => {
                    if c == '\n' {
                        if !python || depth == 0 {
                            stmt_start = true;
                        }
                        i += 1;
                        continue;
                    }
                    if c.is_whitespace() {
                        i += 1;
                        continue;
                    }
                    if let Some((next, consumed)) = self.open_at(i, rest, stmt_start && depth == 0) {
                        let is_comment = !matches!(next, State::Str { .. } | State::Code);
                        if is_comment {
                            comment_from = i;
                        } else {
                            stmt_start = false;
                        }
                        if let State::Code = next {
                            // a complete literal was consumed in one go
                            i += consumed;
                            stmt_start = false;
                            continue;
                        }
                        state = next;
                        i += consumed;
                        continue;
                    }
                    if python {
                        match c {
                            '(' | '[' | '{' => depth += 1,
                            ')' | ']' | '}' => depth = depth.saturating_sub(1),
                            _ => {}
                        }
                    }
                    stmt_start = false;
                    i += 1;
                }
                State::LineComment => {
                    if c == '\n' {
                        self.mark(comment_from, i);
                        state = State::Code;
                    } else {
                        i += 1;
                    }
                }
                State::Block {
                    close,
                    nest_open,
                    depth: d,
                    esc,
                } => {
                    if *esc && c == '\\' {
                        i += 2;
                        continue;
                    }
                    if let Some(open) = nest_open {
                        if rest.starts_with(*open) {
                            *d += 1;
                            i += open.chars().count();
                            continue;
                        }
                    }
                    if rest.starts_with(*close) {
                        i += close.chars().count();
                        *d -= 1;
                        if *d == 0 {
                            self.mark(comment_from, i);
                            state = State::Code;
                        }
                        continue;
                    }
                    i += 1;
                }
                State::RubyDoc => {
                    let col0 = i > 0 && self.chars[i - 1].1 == '\n';
                    if col0 && rest.starts_with("=end") {
                        let mut j = i;
                        while j < n && self.chars[j].1 != '\n' {
                            j += 1;
                        }
                        self.mark(comment_from, j);
                        state = State::Code;
                        i = j;
                        continue;
                    }
                    i += 1;
                }
                State::Str { close, esc } => {
                    if *esc == Esc::Backslash && c == '\\' {
                        i += 2;
                        continue;
                    }
                    if rest.starts_with(close.as_str()) {
                        let len = close.chars().count();
                        if *esc == Esc::Doubled && self.rest(i + len).starts_with(close.as_str()) {
                            i += 2 * len;
                            continue;
                        }
                        i += len;
                        state = State::Code;
                        continue;
                    }
                    i += 1;
                }
            }
        }
        match state {
            State::LineComment | State::Block { .. } | State::RubyDoc => self.mark(comment_from, n),
            _ => {}
        }
    }

    /// Recognizes an opener at char index `i`. Returns the state to enter and the
    /// number of chars consumed. `State::Code` means a whole literal was consumed.
    fn open_at(&self, i: usize, rest: &str, stmt: bool) -> Option<(State, usize)> {
        let s = |close: &str, esc: Esc| State::Str {
            close: close.to_string(),
            esc,
        };
        let c_block = |nest: bool| State::Block {
            close: "*/",
            nest_open: if nest { Some("/*") } else { None },
            depth: 1,
            esc: false,
        };
        match self.lang {
            Language::Python => {
                for q in ["'''", "\"\"\""] {
                    if rest.starts_with(q) {
                        let st = if stmt {
                            State::Block {
                                close: if q == "'''" { "'''" } else { "\"\"\"" },
                                nest_open: None,
                                depth: 1,
                                esc: true,
                            }
                        } else {
                            s(q, Esc::Backslash)
                        };
                        return Some((st, 3));
                    }
                }
                if rest.starts_with('#') {
                    return Some((State::LineComment, 1));
                }
                if rest.starts_with('\'') {
                    return Some((s("'", Esc::Backslash), 1));
                }
                if rest.starts_with('"') {
                    return Some((s("\"", Esc::Backslash), 1));
                }
                None
            }
            Language::Ruby => {
                let col0 = i == 0 || self.chars[i - 1].1 == '\n';
                if col0 && rest.starts_with("=begin") {
                    return Some((State::RubyDoc, 6));
                }
                if rest.starts_with('#') {
                    return Some((State::LineComment, 1));
                }
                if rest.starts_with('"') {
                    return Some((s("\"", Esc::Backslash), 1));
                }
                if rest.starts_with('\'') {
                    return Some((s("'", Esc::Backslash), 1));
                }
                None
            }
            Language::Rust => {
                if rest.starts_with("//") {
                    return Some((State::LineComment, 2));
                }
                if rest.starts_with("/*") {
                    return Some((c_block(true), 2));
                }
                if rest.starts_with('"') {
                    return Some((s("\"", Esc::Backslash), 1));
                }
                if let Some(after_r) = rest.strip_prefix('r') {
                    let prev = if i > 0 { Some(self.chars[i - 1].1) } else { None };
                    let prev2 = if i > 1 { Some(self.chars[i - 2].1) } else { None };
                    let ok = match prev {
                        None => true,
                        Some('b') => !prev2.is_some_and(ident),
                        Some(p) => !ident(p),
                    };
                    if ok {
                        let hashes = after_r.chars().take_while(|&c| c == '#').count();
                        if after_r[hashes..].starts_with('"') {
                            let close = format!("\"{}", "#".repeat(hashes));
                            return Some((s(&close, Esc::None), 2 + hashes));
                        }
                    }
                    return None;
                }
                if rest.starts_with('\'') {
                    let mut it = rest.chars().skip(1);
                    let first = it.next();
                    if first == Some('\\') && rest.chars().nth(2).is_some_and(|c| c != '\n') {
                        // scan to the next quote on this line, at least one char after '\'
                        let tail: Vec<char> = rest.chars().collect();
                        let mut k = 3;
                        while k < tail.len() && tail[k] != '\n' {
                            if tail[k] == '\'' {
                                return Some((State::Code, k + 1));
                            }
                            k += 1;
                        }
                        return None;
                    }
                    if let Some(ch) = first {
                        if ch != '\n' && ch != '\'' && it.next() == Some('\'') {
                            return Some((State::Code, 3));
                        }
                    }
                    return None;
                }
                None
            }
            Language::Php => {
                if rest.starts_with("//") || rest.starts_with('#') {
                    return Some((State::LineComment, 1));
                }
                if rest.starts_with("/*") {
                    return Some((c_block(false), 2));
                }
                if rest.starts_with('"') {
                    return Some((s("\"", Esc::Backslash), 1));
                }
                if rest.starts_with('\'') {
                    return Some((s("'", Esc::Backslash), 1));
                }
                None
            }
            lang => {
                if rest.starts_with("//") {
                    return Some((State::LineComment, 2));
                }
                if rest.starts_with("/*") {
                    return Some((c_block(false), 2));
                }
                if lang == Language::CSharp && rest.starts_with("@\"") {
                    return Some((s("\"", Esc::Doubled), 2));
                }
                if lang == Language::Java && rest.starts_with("\"\"\"") {
                    return Some((s("\"\"\"", Esc::Backslash), 3));
                }
                if rest.starts_with('"') {
                    return Some((s("\"", Esc::Backslash), 1));
                }
                if rest.starts_with('\'') {
                    return Some((s("'", Esc::Backslash), 1));
                }
                if rest.starts_with('`') {
                    match lang {
                        Language::Go => return Some((s("`", Esc::None), 1)),
                        Language::JavaScript | Language::TypeScript => return Some((s("`", Esc::Backslash), 1)),
                        _ => {}
                    }
                }
                None
            }
        }
    }
}

/// Per-byte comment labels for `text`.
pub fn reference_labels(text: &str, lang: Language) -> Vec<bool> {
    let mut r = Ref {
        lang,
        chars: text.char_indices().collect(),
        text,
        labels: vec![false; text.len()],
    };
    r.run();
    r.labels
}

/// Per-byte labels derived from production spans.
pub fn span_labels(text: &str, spans: &[codealign::lexer::CommentSpan]) -> Vec<bool> {
    let mut labels = vec![false; text.len()];
    for s in spans {
        for l in &mut labels[s.start..s.end] {
            *l = true;
        }
    }
    labels
}

//! Deterministic scripted backend.
//!
//! The mock reads the engine context back out of the prompt, works out which
//! original line the decoder is positioned before, and plays the action of the
//! first rule matching that position. Text is emitted in whitespace-delimited
//! pieces, one piece per token. It keeps no state between calls, so replies
//! depend only on the script and the request.

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{truncate_at_stop, Backend, BackendError, CompletionRequest, CompletionResponse, Finish, TokenSource};
use crate::decoder::prompt::{split_context, EOT};
use crate::decoder::split_code_lines;

/// Where in the document a rule applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    /// Before any original line.
    #[default]
    Any,
    /// Before the first line, or at the end of an empty document.
    First,
    /// After the last line.
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatchSpec {
    Keyword(Position),
    Pattern {
        #[serde(default)]
        pattern: Option<String>,
        #[serde(default)]
        position: Position,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockAction {
    /// A comment line; a newline is appended when missing.
    Comment(String),
    Eot,
    /// Code-like text; a newline is appended when missing.
    Code(String),
    /// Exactly this text.
    Raw(String),
    Nothing,
}

impl MockAction {
    fn emission(&self) -> String {
        let line = |s: &str| {
            if s.ends_with('\n') {
                s.to_string()
            } else {
                format!("{s}\n")
            }
        };
        match self {
            MockAction::Comment(s) | MockAction::Code(s) => line(s),
            MockAction::Eot => EOT.to_string(),
            MockAction::Raw(s) => s.clone(),
            MockAction::Nothing => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(rename = "match")]
    pub when: MatchSpec,
    pub action: MockAction,
}

impl MockRule {
    pub fn new(when: MatchSpec, action: MockAction) -> Self {
        Self { when, action }
    }

    pub fn any(action: MockAction) -> Self {
        Self::new(MatchSpec::Keyword(Position::Any), action)
    }

    pub fn at(position: Position, action: MockAction) -> Self {
        Self::new(MatchSpec::Keyword(position), action)
    }

    pub fn pattern(pattern: &str, action: MockAction) -> Self {
        Self::new(
            MatchSpec::Pattern {
                pattern: Some(pattern.to_string()),
                position: Position::Any,
            },
            action,
        )
    }
}

#[derive(Debug)]
struct CompiledRule {
    pattern: Option<Regex>,
    position: Position,
    emission: String,
    eot: bool,
}

impl CompiledRule {
    fn matches(&self, index: usize, lines: &[&str]) -> bool {
        let n = lines.len();
        let positioned = match self.position {
            Position::Any => index < n,
            Position::First => index == 0,
            Position::End => index == n,
        };
        positioned
            && match &self.pattern {
                None => true,
                Some(re) => index < n && re.is_match(lines[index]),
            }
    }
}

#[derive(Debug, Default)]
pub struct MockBackend {
    rules: Vec<CompiledRule>,
    jitter: Option<Duration>,
}

/// Builds a mock from rules; the first matching rule wins and the default is to emit nothing.
pub fn mock_script(rules: &[MockRule]) -> Result<MockBackend, BackendError> {
    let rules = rules
        .iter()
        .map(|rule| {
            let (pattern, position) = match &rule.when {
                MatchSpec::Keyword(p) => (None, *p),
                MatchSpec::Pattern { pattern, position } => {
                    let re = pattern
                        .as_deref()
                        .map(Regex::new)
                        .transpose()
                        .map_err(|e| BackendError::InvalidPattern(e.to_string()))?;
                    (re, *position)
                }
            };
            Ok(CompiledRule {
                pattern,
                position,
                emission: rule.action.emission(),
                eot: rule.action == MockAction::Eot,
            })
        })
        .collect::<Result<Vec<_>, BackendError>>()?;
    Ok(MockBackend { rules, jitter: None })
}

impl MockBackend {
    pub fn from_json(text: &str) -> Result<Self, BackendError> {
        let rules: Vec<MockRule> =
            serde_json::from_str(text).map_err(|e| BackendError::InvalidPattern(format!("mock script: {e}")))?;
        mock_script(&rules)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| BackendError::Config(format!("cannot read mock script {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Sleeps up to `max` per call, keyed by the prompt, to shuffle worker timing.
    pub fn with_jitter(mut self, max: Duration) -> Self {
        self.jitter = Some(max).filter(|d| !d.is_zero());
        self
    }

    fn emission_at(&self, index: usize, lines: &[&str]) -> &str {
        self.rules
            .iter()
            .find(|r| r.matches(index, lines))
            .map(|r| r.emission.as_str())
            .unwrap_or("")
    }

    /// The whole commented document the script describes, closing fence included.
    fn full_document(&self, lines: &[&str]) -> String {
        let first = self.rules.iter().find(|r| r.matches(0, lines));
        if first.is_some_and(|r| r.eot) {
            return EOT.to_string();
        }
        let mut out = String::new();
        for index in 0..=lines.len() {
            let emission = self.emission_at(index, lines);
            if emission != EOT {
                out.push_str(emission);
            }
            if let Some(line) = lines.get(index) {
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str("```");
        out
    }

    fn sleep_jitter(&self, prompt: &str) {
        if let Some(max) = self.jitter {
            let mut h = DefaultHasher::new();
            prompt.hash(&mut h);
            let micros = max.as_micros().max(1) as u64;
            std::thread::sleep(Duration::from_micros(h.finish() % micros));
        }
    }
}

/// Index of the next original line to copy, and the text generated since the last copy.
fn align<'a>(lines: &[&str], generated: &'a str) -> (usize, &'a str) {
    let mut index = 0;
    let mut copied_end = 0;
    let mut offset = 0;
    while let Some(nl) = generated[offset..].find('\n') {
        let line = &generated[offset..offset + nl];
        offset += nl + 1;
        if index < lines.len() && line == lines[index] {
            index += 1;
            copied_end = offset;
        }
    }
    (index, &generated[copied_end..])
}

/// Splits text into tokens: leading whitespace plus a run of non-whitespace.
/// Trailing whitespace forms its own token. Concatenation is lossless.
fn pieces(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while chars.peek().is_some() {
        while chars.next_if(|(_, c)| c.is_whitespace()).is_some() {}
        while chars.next_if(|(_, c)| !c.is_whitespace()).is_some() {}
        let end = chars.peek().map(|&(i, _)| i).unwrap_or(text.len());
        out.push(&text[start..end]);
        start = end;
    }
    out
}

fn emit(planned: &str, request: &CompletionRequest) -> CompletionResponse {
    let mut text = String::new();
    let mut tokens = 0;
    let parts = pieces(planned);
    for piece in &parts {
        text.push_str(piece);
        tokens += 1;
        if let Some((at, stop)) = truncate_at_stop(&text, &request.stop) {
            text.truncate(at);
            return CompletionResponse {
                text,
                finish: Finish::Stop(stop.to_string()),
                tokens_generated: tokens,
                token_source: TokenSource::Reported,
            };
        }
        if tokens == request.max_tokens && tokens < parts.len() {
            return CompletionResponse {
                text,
                finish: Finish::Length,
                tokens_generated: tokens,
                token_source: TokenSource::Reported,
            };
        }
    }
    CompletionResponse {
        text,
        finish: Finish::End,
        tokens_generated: tokens,
        token_source: TokenSource::Reported,
    }
}

impl Backend for MockBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        request.validate()?;
        self.sleep_jitter(&request.prompt);
        let Some(parts) = split_context(&request.prompt) else {
            return Ok(emit("", request));
        };
        let (lines, _) = split_code_lines(parts.original);
        let whole_document = !request.stop.iter().any(|s| s == "\n");
        let remainder = if whole_document {
            let full = self.full_document(&lines);
            full.strip_prefix(parts.generated).map(str::to_string)
        } else {
            let (index, tail) = align(&lines, parts.generated);
            self.emission_at(index, &lines).strip_prefix(tail).map(str::to_string)
        };
        Ok(emit(remainder.as_deref().unwrap_or(""), request))
    }
}

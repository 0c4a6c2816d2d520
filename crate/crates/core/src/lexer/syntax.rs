//! Static comment and string-literal tables for the supported languages.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LexError;

/// The ten languages the lexer understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Language {
    #[serde(rename = "c-sharp")]
    CSharp,
    #[serde(rename = "cpp")]
    Cpp,
    #[serde(rename = "go")]
    Go,
    #[serde(rename = "java")]
    Java,
    #[serde(rename = "javascript")]
    JavaScript,
    #[serde(rename = "php")]
    Php,
    #[serde(rename = "python")]
    Python,
    #[serde(rename = "ruby")]
    Ruby,
    #[serde(rename = "rust")]
    Rust,
    #[serde(rename = "typescript")]
    TypeScript,
}

impl Language {
    pub const ALL: [Language; 10] = [
        Language::CSharp,
        Language::Cpp,
        Language::Go,
        Language::Java,
        Language::JavaScript,
        Language::Php,
        Language::Python,
        Language::Ruby,
        Language::Rust,
        Language::TypeScript,
    ];

    /// Lower-case corpus name, also used as the markdown fence tag.
    pub fn as_str(self) -> &'static str {
        match self {
            Language::CSharp => "c-sharp",
            Language::Cpp => "cpp",
            Language::Go => "go",
            Language::Java => "java",
            Language::JavaScript => "javascript",
            Language::Php => "php",
            Language::Python => "python",
            Language::Ruby => "ruby",
            Language::Rust => "rust",
            Language::TypeScript => "typescript",
        }
    }

    /// Fence info strings accepted for this language besides [`Language::as_str`].
    pub fn fence_aliases(self) -> &'static [&'static str] {
        match self {
            Language::CSharp => &["csharp", "cs", "c#"],
            Language::Cpp => &["c++", "cc", "cxx"],
            Language::Go => &["golang"],
            Language::Java => &[],
            Language::JavaScript => &["js"],
            Language::Php => &[],
            Language::Python => &["py", "python3"],
            Language::Ruby => &["rb"],
            Language::Rust => &["rs"],
            Language::TypeScript => &["ts"],
        }
    }

    pub fn matches_fence_tag(self, tag: &str) -> bool {
        let tag = tag.trim();
        tag.eq_ignore_ascii_case(self.as_str()) || self.fence_aliases().iter().any(|a| tag.eq_ignore_ascii_case(a))
    }

    pub fn syntax(self) -> &'static CommentSyntax {
        syntax_for(self)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = LexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Language::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| LexError::UnsupportedLanguage(s.to_string()))
    }
}

/// How a delimited region treats escape sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Escape {
    None,
    /// `\` consumes the following byte.
    Backslash,
    /// A doubled close delimiter stands for one literal delimiter (C# verbatim strings).
    DoubledClose,
}

/// Where a block opener is allowed to start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Anywhere,
    /// First non-blank token of a logical line at bracket depth zero (Python docstrings).
    StatementStart,
    /// Column zero, for both the opener and the closer; the closing line is consumed
    /// to its end (Ruby `=begin` / `=end`).
    ColumnZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockMarker {
    pub open: &'static str,
    pub close: &'static str,
    pub anchor: Anchor,
    pub escape: Escape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StringDelim {
    pub open: &'static str,
    pub close: &'static str,
    pub escape: Escape,
}

/// Comment and string delimiters for one language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommentSyntax {
    pub language: Language,
    pub line_markers: &'static [&'static str],
    pub block_markers: &'static [BlockMarker],
    pub string_delims: &'static [StringDelim],
    pub nests_blocks: bool,
    /// `'x'` is a character literal, any other `'` is code (Rust lifetimes and labels).
    pub char_or_lifetime: bool,
    /// `r"..."`, `r#"..."#` raw strings.
    pub raw_strings: bool,
    /// Track bracket depth and line starts for [`Anchor::StatementStart`].
    pub tracks_statements: bool,
}

const C_BLOCK: BlockMarker = BlockMarker {
    open: "/*",
    close: "*/",
    anchor: Anchor::Anywhere,
    escape: Escape::None,
};

const DQ: StringDelim = StringDelim {
    open: "\"",
    close: "\"",
    escape: Escape::Backslash,
};
const SQ: StringDelim = StringDelim {
    open: "'",
    close: "'",
    escape: Escape::Backslash,
};
const BACKTICK_ESC: StringDelim = StringDelim {
    open: "`",
    close: "`",
    escape: Escape::Backslash,
};

static CSHARP: CommentSyntax = CommentSyntax {
    language: Language::CSharp,
    line_markers: &["//"],
    block_markers: &[C_BLOCK],
    string_delims: &[
        StringDelim {
            open: "@\"",
            close: "\"",
            escape: Escape::DoubledClose,
        },
        DQ,
        SQ,
    ],
    nests_blocks: false,
    char_or_lifetime: false,
    raw_strings: false,
    tracks_statements: false,
};

static CPP: CommentSyntax = CommentSyntax {
    language: Language::Cpp,
    line_markers: &["//"],
    block_markers: &[C_BLOCK],
    string_delims: &[DQ, SQ],
    nests_blocks: false,
    char_or_lifetime: false,
    raw_strings: false,
    tracks_statements: false,
};

static GO: CommentSyntax = CommentSyntax {
    language: Language::Go,
    line_markers: &["//"],
    block_markers: &[C_BLOCK],
    string_delims: &[
        DQ,
        SQ,
        StringDelim {
            open: "`",
            close: "`",
            escape: Escape::None,
        },
    ],
    nests_blocks: false,
    char_or_lifetime: false,
    raw_strings: false,
    tracks_statements: false,
};

static JAVA: CommentSyntax = CommentSyntax {
    language: Language::Java,
    line_markers: &["//"],
    block_markers: &[C_BLOCK],
    string_delims: &[
        StringDelim {
            open: "\"\"\"",
            close: "\"\"\"",
            escape: Escape::Backslash,
        },
        DQ,
        SQ,
    ],
    nests_blocks: false,
    char_or_lifetime: false,
    raw_strings: false,
    tracks_statements: false,
};

static JAVASCRIPT: CommentSyntax = CommentSyntax {
    language: Language::JavaScript,
    line_markers: &["//"],
    block_markers: &[C_BLOCK],
    string_delims: &[DQ, SQ, BACKTICK_ESC],
    nests_blocks: false,
    char_or_lifetime: false,
    raw_strings: false,
    tracks_statements: false,
};

static PHP: CommentSyntax = CommentSyntax {
    language: Language::Php,
    line_markers: &["//", "#"],
    block_markers: &[C_BLOCK],
    string_delims: &[DQ, SQ],
    nests_blocks: false,
    char_or_lifetime: false,
    raw_strings: false,
    tracks_statements: false,
};

static PYTHON: CommentSyntax = CommentSyntax {
    language: Language::Python,
    line_markers: &["#"],
    block_markers: &[
        BlockMarker {
            open: "'''",
            close: "'''",
            anchor: Anchor::StatementStart,
            escape: Escape::Backslash,
        },
        BlockMarker {
            open: "\"\"\"",
            close: "\"\"\"",
            anchor: Anchor::StatementStart,
            escape: Escape::Backslash,
        },
    ],
    string_delims: &[
        StringDelim {
            open: "'''",
            close: "'''",
            escape: Escape::Backslash,
        },
        StringDelim {
            open: "\"\"\"",
            close: "\"\"\"",
            escape: Escape::Backslash,
        },
        SQ,
        DQ,
    ],
    nests_blocks: false,
    char_or_lifetime: false,
    raw_strings: false,
    tracks_statements: true,
};

static RUBY: CommentSyntax = CommentSyntax {
    language: Language::Ruby,
    line_markers: &["#"],
    block_markers: &[BlockMarker {
        open: "=begin",
        close: "=end",
        anchor: Anchor::ColumnZero,
        escape: Escape::None,
    }],
    string_delims: &[DQ, SQ],
    nests_blocks: false,
    char_or_lifetime: false,
    raw_strings: false,
    tracks_statements: false,
};

static RUST: CommentSyntax = CommentSyntax {
    language: Language::Rust,
    line_markers: &["//"],
    block_markers: &[C_BLOCK],
    string_delims: &[DQ],
    nests_blocks: true,
    char_or_lifetime: true,
    raw_strings: true,
    tracks_statements: false,
};

static TYPESCRIPT: CommentSyntax = CommentSyntax {
    language: Language::TypeScript,
    line_markers: &["//"],
    block_markers: &[C_BLOCK],
    string_delims: &[DQ, SQ, BACKTICK_ESC],
    nests_blocks: false,
    char_or_lifetime: false,
    raw_strings: false,
    tracks_statements: false,
};

pub fn syntax_for(language: Language) -> &'static CommentSyntax {
    match language {
        Language::CSharp => &CSHARP,
        Language::Cpp => &CPP,
        Language::Go => &GO,
        Language::Java => &JAVA,
        Language::JavaScript => &JAVASCRIPT,
        Language::Php => &PHP,
        Language::Python => &PYTHON,
        Language::Ruby => &RUBY,
        Language::Rust => &RUST,
        Language::TypeScript => &TYPESCRIPT,
    }
}

/// Looks a language up by its corpus name.
pub fn syntax_for_name(name: &str) -> Result<&'static CommentSyntax, LexError> {
    name.parse::<Language>().map(syntax_for)
}

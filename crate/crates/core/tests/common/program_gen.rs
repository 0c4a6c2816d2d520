//! Grammar-driven generator of small programs with known comment labels.
//!
//! Programs are built from statements made of code tokens, string literals and
//! comments. Every fragment carries its ground-truth label, so the expected
//! classification is known by construction.

use codealign::lexer::Language;
use rand::seq::SliceRandom;
use rand::Rng;

pub struct Program {
    pub text: String,
    pub labels: Vec<bool>,
}

struct Builder {
    text: String,
    labels: Vec<bool>,
}

impl Builder {
    fn push(&mut self, s: &str, comment: bool) {
        self.text.push_str(s);
        self.labels.extend(std::iter::repeat_n(comment, s.len()));
    }
    fn code(&mut self, s: &str) {
        self.push(s, false)
    }
    fn comment(&mut self, s: &str) {
        self.push(s, true)
    }
    fn at_line_start(&self) -> bool {
        self.text.is_empty() || self.text.ends_with('\n')
    }
}

const WORDS: &[&str] = &["alpha", "beta", "x", "y1", "count", "_tmp", "value", "résumé", "数据"];
const OPS: &[&str] = &["+", "-", "*", "=", "<", ">", ",", ";", ".", ":", "/", "%", "!", "&&"];

/// Comment-body text that stays inside a comment: quotes and other markers included.
fn noise<R: Rng>(rng: &mut R, forbid: &[&str]) -> String {
    const PIECES: &[&str] = &[
        "note", " ", "'", "\"", "#", "//", "/", "*", "`", "\\n", "TODO", "é", "→", "{", ")", "@", "r#", "=", "begin",
    ];
    loop {
        let n = rng.gen_range(0..8);
        let s: String = (0..n).map(|_| *PIECES.choose(rng).unwrap()).collect();
        if forbid.iter().all(|f| !s.contains(f)) && !s.ends_with('\\') {
            return s;
        }
    }
}

fn string_literal<R: Rng>(rng: &mut R, lang: Language) -> String {
    let body_for = |rng: &mut R, quote: &str, escapes: bool| -> String {
        const PIECES: &[&str] = &["a", " ", "#", "//", "/*", "*/", "'", "\"", "`", "é", "x y"];
        let n = rng.gen_range(0..6);
        let mut s = String::new();
        for _ in 0..n {
            let p = *PIECES.choose(rng).unwrap();
            if p.contains(quote) {
                if escapes {
                    s.push('\\');
                    s.push_str(quote);
                }
            } else {
                s.push_str(p);
            }
        }
        if escapes && rng.gen_bool(0.2) {
            s.push_str("\\\\");
        }
        s
    };
    let choice = rng.gen_range(0..4);
    match (lang, choice) {
        (Language::Rust, 0) => {
            let hashes = "#".repeat(rng.gen_range(0..3));
            let mut body = body_for(rng, "\"", false);
            if !hashes.is_empty() {
                body.push('"');
                body.push_str(" /* ");
            }
            format!("r{hashes}\"{body}\"{hashes}")
        }
        (Language::Rust, 1) => ["'\"'", "'\\''", "'#'", "'/'", "'\\\\'", "'é'", "'\\u{1F600}'"]
            .choose(rng)
            .unwrap()
            .to_string(),
        (Language::CSharp, 0) => {
            let body = body_for(rng, "\"", false);
            format!("@\"{}\"\"{}\"", body, "\\")
        }
        (Language::Go, 0) => format!("`{}`", body_for(rng, "`", false)),
        (Language::JavaScript | Language::TypeScript, 0) => {
            format!("`{}\n{}`", body_for(rng, "`", true), body_for(rng, "`", true))
        }
        (Language::Java, 0) => format!("\"\"\"\n{}\n\"\"\"", body_for(rng, "\"", true)),
        (Language::Python, 0) => format!("'''{}\n{}'''", body_for(rng, "'", true), body_for(rng, "'", true)),
        (_, 1) if !matches!(lang, Language::Rust) => format!("'{}'", body_for(rng, "'", true)),
        _ => format!("\"{}\"", body_for(rng, "\"", true)),
    }
}

fn line_marker(lang: Language, rng: &mut impl Rng) -> &'static str {
    match lang {
        Language::Python | Language::Ruby => "#",
        Language::Php => ["#", "//"][rng.gen_range(0..2)],
        Language::Rust => ["//", "///", "//!"][rng.gen_range(0..3)],
        _ => ["//", "///"][rng.gen_range(0..2)],
    }
}

fn block_comment<R: Rng>(rng: &mut R, lang: Language) -> Option<String> {
    match lang {
        Language::Python | Language::Ruby => None,
        Language::Rust if rng.gen_bool(0.4) => {
            let inner = format!("/* {} */", noise(rng, &["/*", "*/"]));
            Some(format!(
                "/* {} {} {} */",
                noise(rng, &["/*", "*/"]),
                inner,
                noise(rng, &["/*", "*/"])
            ))
        }
        _ => {
            let nl = if rng.gen_bool(0.3) { "\n" } else { "" };
            Some(format!(
                "/* {} {} {} */",
                noise(rng, &["/*", "*/"]),
                nl,
                noise(rng, &["/*", "*/"])
            ))
        }
    }
}

fn code_tokens<R: Rng>(rng: &mut R, b: &mut Builder, lang: Language, count: usize) {
    for k in 0..count {
        if k > 0 {
            b.code(" ");
        }
        let roll = if k == 0 && lang == Language::Python {
            0
        } else {
            rng.gen_range(0..10)
        };
        match roll {
            0..=3 => b.code(WORDS.choose(rng).unwrap()),
            4..=6 => b.code(OPS.choose(rng).unwrap()),
            7 => b.code(&rng.gen_range(0..1000).to_string()),
            8 => {
                let s = string_literal(rng, lang);
                b.code(&s);
            }
            _ => {
                if lang == Language::Rust {
                    b.code(["&'a", "'outer:", "<'b>"].choose(rng).unwrap());
                } else {
                    b.code("(x)");
                }
            }
        }
    }
}

fn statement<R: Rng>(rng: &mut R, b: &mut Builder, lang: Language, indent: &str) {
    b.code(indent);
    match rng.gen_range(0..10) {
        0..=4 => {
            let n = rng.gen_range(1..6);
            code_tokens(rng, b, lang, n);
            if rng.gen_bool(0.4) {
                b.code(" ");
                let c = format!("{}{}", line_marker(lang, rng), noise(rng, &["\n"]));
                b.comment(&c);
            } else if rng.gen_bool(0.3) {
                if let Some(c) = block_comment(rng, lang) {
                    b.code(" ");
                    b.comment(&c);
                    b.code(" ");
                    code_tokens(rng, b, lang, 1);
                }
            }
        }
        5 | 6 => {
            let c = format!("{}{}", line_marker(lang, rng), noise(rng, &["\n"]));
            b.comment(&c);
        }
        7 => match lang {
            Language::Python => {
                let q = ["'''", "\"\"\""][rng.gen_range(0..2)];
                let body = noise(rng, &[q, "\\"]);
                let body2 = noise(rng, &[q, "\\"]);
                b.comment(&format!("{q} {body}\n{indent}{body2} {q}"));
            }
            Language::Ruby => {
                if b.text.len() >= indent.len() {
                    b.text.truncate(b.text.len() - indent.len());
                    b.labels.truncate(b.labels.len() - indent.len());
                }
                if b.at_line_start() {
                    let body = noise(rng, &["\n"]);
                    b.comment(&format!(
                        "=begin {body}\n{}\n=end {}",
                        noise(rng, &["\n"]),
                        noise(rng, &["\n"])
                    ));
                } else {
                    code_tokens(rng, b, lang, 1);
                }
            }
            _ => {
                let c = block_comment(rng, lang).unwrap();
                b.comment(&c);
            }
        },
        8 if lang == Language::Python => {
            // multi-line call: triple quotes inside brackets are strings
            b.code("call(");
            b.code("\n");
            b.code(indent);
            b.code("    '''arg # not comment\n''',");
            b.code(" ");
            let c = format!("# {}", noise(rng, &["\n"]));
            b.comment(&c);
            b.code("\n");
            b.code(indent);
            b.code(")");
        }
        _ => {
            let n = rng.gen_range(1..4);
            code_tokens(rng, b, lang, n);
        }
    }
}

pub fn generate<R: Rng>(rng: &mut R, lang: Language) -> Program {
    let mut b = Builder {
        text: String::new(),
        labels: Vec::new(),
    };
    let lines = rng.gen_range(1..10);
    for i in 0..lines {
        let indent = ["", "    ", "\t"][rng.gen_range(0..3)];
        if rng.gen_bool(0.1) {
            b.code("\n");
            continue;
        }
        statement(rng, &mut b, lang, indent);
        if i + 1 < lines || rng.gen_bool(0.5) {
            b.code("\n");
        }
    }
    Program {
        text: b.text,
        labels: b.labels,
    }
}

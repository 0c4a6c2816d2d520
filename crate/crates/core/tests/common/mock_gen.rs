//! Random mock scripts, adversarial ones included.

use codealign::backend::mock::{MatchSpec, Position};
use codealign::backend::{MockAction, MockRule};
use codealign::lexer::Language;
use rand::seq::SliceRandom;
use rand::Rng;

fn markers(lang: Language) -> (&'static [&'static str], &'static [(&'static str, &'static str)]) {
    match lang {
        Language::Python => (&["#"], &[("\"\"\"", "\"\"\""), ("'''", "'''")]),
        Language::Ruby => (&["#"], &[("=begin", "\n=end")]),
        Language::Php => (&["#", "//"], &[("/*", "*/")]),
        _ => (&["//", "///"], &[("/*", "*/"), ("/**", "*/")]),
    }
}

fn words<R: Rng>(rng: &mut R) -> String {
    const W: &[&str] = &[
        "note", "the", "x", "=", "1", "*/", "/*", "\"", "'", "`", "#", "//", "\\", "é", "```", "{", "<|EOT|>", "=end",
    ];
    let n = rng.gen_range(0..6);
    (0..n).map(|_| *W.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// A random action for `lang`: plausible comments, partial or broken markers,
/// code-like text, unterminated blocks, EOT and silence.
pub fn action<R: Rng>(rng: &mut R, lang: Language) -> MockAction {
    let (line, block) = markers(lang);
    let indent = ["", "    ", "\t"][rng.gen_range(0..3)];
    match rng.gen_range(0..12) {
        0 | 1 => MockAction::Comment(format!("{indent}{} {}", line.choose(rng).unwrap(), words(rng))),
        2 => {
            let (open, close) = block.choose(rng).unwrap();
            MockAction::Raw(format!("{indent}{open} {}\n{} {close}\n", words(rng), words(rng)))
        }
        3 => {
            let (open, _) = block.choose(rng).unwrap();
            MockAction::Raw(format!("{indent}{open} {}", words(rng)))
        }
        4 => {
            let (open, close) = block.choose(rng).unwrap();
            MockAction::Raw(format!("{open} {} {close} a = 999\n", words(rng)))
        }
        5 => MockAction::Code(format!("{indent}a = 999 {}", words(rng))),
        6 => {
            let m = line.choose(rng).unwrap();
            let partial = &m[..m.len() - 1];
            MockAction::Raw(format!("{partial}\n"))
        }
        7 => MockAction::Eot,
        8 => MockAction::Raw(format!("{} {}\n{}\n", line[0], words(rng), words(rng))),
        9 => MockAction::Raw(words(rng)),
        10 => MockAction::Comment(format!("{} {}\\", line[0], words(rng))),
        _ => MockAction::Nothing,
    }
}

pub fn script<R: Rng>(rng: &mut R, lang: Language) -> Vec<MockRule> {
    let n = rng.gen_range(0..4);
    (0..n)
        .map(|_| {
            let when = match rng.gen_range(0..5) {
                0 => MatchSpec::Keyword(Position::First),
                1 => MatchSpec::Keyword(Position::End),
                2 => MatchSpec::Pattern {
                    pattern: Some(["^\\s", "=", "[a-z]", "\\d$", "#|//"].choose(rng).unwrap().to_string()),
                    position: Position::Any,
                },
                _ => MatchSpec::Keyword(Position::Any),
            };
            MockRule::new(when, action(rng, lang))
        })
        .collect()
}

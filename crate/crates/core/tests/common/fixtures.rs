//! Corpora and mock scripts shared by the pipeline and acceptance tests.

use codealign::backend::mock::{MatchSpec, Position};
use codealign::backend::{MockAction, MockRule};
use codealign::corpus::CodeDocument;
use codealign::lexer::Language;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample(lang: Language, i: usize) -> String {
    match lang {
        Language::Python => {
            format!("def f{i}(a, b):\n    s = '# not a comment'\n    return a + b  # sum\n\nprint(f{i}(1, 2))\n")
        }
        Language::Ruby => format!("def f{i}(a)\n  a * 2 # double\nend\n=begin\nold\n=end\nputs f{i}(3)\n"),
        Language::Rust => format!("fn f{i}(a: u32) -> u32 {{\n    let s = \"/* no */\";\n    a + s.len() as u32\n}}\n"),
        Language::Go => format!("package main\n\nfunc f{i}(a int) int {{\n\treturn a * 2 // double\n}}\n"),
        Language::Php => format!("<?php\nfunction f{i}($a) {{\n    return $a; # same\n}}\n"),
        Language::Cpp => format!("#include <cstdio>\nint f{i}(int a) {{\n    return a / 2; /* half */\n}}\n"),
        Language::Java => format!("class C{i} {{\n    int f(int a) {{\n        return a;\n    }}\n}}\n"),
        Language::CSharp => format!("class C{i}\n{{\n    int F(int a) => a;\n}}\n"),
        Language::JavaScript => format!("function f{i}(a) {{\n  const u = `x // y`;\n  return a;\n}}\n"),
        Language::TypeScript => format!("export function f{i}(a: number): number {{\n  return a;\n}}\n"),
    }
}

fn comment_for(lang: Language) -> &'static str {
    match lang {
        Language::Python | Language::Ruby => "# explain the next line",
        _ => "// explain the next line",
    }
}

/// Twenty documents covering every language, with CRLF, a skipped document
/// and an empty one.
pub fn golden_corpus() -> Vec<CodeDocument> {
    let mut docs = Vec::new();
    for i in 0..17 {
        let lang = Language::ALL[i % 10];
        let mut content = sample(lang, i);
        if i == 3 {
            content = "skip_this = 1\n".into();
        }
        if i == 7 {
            content = content.replace('\n', "\r\n");
        }
        docs.push(CodeDocument::new(format!("g{i:02}"), lang, content));
    }
    docs.push(CodeDocument::new("g17", Language::Python, ""));
    docs.push(CodeDocument {
        id: "g18".into(),
        language: "cobol".into(),
        content: "DISPLAY 'HI'.\n".into(),
        meta: None,
    });
    docs.push(CodeDocument::new("g19", Language::Rust, "/// doc\nfn main() {}"));
    docs
}

/// Comments before every line, EOT for documents starting with `skip_this`,
/// and a trailing comment.
pub fn golden_script() -> Vec<MockRule> {
    let mut rules = vec![MockRule::new(
        MatchSpec::Pattern {
            pattern: Some("^skip_this".into()),
            position: Position::First,
        },
        MockAction::Eot,
    )];
    rules.push(MockRule::pattern(
        "^\\s*(def|fn|func|function|class|int|export)\\b",
        MockAction::Comment("# explain the next line".into()),
    ));
    rules.push(MockRule::pattern(
        "^\\s*(return|let|const|a )",
        MockAction::Raw("    /* step\n       by step */\n".into()),
    ));
    rules.push(MockRule::pattern(
        "^\\s*#include",
        MockAction::Code("int z = 0;".into()),
    ));
    rules.push(MockRule::at(
        Position::End,
        MockAction::Comment("// end of file".into()),
    ));
    rules
}

/// Comment rule for one language: used where a comment must be valid.
pub fn comment_rule(lang: Language) -> MockRule {
    MockRule::any(MockAction::Comment(comment_for(lang).into()))
}

/// Random documents of plain assignments, some already commented.
pub fn seeded_corpus(seed: u64, n: usize, lang: Language) -> Vec<CodeDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let marker = if matches!(lang, Language::Python | Language::Ruby) {
        "#"
    } else {
        "//"
    };
    (0..n)
        .map(|i| {
            let lines = rng.gen_range(1..12);
            let mut content = String::new();
            for l in 0..lines {
                let name = ["a", "b", "count", "total", "x"].choose(&mut rng).unwrap();
                content.push_str(&format!("{name}{l} = {}", rng.gen_range(0..1000)));
                if rng.gen_bool(0.2) {
                    content.push_str(&format!("  {marker} keep"));
                }
                content.push('\n');
            }
            CodeDocument::new(format!("s{i:04}"), lang, content)
        })
        .collect()
}

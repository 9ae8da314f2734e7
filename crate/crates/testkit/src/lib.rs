//! Shared test support: corpus fixtures, seeded mutations, identifier
//! renaming and random model generators.

pub mod gen;
pub mod oracle;

use std::collections::BTreeSet;
use std::path::PathBuf;

use a4c_core::dsl::{lexer, parse, KEYWORDS};
use a4c_core::{resolve, validate, Diagnostic, ResolvedModel};

pub const FIXTURES: [&str; 3] = ["testgen", "recovery", "resell"];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

pub fn fixture_path(name: &str) -> PathBuf {
    corpus_dir().join(format!("{name}.a4c"))
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// Parses and resolves `text`, panicking with the diagnostics on failure.
pub fn load_text(text: &str, file: &str) -> ResolvedModel {
    let parsed = parse(text, file);
    let model = parsed
        .model
        .unwrap_or_else(|| panic!("{file} does not parse: {:#?}", parsed.diagnostics));
    resolve(model).unwrap_or_else(|d| panic!("{file} does not resolve: {d:#?}"))
}

pub fn load(name: &str) -> ResolvedModel {
    load_text(&fixture(name), &format!("{name}.a4c"))
}

/// Every diagnostic the pipeline produces for `text`: parse, resolution
/// or validation, whichever stage stops first.
pub fn diagnostics(text: &str, file: &str) -> Vec<Diagnostic> {
    let parsed = parse(text, file);
    let Some(model) = parsed.model else {
        return parsed.diagnostics;
    };
    match resolve(model) {
        Ok(m) => validate::check(&m),
        Err(d) => d,
    }
}

pub fn codes(diags: &[Diagnostic]) -> BTreeSet<String> {
    diags.iter().map(|d| d.code.clone()).collect()
}

/// A seeded defect: text edits on a fixture and the exact set of codes
/// they must produce.
#[derive(Debug, Clone, Copy)]
pub struct Mutation {
    pub name: &'static str,
    pub fixture: &'static str,
    pub edits: &'static [(&'static str, &'static str)],
    pub expected: &'static [&'static str],
}

impl Mutation {
    pub fn apply_to(&self, text: &str) -> String {
        let mut out = text.to_string();
        for (find, replace) in self.edits {
            let n = out.matches(find).count();
            assert_eq!(n, 1, "mutation {}: `{find}` occurs {n} times", self.name);
            out = out.replacen(find, replace, 1);
        }
        out
    }

    pub fn apply(&self) -> String {
        self.apply_to(&fixture(self.fixture))
    }

    pub fn expected(&self) -> BTreeSet<String> {
        self.expected.iter().map(|s| s.to_string()).collect()
    }

    pub fn file(&self) -> String {
        format!("{}.a4c", self.fixture)
    }
}

const SUMMARIZE_PROMPT: &str = "            prompt {
                static role = \"You summarize test executions as IO or NIO.\"
                dynamic code = \"Test script: {TestCode}\"
                dynamic log = \"Execution log: {TestLog}\"
            }
";

pub const MUTATIONS: &[Mutation] = &[
    Mutation {
        name: "V1 call to a missing task",
        fixture: "testgen",
        edits: &[("call fix = fix on Developer", "call fix = repair on Developer")],
        expected: &["E101"],
    },
    Mutation {
        name: "V2 conductor calls its own task recursively",
        fixture: "resell",
        edits: &[("call query = createQuery {", "call query = estimate {")],
        expected: &["E102"],
    },
    Mutation {
        name: "V3 leaf task without prompt",
        fixture: "testgen",
        edits: &[(SUMMARIZE_PROMPT, "")],
        expected: &["E103"],
    },
    Mutation {
        name: "V4 report never produced",
        fixture: "testgen",
        edits: &[(
            "call test = test on TestPipeline { in TestCode out Report }",
            "call test = test on TestPipeline { in TestCode out TestLog }",
        )],
        expected: &["E104", "W105"],
    },
    Mutation {
        name: "V4 fix consumes an unavailable artifact",
        fixture: "testgen",
        edits: &[(
            "call fix = fix on Developer { in TestCode, Report out TestCode }",
            "call fix = fix on Developer { in TestCode, TestLog out TestCode }",
        )],
        expected: &["E104"],
    },
    Mutation {
        name: "V5 declared output never produced",
        fixture: "testgen",
        edits: &[(
            "task execute {\n            in TestCode\n            out TestLog\n",
            "task execute {\n            in TestCode\n            out TestLog, Report\n",
        )],
        expected: &["W105"],
    },
    Mutation {
        name: "V6 decision loses its retry branch",
        fixture: "testgen",
        edits: &[("                gate -> fix [Report == NIO]\n", "")],
        expected: &["E106"],
    },
    Mutation {
        name: "V6 decision loses its exit branch",
        fixture: "testgen",
        edits: &[("                gate -> end [Report == IO]\n", "")],
        expected: &["E106", "W113"],
    },
    Mutation {
        name: "V7 element-wise over a plain artifact",
        fixture: "recovery",
        edits: &[("each RosNodeList", "each SourceCode")],
        expected: &["E107"],
    },
    Mutation {
        name: "V8 misspelled tool",
        fixture: "testgen",
        edits: &[("JenkinsTool.run", "JenkinsTol.run")],
        expected: &["E108"],
    },
    Mutation {
        name: "V9 no default LLM",
        fixture: "testgen",
        edits: &[("version \"gpt-4o\" default", "version \"gpt-4o\"")],
        expected: &["W109"],
    },
    Mutation {
        name: "V10 missing link to the CI host",
        fixture: "testgen",
        edits: &[("        link GeneratorService -> JenkinsHost : \"HTTP\" : TestCode\n", "")],
        expected: &["E110"],
    },
    Mutation {
        name: "V11 flow carries an internal artifact",
        fixture: "testgen",
        edits: &[(
            "flow TestScriptGenerator -> SystemUnderTest : TestCode",
            "flow TestScriptGenerator -> SystemUnderTest : TestLog",
        )],
        expected: &["W111"],
    },
    Mutation {
        name: "V12 datastore never read",
        fixture: "testgen",
        edits: &[
            ("                TestCodeStore.read -> test\n", ""),
            ("                TestCodeStore.read -> fix\n", ""),
        ],
        expected: &["W112"],
    },
    Mutation {
        name: "V13 unguarded loop back to the query",
        fixture: "resell",
        edits: &[(
            "                integrate -> end\n",
            "                integrate -> end\n                integrate -> query\n",
        )],
        expected: &["W113"],
    },
];

/// Consistently renames every non-keyword identifier via `rename`.
/// String contents, including prompt placeholders, are renamed too so
/// that placeholders keep matching their inputs.
pub fn rename_identifiers(text: &str, rename: impl Fn(&str) -> String) -> String {
    let lexed = lexer::lex(text);
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for tok in &lexed.tokens {
        let replacement = match tok.kind {
            lexer::TokenKind::Ident if !KEYWORDS.contains(&tok.text.as_str()) => rename(&tok.text),
            lexer::TokenKind::Str => {
                let mut s = tok.text.clone();
                for ph in a4c_core::model::placeholders(&tok.text) {
                    s = s.replace(&format!("{{{ph}}}"), &format!("{{{}}}", rename(ph)));
                }
                lexer::quote(&s)
            }
            _ => continue,
        };
        out.push_str(&text[last..tok.range.start]);
        out.push_str(&replacement);
        last = tok.range.end;
    }
    out.push_str(&text[last..]);
    out
}

/// Renames `Name` to `QxName` throughout.
pub fn alpha_rename(text: &str) -> String {
    rename_identifiers(text, |n| format!("Qx{n}"))
}

use std::collections::BTreeSet;

use a4c_core::validate::{self, RuleRegistry};
use a4c_testkit::{codes, diagnostics, fixture, load, Mutation, FIXTURES, MUTATIONS};

#[test]
fn corpus_fixtures_are_clean() {
    for name in FIXTURES {
        let m = load(name);
        let diags = validate::check(&m);
        assert!(diags.is_empty(), "{name}: {diags:#?}");
        assert!(validate::is_valid(&m));
    }
}

#[test]
fn every_rule_has_a_mutation() {
    let registry = RuleRegistry::standard();
    let covered: BTreeSet<&str> = MUTATIONS.iter().flat_map(|m| m.expected.iter().copied()).collect();
    for rule in registry.rules() {
        assert!(covered.contains(rule.code()), "no mutation for {}", rule.id());
    }
    assert!(MUTATIONS.len() >= 13);
}

#[test]
fn mutations_produce_exactly_the_expected_codes() {
    for m in MUTATIONS {
        let diags = diagnostics(&m.apply(), &m.file());
        assert_eq!(codes(&diags), m.expected(), "{}: {diags:#?}", m.name);
    }
}

#[test]
fn e_mutations_make_models_invalid() {
    for m in MUTATIONS.iter().filter(|m| m.expected.iter().any(|c| c.starts_with('E'))) {
        let diags = diagnostics(&m.apply(), &m.file());
        assert!(diags.iter().any(|d| d.is_error()), "{}", m.name);
    }
}

fn overlaps(a: &Mutation, b: &Mutation) -> bool {
    a.edits
        .iter()
        .any(|(fa, _)| b.edits.iter().any(|(fb, _)| fa.contains(fb) || fb.contains(fa)))
}

fn key(d: &a4c_core::Diagnostic) -> (String, String) {
    (d.code.clone(), d.message.clone())
}

/// Pairs whose edits touch the same control path. Their combined code
/// set is pinned instead of being the union.
const DEPENDENT: &[(&str, &str, &[&str])] = &[
    // the exit edge is gone, so end is unreachable and output checks are skipped
    ("V4 report never produced", "V6 decision loses its exit branch", &["E104", "E106", "W113"]),
    // `test` now produces TestLog, which is exactly what `fix` starts consuming
    ("V4 report never produced", "V4 fix consumes an unavailable artifact", &["E104", "W105"]),
    // `fix` becomes unreachable, so its inputs are not checked
    ("V4 fix consumes an unavailable artifact", "V6 decision loses its retry branch", &["E106"]),
    // the misspelled tool has no host, so the invoke crosses no link
    ("V8 misspelled tool", "V10 missing link to the CI host", &["E108"]),
    // no edge leaves the decision, so the loop disappears
    ("V6 decision loses its retry branch", "V6 decision loses its exit branch", &["E106"]),
];

#[test]
fn mutations_are_pairwise_independent() {
    let mut dependent_seen = 0;
    for (i, a) in MUTATIONS.iter().enumerate() {
        for b in &MUTATIONS[i + 1..] {
            if a.fixture != b.fixture || overlaps(a, b) {
                continue;
            }
            let both = b.apply_to(&a.apply_to(&fixture(a.fixture)));
            let diags = diagnostics(&both, &a.file());
            if let Some((_, _, pinned)) = DEPENDENT.iter().find(|(x, y, _)| *x == a.name && *y == b.name) {
                let pinned: BTreeSet<String> = pinned.iter().map(|s| s.to_string()).collect();
                assert_eq!(codes(&diags), pinned, "{} + {}", a.name, b.name);
                dependent_seen += 1;
                continue;
            }
            let expected: BTreeSet<String> = a.expected().union(&b.expected()).cloned().collect();
            assert_eq!(codes(&diags), expected, "{} + {}", a.name, b.name);
            let mut only_b: Vec<_> = diagnostics(&b.apply(), &b.file()).iter().map(key).collect();
            let mut removed = Vec::new();
            for d in &diags {
                match only_b.iter().position(|k| *k == key(d)) {
                    Some(p) => {
                        only_b.remove(p);
                    }
                    None => removed.push(d.clone()),
                }
            }
            assert!(only_b.is_empty(), "{} + {}: {only_b:?}", a.name, b.name);
            assert_eq!(codes(&removed), a.expected(), "undoing {} next to {}", a.name, b.name);
        }
    }
    assert_eq!(dependent_seen, DEPENDENT.len());
}

#[test]
fn nio_removal_reports_only_decision_problems() {
    let m = MUTATIONS.iter().find(|m| m.name.starts_with("V6 decision loses its retry")).unwrap();
    let diags = diagnostics(&m.apply(), &m.file());
    assert!(diags.iter().any(|d| d.message.contains("decision `gate` has 1 outgoing edge")));
}

#[test]
fn check_is_deterministic() {
    for m in MUTATIONS {
        let text = m.apply();
        assert_eq!(diagnostics(&text, "x.a4c"), diagnostics(&text, "x.a4c"));
    }
}

#[test]
fn spans_point_into_the_file() {
    for m in MUTATIONS {
        let text = m.apply();
        let lines = text.lines().count() as u32;
        for d in diagnostics(&text, &m.file()) {
            assert_eq!(d.span.file, m.file());
            assert!(d.span.start.line >= 1 && d.span.start.line <= lines, "{d}");
        }
    }
}

#[test]
fn registry_selection() {
    let only = RuleRegistry::standard().retain(&["v4", "W113"]).unwrap();
    let ids: Vec<&str> = only.rules().map(|r| r.id()).collect();
    assert_eq!(ids, ["V4", "V13"]);
    assert!(RuleRegistry::standard().retain(&["V99"]).is_err());
}

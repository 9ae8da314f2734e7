use std::collections::{BTreeMap, BTreeSet};

use a4c_core::analysis::{classify, impact::impact_of, loop_facts, Direction, ImpactGraph, Pattern};
use a4c_core::dsl::{format, parse, parse_roundtrip};
use a4c_core::graph::{elementary_cycles, strongly_connected};
use a4c_core::model::*;
use a4c_core::{validate, ResolvedModel, TaskKey};
use a4c_testkit::gen::{random_digraph, random_model, sample, GenConfig};
use a4c_testkit::load_text;
use a4c_testkit::oracle::{backtrack_cycles, brute_cycles, distances, expected_impact, fixpoint, impact_edges};
use proptest::prelude::*;

fn model(seed: u64) -> ResolvedModel {
    load_text(&random_model(seed, GenConfig::default()), "gen.a4c")
}

// ---- formatter -------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn format_is_idempotent_and_preserves_structure(seed in any::<u64>()) {
        let text = random_model(seed, GenConfig { comments: true, ..GenConfig::default() });
        let once = format(&text).unwrap();
        let twice = format(&once).unwrap();
        prop_assert_eq!(&once, &twice);
        let a = parse(&text, "a.a4c").model.unwrap();
        let b = parse(&once, "b.a4c").model.unwrap();
        prop_assert!(a.structurally_eq(&b), "format changed the model:\n{}", once);
        prop_assert_eq!(text.matches("// note").count(), once.matches("// note").count());
    }

    #[test]
    fn printed_model_parses_back(seed in any::<u64>()) {
        let m = parse(&random_model(seed, GenConfig::default()), "a.a4c").model.unwrap();
        let printed = parse_roundtrip(&m);
        let back = parse(&printed, "b.a4c").model.unwrap();
        prop_assert!(m.structurally_eq(&back), "{}", printed);
    }
}

// ---- impact oracle -----------------------------------------------------------

fn seeds(m: &Model, seed: u64, count: usize) -> Vec<ElementRef> {
    sample(&m.elements(), seed, count)
}

#[test]
fn impact_matches_naive_fixpoint() {
    for s in 0..200u64 {
        let m = model(s);
        let edges = impact_edges(&m);
        let graph = ImpactGraph::new(&m);
        for seed in seeds(&m, s, 20) {
            let down = fixpoint(&edges, &seed, false);
            let up = fixpoint(&edges, &seed, true);
            let dd = distances(&edges, &seed, false);
            let du = distances(&edges, &seed, true);
            for dir in [Direction::Down, Direction::Up, Direction::Both] {
                let closure: BTreeSet<ElementRef> = match dir {
                    Direction::Down => down.clone(),
                    Direction::Up => up.clone(),
                    Direction::Both => down.union(&up).cloned().collect(),
                };
                let expected = expected_impact(&m, &edges, &seed, dir);

                let report = impact_of(&m, &graph, seed.clone(), dir);
                assert_eq!(report.elements(), expected, "model {s}, seed {seed}, {dir}");
                for a in &report.affected {
                    let Some(last) = a.path.last() else { panic!("empty path") };
                    assert_eq!(last, &a.element);
                    if !closure.contains(&a.element) {
                        continue;
                    }
                    let want = match dir {
                        Direction::Down => dd[&a.element],
                        Direction::Up => du[&a.element],
                        Direction::Both => {
                            dd.get(&a.element).copied().unwrap_or(usize::MAX).min(du.get(&a.element).copied().unwrap_or(usize::MAX))
                        }
                    };
                    assert_eq!(a.path.len(), want, "model {s}, seed {seed}, {dir}: path to {}", a.element);
                    let hops: Vec<&ElementRef> = std::iter::once(&seed).chain(&a.path).collect();
                    let valid = |up: bool| {
                        hops.windows(2).all(|w| {
                            let e = if up { (w[1].clone(), w[0].clone()) } else { (w[0].clone(), w[1].clone()) };
                            edges.contains(&e)
                        })
                    };
                    let ok = match dir {
                        Direction::Down => valid(false),
                        Direction::Up => valid(true),
                        Direction::Both => valid(false) || valid(true),
                    };
                    assert!(ok, "model {s}, seed {seed}, {dir}: broken path to {}", a.element);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn impact_is_transitive_and_dual(s in 0u64..10_000) {
        let m = model(s);
        let edges = impact_edges(&m);
        let graph = ImpactGraph::new(&m);
        for seed in seeds(&m, s, 6) {
            let report = impact_of(&m, &graph, seed.clone(), Direction::Down).elements();
            for x in fixpoint(&edges, &seed, false) {
                let mut sub = impact_of(&m, &graph, x.clone(), Direction::Down).elements();
                sub.remove(&seed);
                prop_assert!(sub.is_subset(&report), "{} -> {}", seed, x);
                prop_assert!(impact_of(&m, &graph, x.clone(), Direction::Up).elements().contains(&seed));
            }
            let both = impact_of(&m, &graph, seed.clone(), Direction::Both).elements();
            let up = impact_of(&m, &graph, seed.clone(), Direction::Up).elements();
            prop_assert!(report.is_subset(&both) && up.is_subset(&both));
        }
    }
}

/// Adds a context flow after the existing ones and an extra input to the
/// first task, so every old element keeps its identity.
fn with_more_edges(text: &str) -> String {
    let ctx = text.find("    context {\n").expect("context");
    let close = ctx + text[ctx..].find("\n    }\n").expect("context end") + 1;
    let mut out = format!("{}        flow U0 -> S0 : A0\n{}", &text[..close], &text[close..]);
    let at = out.find("\n            in ").expect("task input") + 1;
    let end = at + out[at..].find('\n').expect("line end");
    if !out[at..end].split([' ', ',']).any(|w| w == "A0") {
        out.insert_str(end, ", A0");
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn impact_is_monotone_under_added_edges(s in 0u64..100_000) {
        let text = random_model(s, GenConfig::default());
        let small = load_text(&text, "small.a4c");
        let large = load_text(&with_more_edges(&text), "large.a4c");
        let (gs, gl) = (ImpactGraph::new(&small), ImpactGraph::new(&large));
        for seed in small.elements() {
            for dir in [Direction::Up, Direction::Down, Direction::Both] {
                let before = impact_of(&small, &gs, seed.clone(), dir).elements();
                let after = impact_of(&large, &gl, seed.clone(), dir).elements();
                prop_assert!(before.is_subset(&after), "{} {}: {:?}", seed, dir, before.difference(&after).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn classify_is_total_and_fan_out_takes_precedence(s in any::<u64>()) {
        let m = model(s);
        for (agent, task) in m.tasks().filter(|(_, t)| t.is_composite()) {
            let key = TaskKey::new(&agent.name.name, &task.name.name);
            let class = classify(&m, &key);
            prop_assert!(class.is_ok(), "{}", key);
            if task.calls().any(|(_, c)| c.element_wise()) {
                prop_assert_eq!(class.unwrap().value, Pattern::FanOut);
            }
        }
    }
}

// ---- cycles ----------------------------------------------------------------

fn mutually_reachable(succ: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let n = succ.len();
    let mut r = vec![vec![false; n]; n];
    for (v, row) in r.iter_mut().enumerate() {
        row[v] = true;
        for &w in &succ[v] {
            row[w] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn johnson_matches_brute_force(seed in any::<u64>(), n in 1usize..=6, density in 0.1f64..0.6) {
        let g = random_digraph(seed, n, density);
        let mut got = elementary_cycles(&g);
        got.sort();
        prop_assert_eq!(got, brute_cycles(&g));
    }

    #[test]
    fn johnson_matches_backtracking_up_to_30_nodes(seed in any::<u64>(), n in 7usize..=30, degree in 0.5f64..1.6) {
        let g = random_digraph(seed, n, degree / n as f64);
        prop_assert_eq!(elementary_cycles(&g), backtrack_cycles(&g));
    }

    #[test]
    fn backtracking_agrees_with_brute_force(seed in any::<u64>(), n in 1usize..=6, density in 0.1f64..0.7) {
        let g = random_digraph(seed, n, density);
        prop_assert_eq!(backtrack_cycles(&g), brute_cycles(&g));
    }

    #[test]
    fn tarjan_matches_mutual_reachability(seed in any::<u64>(), n in 1usize..=8, density in 0.05f64..0.5) {
        let g = random_digraph(seed, n, density);
        let r = mutually_reachable(&g);
        let comps = strongly_connected(&g);
        let mut seen = vec![false; n];
        for c in &comps {
            for &v in c {
                prop_assert!(!seen[v]);
                seen[v] = true;
                for &w in c {
                    prop_assert!(r[v][w] && r[w][v]);
                }
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
        for i in 0..n {
            for j in 0..n {
                let same = comps.iter().any(|c| c.contains(&i) && c.contains(&j));
                prop_assert_eq!(same, r[i][j] && r[j][i]);
            }
        }
    }
}

// ---- loops and V13 ---------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn loop_facts_match_cycles_and_unguarded_warnings(s in any::<u64>()) {
        let m = model(s);
        let mut unguarded = 0;
        for agent in &m.agents {
            for task in &agent.tasks {
                let Some(body) = &task.body else { continue };
                let idx: BTreeMap<&str, usize> =
                    body.nodes.iter().enumerate().map(|(i, n)| (n.id.name.as_str(), i)).collect();
                let mut succ = vec![Vec::new(); body.nodes.len()];
                for e in &body.edges {
                    if let (Endpoint::Node(a), Endpoint::Node(b)) = (&e.from, &e.to) {
                        if !succ[idx[a.name.as_str()]].contains(&idx[b.name.as_str()]) {
                            succ[idx[a.name.as_str()]].push(idx[b.name.as_str()]);
                        }
                    }
                }
                let want: BTreeSet<Vec<String>> = brute_cycles(&succ)
                    .into_iter()
                    .map(|c| c.iter().map(|&i| body.nodes[i].id.name.clone()).collect())
                    .collect();
                let facts = loop_facts(task);
                let got: BTreeSet<Vec<String>> = facts.iter().map(|f| f.cycle.clone()).collect();
                prop_assert_eq!(got.len(), facts.len(), "duplicate cycles");
                prop_assert_eq!(&got, &want);
                for f in &facts {
                    let inside: BTreeSet<&str> = f.cycle.iter().map(String::as_str).collect();
                    let label = |e: &Endpoint| match e {
                        Endpoint::Node(n) => n.name.clone(),
                        Endpoint::End => "end".into(),
                        _ => String::new(),
                    };
                    let exits: Vec<(String, String, String)> = body
                        .edges
                        .iter()
                        .filter(|e| matches!(e.from, Endpoint::Node(_)) && !matches!(e.to, Endpoint::StoreWrite(_)))
                        .filter(|e| inside.contains(label(&e.from).as_str()) && !inside.contains(label(&e.to).as_str()))
                        .filter_map(|e| Some((label(&e.from), label(&e.to), e.guard.as_ref()?.to_string())))
                        .collect();
                    let got: Vec<(String, String, String)> =
                        f.exits.iter().map(|x| (x.from.clone(), x.to.clone(), x.guard.clone())).collect();
                    prop_assert_eq!(got, exits);
                    if f.exits.is_empty() {
                        unguarded += 1;
                    }
                }
            }
        }
        let w113 = validate::check(&m).iter().filter(|d| d.code == "W113").count();
        prop_assert_eq!(w113, unguarded);
    }
}

// ---- V4 on straight-line bodies --------------------------------------------

fn straight_line(task_inputs: &[usize], calls: &[(Vec<usize>, Vec<usize>)]) -> String {
    let names = |xs: &[usize]| xs.iter().map(|i| format!("A{i}")).collect::<Vec<_>>().join(", ");
    let mut s = String::from("model \"line\" {\n  context { system S }\n  llm L default\n");
    for i in 0..6 {
        s += &format!("  artifact A{i}\n");
    }
    s += &format!("  agent Top {{\n    task run {{\n      in {}\n      out A0\n      body {{\n", names(task_inputs));
    for (k, (ins, outs)) in calls.iter().enumerate() {
        s += &format!("        call c{k} = w{k} on W {{ in {} out {} }}\n", names(ins), names(outs));
    }
    s += "        start -> c0\n";
    for k in 1..calls.len() {
        s += &format!("        c{} -> c{k}\n", k - 1);
    }
    s += &format!("        c{} -> end\n      }}\n    }}\n  }}\n  agent W {{\n", calls.len() - 1);
    for (k, (ins, outs)) in calls.iter().enumerate() {
        s += &format!("    task w{k} {{ in {} out {} prompt {{ static r = \"x\" }} }}\n", names(ins), names(outs));
    }
    s + "  }\n}\n"
}

fn artifact_set() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(0usize..6, 1..=3).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn unavailable_inputs_follow_topological_order(
        task_inputs in artifact_set(),
        calls in prop::collection::vec((artifact_set(), artifact_set()), 1..6),
    ) {
        let m = load_text(&straight_line(&task_inputs, &calls), "line.a4c");
        let mut available: BTreeSet<usize> = task_inputs.iter().copied().collect();
        let mut want = BTreeSet::new();
        for (k, (ins, outs)) in calls.iter().enumerate() {
            for i in ins {
                if !available.contains(i) {
                    want.insert((format!("c{k}"), format!("A{i}")));
                }
            }
            available.extend(outs);
        }
        let got: BTreeSet<(String, String)> = validate::check(&m)
            .iter()
            .filter(|d| d.code == "E104")
            .map(|d| {
                let parts: Vec<&str> = d.message.split('`').collect();
                (parts[1].to_string(), parts[3].to_string())
            })
            .collect();
        prop_assert_eq!(got, want);
    }
}

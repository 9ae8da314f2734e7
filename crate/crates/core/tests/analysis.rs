use a4c_core::analysis::{classify, classify_all, impact, loop_facts, Direction, Pattern, Relation};
use a4c_core::TaskKey;
use a4c_testkit::{alpha_rename, fixture, load, load_text, FIXTURES};

fn pattern(fixture: &str, agent: &str, task: &str) -> Pattern {
    classify(&load(fixture), &TaskKey::new(agent, task)).unwrap().value
}

#[test]
fn fixture_patterns() {
    assert_eq!(pattern("testgen", "GeneratorTeam", "generate"), Pattern::PipelineWithFeedback);
    assert_eq!(pattern("resell", "MarketSearchConductor", "estimate"), Pattern::Orchestration);
    assert_eq!(
        pattern("recovery", "AutomatedArchitectureRecoveryPipeline", "recover"),
        Pattern::FanOut
    );
    assert_eq!(pattern("resell", "ResellPipeline", "appraise"), Pattern::Pipeline);
    assert_eq!(pattern("testgen", "TestPipeline", "test"), Pattern::Pipeline);
}

#[test]
fn orchestration_evidence_records_parallel_delegation() {
    let c = classify(&load("resell"), &TaskKey::new("MarketSearchConductor", "estimate")).unwrap();
    assert_eq!(c.evidence[0].criterion, "self-calls with parallel delegation to 2 agents");
}

#[test]
fn leaf_tasks_are_rejected() {
    let err = classify(&load("testgen"), &TaskKey::new("Developer", "fix")).unwrap_err();
    assert_eq!(err.code, "A002");
}

#[test]
fn classification_survives_alpha_renaming() {
    for name in FIXTURES {
        let original: Vec<Pattern> = classify_all(&load(name)).into_iter().map(|(_, c)| c.value).collect();
        let renamed_text = alpha_rename(&fixture(name));
        let renamed: Vec<(TaskKey, Pattern)> = classify_all(&load_text(&renamed_text, "r.a4c"))
            .into_iter()
            .map(|(k, c)| (k, c.value))
            .collect();
        assert!(renamed.iter().all(|(k, _)| k.agent.starts_with("Qx")));
        assert_eq!(original, renamed.into_iter().map(|(_, p)| p).collect::<Vec<_>>(), "{name}");
    }
}

#[test]
fn generate_has_one_loop_with_one_guarded_exit() {
    let m = load("testgen");
    let (_, task) = m.task(&TaskKey::new("GeneratorTeam", "generate")).unwrap();
    let facts = loop_facts(task);
    assert_eq!(facts.len(), 1);
    let mut cycle = facts[0].cycle.clone();
    cycle.sort();
    assert_eq!(cycle, ["fix", "gate", "test"]);
    assert_eq!(facts[0].exits.len(), 1);
    assert_eq!(facts[0].exits[0].guard, "[Report == IO]");
    assert_eq!(facts[0].exits[0].to, "end");
}

#[test]
fn acyclic_bodies_have_no_loops() {
    let m = load("resell");
    for (_, task) in m.tasks() {
        assert!(loop_facts(task).is_empty());
    }
}

#[test]
fn report_impact_both_directions() {
    let m = load("testgen");
    let r = impact(&m, "Report", Direction::Both).unwrap();
    let rel = |e: &str| r.get(e).unwrap_or_else(|| panic!("{e} missing: {r}")).relation;
    assert_eq!(rel("TestPipeline.test"), Relation::Produces);
    assert_eq!(rel("Developer.fix"), Relation::Consumes);
    assert_eq!(rel("GeneratorTeam.generate#gate"), Relation::Gates);
    assert_eq!(rel("flow:TestScriptGenerator->Tester"), Relation::FlowsOver);
    assert!(r.get("GeneratorTeam.generate").is_some());
    assert!(r.get("Report").is_none());
    for a in &r.affected {
        assert_eq!(a.path.last(), Some(&a.element));
    }
    let names: Vec<String> = r.affected.iter().map(|a| a.element.to_string()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn impact_json_shape() {
    let m = load("testgen");
    let v = impact(&m, "Developer.fix", Direction::Up).unwrap().to_json();
    let mut keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    keys.sort();
    assert_eq!(keys, ["affected", "direction", "levels", "seed"]);
    let entry = v["affected"][0].as_object().unwrap();
    let mut keys: Vec<&String> = entry.keys().collect();
    keys.sort();
    assert_eq!(keys, ["element", "path", "relation"]);
}

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};

use crate::diag::Diagnostic;
use crate::graph::FlowGraph;
use crate::model::*;
use crate::resolve::{ResolvedModel, TaskKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Pipeline,
    PipelineWithFeedback,
    Orchestration,
    FanOut,
    Unclassified,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evidence {
    pub criterion: String,
    pub elements: Vec<ElementRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternClass {
    pub value: Pattern,
    /// Every satisfied criterion, in precedence order.
    pub evidence: Vec<Evidence>,
}

impl PatternClass {
    pub fn to_json(&self) -> Value {
        json!({
            "value": self.value.to_string(),
            "evidence": self.evidence.iter().map(|e| json!({
                "criterion": e.criterion,
                "elements": e.elements.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Control-flow facts about one composite body.
pub struct TaskFacts<'m> {
    pub agent: &'m Agent,
    pub task: &'m Task,
    pub body: &'m ActivityGraph,
    pub flow: FlowGraph,
    /// Graph indices of task calls.
    pub calls: Vec<usize>,
    pub back_edges: BTreeSet<(usize, usize)>,
    /// Reachability after removing back edges, `dag_reach[a][b]`.
    dag_reach: Vec<Vec<bool>>,
}

impl<'m> TaskFacts<'m> {
    pub fn new(agent: &'m Agent, task: &'m Task, body: &'m ActivityGraph) -> Self {
        let flow = FlowGraph::new(body);
        let back_edges = flow.back_edges();
        let dag: Vec<Vec<usize>> = (0..flow.len())
            .map(|v| {
                flow.succ(v)
                    .iter()
                    .copied()
                    .filter(|&w| !back_edges.contains(&(v, w)))
                    .collect()
            })
            .collect();
        let dag_reach = (0..flow.len())
            .map(|v| {
                let mut seen = vec![false; dag.len()];
                let mut stack = dag[v].clone();
                while let Some(x) = stack.pop() {
                    if !seen[x] {
                        seen[x] = true;
                        stack.extend(&dag[x]);
                    }
                }
                seen
            })
            .collect();
        let calls = (0..flow.len())
            .filter(|&i| {
                flow.declared(body, i)
                    .is_some_and(|n| matches!(n.kind, NodeKind::Call(_)))
            })
            .collect();
        TaskFacts {
            agent,
            task,
            body,
            flow,
            calls,
            back_edges,
            dag_reach,
        }
    }

    pub fn call(&self, i: usize) -> &'m TaskCall {
        match &self.flow.declared(self.body, i).expect("call index").kind {
            NodeKind::Call(c) => c,
            _ => unreachable!("not a call"),
        }
    }

    pub fn element(&self, i: usize) -> ElementRef {
        ElementRef::ActivityNode {
            agent: self.agent.name.name.clone(),
            task: self.task.name.name.clone(),
            node: self.flow.label(self.body, i),
        }
    }

    /// Some path without back edges leads from `a` to `b`.
    pub fn before(&self, a: usize, b: usize) -> bool {
        self.dag_reach[a][b]
    }

    pub fn totally_ordered(&self) -> bool {
        self.calls.iter().enumerate().all(|(k, &a)| {
            self.calls[k + 1..]
                .iter()
                .all(|&b| self.before(a, b) || self.before(b, a))
        })
    }

    fn elements(&self, idx: impl IntoIterator<Item = usize>) -> Vec<ElementRef> {
        let mut v: Vec<ElementRef> = idx.into_iter().map(|i| self.element(i)).collect();
        v.sort();
        v
    }
}

/// One interaction pattern recognizer. `witness` returns evidence iff the
/// pattern's criterion holds for the body.
pub trait PatternRule: Send + Sync {
    fn pattern(&self) -> Pattern;
    fn witness(&self, facts: &TaskFacts<'_>) -> Option<Evidence>;
}

pub struct FanOutRule;
pub struct OrchestrationRule;
pub struct FeedbackPipelineRule;
pub struct PipelineRule;

impl PatternRule for FanOutRule {
    fn pattern(&self) -> Pattern {
        Pattern::FanOut
    }

    fn witness(&self, f: &TaskFacts<'_>) -> Option<Evidence> {
        let wise: Vec<usize> = f.calls.iter().copied().filter(|&i| f.call(i).element_wise()).collect();
        (!wise.is_empty()).then(|| Evidence {
            criterion: "element-wise task call".into(),
            elements: f.elements(wise),
        })
    }
}

impl PatternRule for OrchestrationRule {
    fn pattern(&self) -> Pattern {
        Pattern::Orchestration
    }

    fn witness(&self, f: &TaskFacts<'_>) -> Option<Evidence> {
        let me = &f.agent.name.name;
        let (own, delegated): (Vec<usize>, Vec<usize>) =
            f.calls.iter().copied().partition(|&i| f.call(i).is_self_call(me));
        let workers: BTreeSet<&str> = delegated.iter().map(|&i| f.call(i).callee_agent(me)).collect();
        if own.is_empty() || workers.len() < 2 {
            return None;
        }
        let parallel = delegated.iter().enumerate().any(|(k, &a)| {
            delegated[k + 1..]
                .iter()
                .any(|&b| !f.before(a, b) && !f.before(b, a))
        });
        let mode = if parallel { "parallel" } else { "sequential" };
        Some(Evidence {
            criterion: format!("self-calls with {mode} delegation to {} agents", workers.len()),
            elements: f.elements(own.into_iter().chain(delegated)),
        })
    }
}

impl PatternRule for FeedbackPipelineRule {
    fn pattern(&self) -> Pattern {
        Pattern::PipelineWithFeedback
    }

    fn witness(&self, f: &TaskFacts<'_>) -> Option<Evidence> {
        if !f.totally_ordered() {
            return None;
        }
        let decisions: Vec<usize> = (0..f.flow.len())
            .filter(|&i| {
                f.flow
                    .declared(f.body, i)
                    .is_some_and(|n| matches!(n.kind, NodeKind::Decision { .. }))
            })
            .collect();
        let mut gates = BTreeSet::new();
        for &(u, v) in &f.back_edges {
            let from_v = f.flow.reachable_from(v);
            for &d in &decisions {
                if from_v[d] && f.flow.reachable_from(d)[u] {
                    gates.insert(d);
                }
            }
        }
        (!gates.is_empty()).then(|| Evidence {
            criterion: "task-call chain with a loop back through a decision".into(),
            elements: f.elements(f.calls.iter().copied().chain(gates)),
        })
    }
}

impl PatternRule for PipelineRule {
    fn pattern(&self) -> Pattern {
        Pattern::Pipeline
    }

    fn witness(&self, f: &TaskFacts<'_>) -> Option<Evidence> {
        (f.totally_ordered() && f.back_edges.is_empty()).then(|| Evidence {
            criterion: "acyclic task-call chain".into(),
            elements: f.elements(f.calls.iter().copied()),
        })
    }
}

/// Recognizers in precedence order.
pub fn pattern_rules() -> Vec<Box<dyn PatternRule>> {
    vec![
        Box::new(FanOutRule),
        Box::new(OrchestrationRule),
        Box::new(FeedbackPipelineRule),
        Box::new(PipelineRule),
    ]
}

pub fn classify_body(agent: &Agent, task: &Task, body: &ActivityGraph) -> PatternClass {
    let facts = TaskFacts::new(agent, task, body);
    let mut value = Pattern::Unclassified;
    let mut evidence = Vec::new();
    for rule in pattern_rules() {
        if let Some(e) = rule.witness(&facts) {
            if evidence.is_empty() {
                value = rule.pattern();
            }
            evidence.push(e);
        }
    }
    PatternClass { value, evidence }
}

/// Interaction pattern of a composite task; A002 for leaf tasks.
pub fn classify(model: &ResolvedModel, key: &TaskKey) -> Result<PatternClass, Diagnostic> {
    let (agent, task) = model.task(key).ok_or_else(|| {
        Diagnostic::error("A001", format!("unknown task `{key}`"), model.file(), Span::default())
    })?;
    match &task.body {
        Some(body) if task.is_composite() => Ok(classify_body(agent, task, body)),
        _ => Err(Diagnostic::error(
            "A002",
            format!("task `{key}` is a leaf task and has no interaction pattern"),
            model.file(),
            task.name.span,
        )),
    }
}

/// Every composite task in declaration order.
pub fn classify_all(model: &ResolvedModel) -> Vec<(TaskKey, PatternClass)> {
    model
        .tasks()
        .filter_map(|(agent, task)| {
            let body = task.body.as_ref().filter(|_| task.is_composite())?;
            Some((
                TaskKey::new(&agent.name.name, &task.name.name),
                classify_body(agent, task, body),
            ))
        })
        .collect()
}

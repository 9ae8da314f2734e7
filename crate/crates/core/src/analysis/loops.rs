use serde::Serialize;

use crate::graph::{FlowGraph, FlowNode};
use crate::model::{ActivityGraph, Span, Task};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopExit {
    pub from: String,
    pub to: String,
    pub guard: String,
}

/// An elementary control-flow cycle of a task body and its guarded exits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopFact {
    pub cycle: Vec<String>,
    pub exits: Vec<LoopExit>,
    #[serde(skip)]
    pub span: Span,
}

impl LoopFact {
    /// `a -> b -> a`
    pub fn path(&self) -> String {
        let mut parts = self.cycle.clone();
        if let Some(first) = self.cycle.first() {
            parts.push(first.clone());
        }
        parts.join(" -> ")
    }
}

pub fn loop_facts(task: &Task) -> Vec<LoopFact> {
    match &task.body {
        Some(body) => body_loop_facts(body, &FlowGraph::new(body)),
        None => Vec::new(),
    }
}

pub fn body_loop_facts(body: &ActivityGraph, graph: &FlowGraph) -> Vec<LoopFact> {
    graph
        .cycles()
        .into_iter()
        .map(|cycle| {
            let inside = |i: usize| cycle.contains(&i);
            let exits = graph
                .control
                .iter()
                .filter(|(f, t, _)| inside(*f) && !inside(*t))
                .filter_map(|&(f, t, ei)| {
                    let guard = body.edges[ei].guard.as_ref()?;
                    Some(LoopExit {
                        from: graph.label(body, f),
                        to: graph.label(body, t),
                        guard: guard.to_string(),
                    })
                })
                .collect();
            let span = match graph.node(cycle[0]) {
                FlowNode::Declared(d) => body.nodes[*d].span,
                _ => body.span,
            };
            LoopFact {
                cycle: cycle.iter().map(|&i| graph.label(body, i)).collect(),
                exits,
                span,
            }
        })
        .collect()
}

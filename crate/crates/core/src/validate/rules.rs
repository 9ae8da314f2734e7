use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{Body, Context, Rule};
use crate::analysis::loops::body_loop_facts;
use crate::diag::{Diagnostic, Severity};
use crate::graph::{FlowGraph, END, START};
use crate::model::*;
use crate::resolve::TaskKey;

macro_rules! rule {
    ($ty:ident, $id:literal, $code:literal, $sev:ident, $desc:literal, |$cx:ident, $out:ident| $body:block) => {
        pub struct $ty;

        impl Rule for $ty {
            fn id(&self) -> &'static str {
                $id
            }

            fn code(&self) -> &'static str {
                $code
            }

            fn severity(&self) -> Severity {
                Severity::$sev
            }

            fn description(&self) -> &'static str {
                $desc
            }

            fn check(&self, $cx: &Context<'_>, $out: &mut Vec<Diagnostic>) $body
        }
    };
}

pub fn standard_rules() -> Vec<Box<dyn Rule>> {
    vec![
        Box::new(UnresolvedCall),
        Box::new(RecursiveDecomposition),
        Box::new(EmptyLeaf),
        Box::new(UnavailableInput),
        Box::new(UnproducedOutput),
        Box::new(MalformedControlFlow),
        Box::new(ElementWiseWithoutCollection),
        Box::new(UndeclaredTool),
        Box::new(MissingLlm),
        Box::new(DeploymentMismatch),
        Box::new(UnusedFlowArtifact),
        Box::new(OneWayDatastore),
        Box::new(UnguardedLoop),
    ]
}

rule!(UnresolvedCall, "V1", "E101", Error, "task call target does not exist", |cx, out| {
    for b in &cx.bodies {
        for (_, call) in b.task.calls() {
            if cx.model.callee(b.agent, call).is_none() {
                let agent = call.callee_agent(&b.agent.name.name);
                out.push(cx.error(
                    "E101",
                    format!("agent `{agent}` has no task `{}`", call.task),
                    call.task.span,
                ));
            }
        }
    }
});

rule!(RecursiveDecomposition, "V2", "E102", Error, "task decomposition is recursive", |cx, out| {
    for group in cx.model.call_graph().recursive_groups() {
        let members: BTreeSet<&TaskKey> = group.iter().collect();
        let mut site: Option<Span> = None;
        for key in &group {
            let Some((agent, task)) = cx.model.task(key) else { continue };
            for (node, call) in task.calls() {
                let callee = TaskKey::new(call.callee_agent(&agent.name.name), &call.task.name);
                if members.contains(&callee) && site.is_none_or(|s| node.span < s) {
                    site = Some(node.span);
                }
            }
        }
        let message = if group.len() == 1 {
            format!("task `{}` calls itself", group[0])
        } else {
            let names: Vec<String> = group.iter().map(|k| format!("`{k}`")).collect();
            format!("tasks {} call each other recursively", names.join(", "))
        };
        out.push(cx.error("E102", message, site.unwrap_or_default()));
    }
});

rule!(EmptyLeaf, "V3", "E103", Error, "leaf task has neither a tool call nor a prompt", |cx, out| {
    for (agent, task) in cx.model.tasks() {
        if !task.is_composite() && task.prompt.is_none() && task.tool_calls().next().is_none() {
            out.push(cx.error(
                "E103",
                format!("leaf task `{}.{}` has neither a tool call nor a prompt", agent.name, task.name),
                task.name.span,
            ));
        }
    }
});

/// True iff `artifact` may be available when `node` runs.
fn available(b: &Body<'_>, node: usize, artifact: &str) -> bool {
    if b.task.io.consumes(artifact) {
        return true;
    }
    let produced_upstream = (0..b.flow.len()).any(|p| {
        b.flow
            .declared(b.graph, p)
            .is_some_and(|n| n.kind.produced().iter().any(|o| o.name == artifact))
            && b.from_start[p]
            && b.flow.has_path(p, node)
    });
    if produced_upstream {
        return true;
    }
    b.flow.reads.iter().any(|(store, reader, _)| {
        *reader == node
            && b.agent
                .store(store)
                .is_some_and(|s| s.artifact.name == artifact)
    })
}

rule!(UnavailableInput, "V4", "E104", Error, "consumed artifact is not available", |cx, out| {
    for b in &cx.bodies {
        for (d, node) in b.graph.nodes.iter().enumerate() {
            let i = FlowGraph::declared_index(d);
            if !b.from_start[i] {
                continue;
            }
            let mut seen = HashSet::new();
            for a in node.kind.consumed() {
                if seen.insert(&a.name) && !available(b, i, &a.name) {
                    out.push(cx.error(
                        "E104",
                        format!(
                            "`{}` consumes `{}`, which is not a task input, not produced upstream and not read from a datastore",
                            node.id, a
                        ),
                        a.span,
                    ));
                }
            }
        }
    }
});

rule!(UnproducedOutput, "V5", "W105", Warning, "declared output is produced on no path to the final node", |cx, out| {
    for b in &cx.bodies {
        if !b.end_reachable() || (!b.task.is_composite() && b.task.prompt.is_some()) {
            continue;
        }
        for o in &b.task.io.outputs {
            if b.task.io.consumes(&o.name) {
                continue;
            }
            let produced = (0..b.flow.len()).any(|p| {
                b.from_start[p]
                    && b.to_end[p]
                    && b.flow
                        .declared(b.graph, p)
                        .is_some_and(|n| n.kind.produced().iter().any(|x| x.name == o.name))
            });
            if !produced {
                out.push(cx.warning(
                    "W105",
                    format!("output `{}` of `{}.{}` is produced on no path to end", o, b.agent.name, b.task.name),
                    o.span,
                ));
            }
        }
    }
});

fn control_flow(cx: &Context<'_>, b: &Body<'_>, out: &mut Vec<Diagnostic>) {
    let g = &b.flow;
    let edges = &b.graph.edges;
    for (f, t, ei) in &g.control {
        let e = &edges[*ei];
        if *t == START {
            out.push(cx.error("E106", "edge into start".into(), e.span));
        }
        if *f == END {
            out.push(cx.error("E106", "edge out of end".into(), e.span));
        }
    }
    for (ei, e) in edges.iter().enumerate() {
        let Some(guard) = &e.guard else { continue };
        let from_decision = g
            .control
            .iter()
            .find(|(_, _, i)| *i == ei)
            .and_then(|(f, _, _)| g.declared(b.graph, *f))
            .is_some_and(|n| matches!(n.kind, NodeKind::Decision { .. }));
        if !from_decision {
            out.push(cx.error(
                "E106",
                format!("guard {guard} on an edge that does not leave a decision"),
                guard.span,
            ));
        }
    }
    for (d, node) in b.graph.nodes.iter().enumerate() {
        let i = FlowGraph::declared_index(d);
        let outgoing: Vec<&ActivityEdge> = g
            .control
            .iter()
            .filter(|(f, _, _)| *f == i)
            .map(|(_, _, ei)| &edges[*ei])
            .collect();
        let incoming = g.control.iter().filter(|(_, t, _)| *t == i).count();
        match &node.kind {
            NodeKind::Decision { subject } => {
                if outgoing.len() < 2 {
                    out.push(cx.error(
                        "E106",
                        format!("decision `{}` has {} outgoing edge(s); at least two are required", node.id, outgoing.len()),
                        node.span,
                    ));
                }
                let mut literals = BTreeMap::new();
                let mut elses = 0;
                for e in &outgoing {
                    match &e.guard {
                        None => out.push(cx.error(
                            "E106",
                            format!("branch `{} -> {}` of decision `{}` has no guard", e.from, e.to, node.id),
                            e.span,
                        )),
                        Some(Guard { form: GuardForm::Else, span }) => {
                            elses += 1;
                            if elses == 2 {
                                out.push(cx.error(
                                    "E106",
                                    format!("decision `{}` has more than one [else] branch", node.id),
                                    *span,
                                ));
                            }
                        }
                        Some(Guard { form: GuardForm::Equals { artifact, literal }, span }) => {
                            if artifact.name != subject.name {
                                out.push(cx.error(
                                    "E106",
                                    format!("guard tests `{artifact}` but decision `{}` is on `{subject}`", node.id),
                                    artifact.span,
                                ));
                            }
                            if literals.insert(literal.name.clone(), *span).is_some() {
                                out.push(cx.error(
                                    "E106",
                                    format!("duplicate guard literal `{literal}` on decision `{}`", node.id),
                                    literal.span,
                                ));
                            }
                        }
                    }
                }
            }
            NodeKind::Fork if outgoing.len() < 2 => out.push(cx.error(
                "E106",
                format!("fork `{}` has fewer than two outgoing edges", node.id),
                node.span,
            )),
            NodeKind::Join => {
                if incoming < 2 {
                    out.push(cx.error(
                        "E106",
                        format!("join `{}` has fewer than two incoming edges", node.id),
                        node.span,
                    ));
                } else {
                    let matched = (0..g.len()).any(|f| {
                        g.declared(b.graph, f).is_some_and(|n| n.kind == NodeKind::Fork) && {
                            let reach = g.reachable_from(f);
                            g.pred(i).iter().all(|&p| reach[p])
                        }
                    });
                    if !matched {
                        out.push(cx.error(
                            "E106",
                            format!("join `{}` is not preceded by a fork that reaches all of its branches", node.id),
                            node.span,
                        ));
                    }
                }
            }
            _ => {}
        }
    }
    if b.graph.is_empty() {
        return;
    }
    if !b.end_reachable() {
        out.push(cx.error(
            "E106",
            format!("no path from start to end in `{}.{}`", b.agent.name, b.task.name),
            b.graph.span,
        ));
        return;
    }
    for i in 0..g.len() {
        let Some(node) = g.declared(b.graph, i) else { continue };
        if !b.from_start[i] {
            out.push(cx.error("E106", format!("`{}` is unreachable from start", node.id), node.span));
        } else if !b.to_end[i] {
            out.push(cx.error("E106", format!("no path from `{}` to end", node.id), node.span));
        }
    }
}

rule!(MalformedControlFlow, "V6", "E106", Error, "malformed decision, fork/join or reachability", |cx, out| {
    for b in &cx.bodies {
        control_flow(cx, b, out);
    }
});

rule!(ElementWiseWithoutCollection, "V7", "E107", Error, "element-wise call without a collection input", |cx, out| {
    for b in &cx.bodies {
        for (node, call) in b.task.calls() {
            let Some(each) = &call.each else { continue };
            let any_collection = call
                .io
                .inputs
                .iter()
                .chain(std::iter::once(each))
                .any(|a| cx.model.is_collection(&a.name));
            if !any_collection {
                out.push(cx.error(
                    "E107",
                    format!("element-wise call `{}` has no collection-typed input", node.id),
                    each.span,
                ));
            }
        }
    }
});

rule!(UndeclaredTool, "V8", "E108", Error, "tool call to an undeclared tool", |cx, out| {
    for b in &cx.bodies {
        for (_, call) in b.task.tool_calls() {
            if cx.model.tool(&call.tool.name).is_none() {
                out.push(cx.error("E108", format!("tool `{}` is not declared", call.tool), call.tool.span));
            }
        }
    }
});

rule!(MissingLlm, "V9", "W109", Warning, "agent has no LLM binding", |cx, out| {
    for agent in &cx.model.agents {
        if cx.model.llm_binding(agent).is_none() {
            out.push(cx.warning(
                "W109",
                format!("agent `{}` has no LLM and no default LLM is declared", agent.name),
                agent.name.span,
            ));
        }
    }
});

rule!(DeploymentMismatch, "V10", "E110", Error, "agent hosting or links inconsistent with the deployment", |cx, out| {
    let Some(dep) = cx.model.deployment() else { return };
    for agent in &cx.model.agents {
        let hosts: Vec<&DeploymentNode> = dep
            .nodes
            .iter()
            .filter(|n| n.hosts.iter().any(|h| h.name == agent.name.name))
            .collect();
        match hosts.len() {
            0 => out.push(cx.error(
                "E110",
                format!("agent `{}` is not hosted on any deployment node", agent.name),
                agent.name.span,
            )),
            1 => {}
            _ => out.push(cx.error(
                "E110",
                format!("agent `{}` is hosted on more than one deployment node", agent.name),
                agent.name.span,
            )),
        }
    }
    for b in &cx.bodies {
        let Some(here) = dep.host_of(&b.agent.name.name) else { continue };
        for node in &b.graph.nodes {
            let (target, what) = match &node.kind {
                NodeKind::Call(c) => (c.callee_agent(&b.agent.name.name), "agent"),
                NodeKind::Invoke(t) => (t.tool.as_str(), "tool"),
                _ => continue,
            };
            let Some(there) = dep.host_of(target) else { continue };
            if there.name.name != here.name.name && !dep.linked(&here.name.name, &there.name.name) {
                out.push(cx.error(
                    "E110",
                    format!(
                        "`{}` reaches {what} `{target}` on node `{}` from node `{}` without a link",
                        node.id, there.name, here.name
                    ),
                    node.span,
                ));
            }
        }
    }
});

rule!(UnusedFlowArtifact, "V11", "W111", Warning, "context flow artifact appears in no top-level task signature", |cx, out| {
    let Some(ctx) = cx.model.context() else { return };
    let mut signature = BTreeSet::new();
    for key in cx.model.call_graph().roots() {
        if let Some((_, task)) = cx.model.task(key) {
            signature.extend(task.io.inputs.iter().chain(&task.io.outputs).map(|a| a.name.as_str()));
        }
    }
    for flow in &ctx.flows {
        for a in &flow.artifacts {
            if !signature.contains(a.name.as_str()) {
                out.push(cx.warning(
                    "W111",
                    format!("artifact `{a}` on flow `{} -> {}` appears in no top-level task signature", flow.from, flow.to),
                    a.span,
                ));
            }
        }
    }
});

rule!(OneWayDatastore, "V12", "W112", Warning, "datastore never written or never read", |cx, out| {
    for agent in &cx.model.agents {
        for store in &agent.stores {
            let bodies = cx.bodies.iter().filter(|b| b.agent.name.name == agent.name.name);
            let (mut written, mut read) = (false, false);
            for b in bodies {
                written |= b.flow.writes.iter().any(|(s, _, _)| *s == store.name.name);
                read |= b.flow.reads.iter().any(|(s, _, _)| *s == store.name.name);
            }
            let problem = match (written, read) {
                (true, true) => continue,
                (false, false) => "never written and never read",
                (false, true) => "never written",
                (true, false) => "never read",
            };
            out.push(cx.warning(
                "W112",
                format!("datastore `{}.{}` is {problem}", agent.name, store.name),
                store.name.span,
            ));
        }
    }
});

rule!(UnguardedLoop, "V13", "W113", Warning, "control-flow cycle without a guarded exit", |cx, out| {
    for b in &cx.bodies {
        for fact in body_loop_facts(b.graph, &b.flow) {
            if fact.exits.is_empty() {
                out.push(cx.warning(
                    "W113",
                    format!("cycle {} has no guarded exit", fact.path()),
                    fact.span,
                ));
            }
        }
    }
});

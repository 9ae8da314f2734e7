use std::collections::BTreeMap;
use std::fmt::Write;

use super::{anchor_id, quote, render_error, DiagramKind, DiagramText};
use crate::diag::Diagnostic;
use crate::model::*;
use crate::resolve::{ResolvedModel, TaskKey};

/// Activity graph of a task body as DOT.
pub fn render_activity(model: &ResolvedModel, key: &TaskKey) -> Result<DiagramText, Diagnostic> {
    let (agent, task) = model.task(key).ok_or_else(|| {
        render_error(model, "R002", format!("unknown task `{key}`"), Span::default())
    })?;
    let body = task.body.as_ref().ok_or_else(|| {
        render_error(
            model,
            "R002",
            format!("task `{key}` has no body; see its prompt or tool summary"),
            task.name.span,
        )
    })?;
    let a = &agent.name.name;
    let t = &task.name.name;
    let mut anchors = BTreeMap::new();
    let task_ref = ElementRef::task(a, t);
    let task_id = anchor_id(&task_ref);
    anchors.insert(task_ref, task_id.clone());

    let mut s = String::new();
    writeln!(s, "digraph {} {{", quote(&format!("{a}.{t}"))).unwrap();
    s.push_str("  rankdir=TB;\n");
    s.push_str("  node [fontname=\"Helvetica\", fontsize=10];\n");
    s.push_str("  edge [fontname=\"Helvetica\", fontsize=9];\n");
    writeln!(s, "  subgraph {} {{", quote(&format!("cluster_{task_id}"))).unwrap();
    writeln!(s, "    label={};", quote(&format!("«task» {t} : {a}"))).unwrap();
    s.push_str("    style=rounded;\n");
    s.push_str("    start [shape=circle, style=filled, fillcolor=black, label=\"\", width=0.25];\n");
    s.push_str("    end [shape=doublecircle, style=filled, fillcolor=black, label=\"\", width=0.2];\n");

    for (i, input) in task.io.inputs.iter().enumerate() {
        let id = format!("param_in_{i}");
        writeln!(s, "    {id} [{}];", artifact_shape(model, &input.name, "in: ")).unwrap();
    }
    for (i, output) in task.io.outputs.iter().enumerate() {
        let id = format!("param_out_{i}");
        writeln!(s, "    {id} [{}];", artifact_shape(model, &output.name, "out: ")).unwrap();
    }

    let node_id = |n: &str| {
        anchor_id(&ElementRef::ActivityNode {
            agent: a.clone(),
            task: t.clone(),
            node: n.to_string(),
        })
    };
    for node in &body.nodes {
        let e = ElementRef::ActivityNode {
            agent: a.clone(),
            task: t.clone(),
            node: node.id.name.clone(),
        };
        let id = anchor_id(&e);
        let attrs = match &node.kind {
            NodeKind::Call(call) => {
                let marker = if call.element_wise() { "*\n" } else { "" };
                format!(
                    "shape=box, style=rounded, label={}",
                    quote(&format!("{marker}«TaskCall»\n{}", call.display(a)))
                )
            }
            NodeKind::Invoke(inv) => format!(
                "shape=box, style=rounded, label={}",
                quote(&format!("«ToolCall»\n{}", inv.display()))
            ),
            NodeKind::Decision { subject } => {
                format!("shape=diamond, label={}", quote(&format!("{subject}?")))
            }
            NodeKind::Merge => "shape=diamond, label=\"\"".to_string(),
            NodeKind::Fork | NodeKind::Join => {
                "shape=box, style=filled, fillcolor=black, label=\"\", height=0.05, width=1.5".to_string()
            }
        };
        writeln!(s, "    {id} [{attrs}];").unwrap();
        anchors.insert(e, id);
    }

    let mut stores: Vec<&str> = Vec::new();
    for edge in &body.edges {
        if let Some(st) = edge.from.store().or(edge.to.store()) {
            if !stores.contains(&st.as_str()) {
                stores.push(st.as_str());
            }
        }
    }
    for st in &stores {
        let e = ElementRef::Datastore {
            agent: a.clone(),
            store: st.to_string(),
        };
        let id = anchor_id(&e);
        let artifact = agent.store(st).map(|d| d.artifact.name.as_str()).unwrap_or("?");
        writeln!(
            s,
            "    {id} [shape=cylinder, label={}];",
            quote(&format!("«datastore»\n{st} : {artifact}"))
        )
        .unwrap();
        anchors.insert(e, id);
    }

    for node in &body.nodes {
        let (inputs, each): (&[Ident], Option<&Ident>) = match &node.kind {
            NodeKind::Call(c) => (&c.io.inputs, c.each.as_ref()),
            NodeKind::Invoke(inv) => (&inv.io.inputs, None),
            _ => continue,
        };
        let target = node_id(&node.id.name);
        for (k, input) in each.into_iter().chain(inputs).enumerate() {
            let id = format!("obj_{}_{k}", node.id.name);
            writeln!(s, "    {id} [{}];", artifact_shape(model, &input.name, "")).unwrap();
            writeln!(s, "    {id} -> {target} [style=dotted, arrowhead=open];").unwrap();
        }
    }

    let endpoint = |e: &Endpoint| match e {
        Endpoint::Start => "start".to_string(),
        Endpoint::End => "end".to_string(),
        Endpoint::Node(id) => node_id(&id.name),
        Endpoint::StoreRead(st) | Endpoint::StoreWrite(st) => anchor_id(&ElementRef::Datastore {
            agent: a.clone(),
            store: st.name.clone(),
        }),
    };
    if body.edges.is_empty() {
        s.push_str("    start -> end;\n");
    }
    for edge in &body.edges {
        let mut attrs = Vec::new();
        match edge.kind() {
            EdgeKind::StoreRead => attrs.push("style=dashed, label=\"read\"".to_string()),
            EdgeKind::StoreWrite => attrs.push("style=dashed, label=\"write\"".to_string()),
            EdgeKind::Control => {
                if let Some(g) = &edge.guard {
                    attrs.push(format!("label={}", quote(&g.to_string())));
                }
            }
        }
        let attrs = if attrs.is_empty() {
            String::new()
        } else {
            format!(" [{}]", attrs.join(", "))
        };
        writeln!(s, "    {} -> {}{attrs};", endpoint(&edge.from), endpoint(&edge.to)).unwrap();
    }
    s.push_str("  }\n}\n");
    Ok(DiagramText {
        kind: DiagramKind::Activity,
        body: s,
        anchors,
    })
}

/// Plain artifacts are boxes; collections are segmented record nodes.
fn artifact_shape(model: &ResolvedModel, artifact: &str, prefix: &str) -> String {
    if model.is_collection(artifact) {
        format!("shape=record, label={}", quote(&format!("{{{prefix}{artifact}|{{ | | }}}}")))
    } else {
        format!("shape=box, label={}", quote(&format!("{prefix}{artifact}")))
    }
}

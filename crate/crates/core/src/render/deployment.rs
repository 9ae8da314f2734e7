use std::collections::BTreeMap;
use std::fmt::Write;

use super::context::STYLE;
use super::{anchor_id, quote, render_error, DiagramKind, DiagramText};
use crate::diag::Diagnostic;
use crate::model::{ElementRef, Span};
use crate::resolve::ResolvedModel;

/// Deployment view: nodes with their hosted agents and tools nested,
/// links labeled with the protocol and carried artifacts.
pub fn render_deployment(model: &ResolvedModel) -> Result<DiagramText, Diagnostic> {
    let dep = model.deployment().ok_or_else(|| {
        render_error(model, "R001", "model has no deployment section".into(), Span::default())
    })?;
    let mut anchors = BTreeMap::new();
    let mut s = String::from("@startuml\n");
    s.push_str(STYLE);
    writeln!(s, "title {}", quote(&format!("{}: deployment", model.name))).unwrap();
    s.push('\n');
    for node in &dep.nodes {
        let e = ElementRef::DeploymentNode(node.name.name.clone());
        let id = anchor_id(&e);
        let external = if node.external { " <<external>>" } else { "" };
        write!(s, "node {} as {id}{external}", quote(&node.name.name)).unwrap();
        anchors.insert(e, id);
        if node.hosts.is_empty() {
            s.push('\n');
            continue;
        }
        s.push_str(" {\n");
        for h in &node.hosts {
            let line = if let Some(agent) = model.agent(&h.name) {
                let e = ElementRef::Agent(agent.name.name.clone());
                let id = anchor_id(&e);
                anchors.insert(e, id.clone());
                format!("agent {} as {id} <<agent>>", quote(&agent.name.name))
            } else {
                let tool = model.tool(&h.name).expect("resolved host");
                let e = ElementRef::Tool(tool.name.name.clone());
                let id = anchor_id(&e);
                anchors.insert(e, id.clone());
                let external = if tool.external { " <<external>>" } else { "" };
                format!("component {} as {id} <<tool>>{external}", quote(&tool.name.name))
            };
            writeln!(s, "  {line}").unwrap();
        }
        s.push_str("}\n");
    }
    if !dep.links.is_empty() {
        s.push('\n');
    }
    for (i, link) in dep.links.iter().enumerate() {
        let e = ElementRef::link(i, link);
        let id = anchor_id(&e);
        let from = anchor_id(&ElementRef::DeploymentNode(link.from.name.clone()));
        let to = anchor_id(&ElementRef::DeploymentNode(link.to.name.clone()));
        let mut label = link.protocol.clone();
        if !link.artifacts.is_empty() {
            let names: Vec<&str> = link.artifacts.iter().map(|a| a.as_str()).collect();
            label.push_str(&format!(" : {}", names.join(", ")));
        }
        writeln!(s, "' @anchor {id}").unwrap();
        writeln!(s, "{from} --> {to} : {label}").unwrap();
        anchors.insert(e, id);
    }
    s.push_str("@enduml\n");
    Ok(DiagramText {
        kind: DiagramKind::Deployment,
        body: s,
        anchors,
    })
}

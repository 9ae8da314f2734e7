use std::collections::BTreeMap;
use std::fmt::Write;

use super::{anchor_id, quote, DiagramKind, DiagramText};
use crate::model::{ActorKind, ElementRef};
use crate::resolve::ResolvedModel;

pub(crate) const STYLE: &str = "<style>
.external {
  BackgroundColor #FF6666
}
</style>
";

/// Context view: one shape per actor, LLM and tool, one labeled arrow per
/// flow, and a legend listing the artifact types.
pub fn render_context(model: &ResolvedModel) -> DiagramText {
    let mut anchors = BTreeMap::new();
    let mut s = String::from("@startuml\n");
    s.push_str(STYLE);
    writeln!(s, "title {}", quote(&format!("{}: context", model.name))).unwrap();
    s.push('\n');
    let mut shape = |s: &mut String, e: ElementRef, line: String| {
        s.push_str(&line);
        s.push('\n');
        let id = anchor_id(&e);
        anchors.insert(e, id);
    };
    if let Some(ctx) = model.context() {
        for actor in &ctx.actors {
            let e = ElementRef::Actor(actor.name.name.clone());
            let id = anchor_id(&e);
            let name = quote(&actor.name.name);
            let line = match actor.kind {
                ActorKind::User => format!("actor {name} as {id} <<user>>"),
                ActorKind::System => format!("rectangle {name} as {id} <<system>>"),
                ActorKind::ExternalSystem => format!("rectangle {name} as {id} <<external system>>"),
            };
            shape(&mut s, e, line);
        }
    }
    for llm in &model.llms {
        let e = ElementRef::Llm(llm.name.name.clone());
        let mut label = llm.name.name.clone();
        if let Some(v) = &llm.version {
            label.push_str(&format!("\n{v}"));
        }
        let default = if llm.default { " <<default>>" } else { "" };
        let line = format!("node {} as {} <<llm>>{default}", quote(&label), anchor_id(&e));
        shape(&mut s, e, line);
    }
    for tool in &model.tools {
        let e = ElementRef::Tool(tool.name.name.clone());
        let external = if tool.external { " <<external>>" } else { "" };
        let line = format!("component {} as {} <<tool>>{external}", quote(&tool.name.name), anchor_id(&e));
        shape(&mut s, e, line);
    }
    if let Some(ctx) = model.context() {
        if !ctx.flows.is_empty() {
            s.push('\n');
        }
        for (i, flow) in ctx.flows.iter().enumerate() {
            let e = ElementRef::flow(i, flow);
            let id = anchor_id(&e);
            let from = endpoint_alias(model, &flow.from.name);
            let to = endpoint_alias(model, &flow.to.name);
            let label: Vec<&str> = flow.artifacts.iter().map(|a| a.as_str()).collect();
            writeln!(s, "' @anchor {id}").unwrap();
            writeln!(s, "{from} --> {to} : {}", label.join(", ")).unwrap();
            anchors.insert(e, id);
        }
    }
    if !model.artifacts.is_empty() {
        s.push('\n');
        for a in &model.artifacts {
            let e = ElementRef::Artifact(a.name.name.clone());
            let id = anchor_id(&e);
            writeln!(s, "' @anchor {id}").unwrap();
            anchors.insert(e, id);
        }
        s.push_str("legend right\n  Artifacts\n");
        for a in &model.artifacts {
            match &a.element_type {
                Some(elem) => writeln!(s, "  {} : collection of {}", a.name, elem).unwrap(),
                None => writeln!(s, "  {}", a.name).unwrap(),
            }
        }
        s.push_str("endlegend\n");
    }
    s.push_str("@enduml\n");
    DiagramText {
        kind: DiagramKind::Context,
        body: s,
        anchors,
    }
}

fn endpoint_alias(model: &ResolvedModel, name: &str) -> String {
    let e = if model.tool(name).is_some() {
        ElementRef::Tool(name.into())
    } else if model.llm(name).is_some() {
        ElementRef::Llm(name.into())
    } else {
        ElementRef::Actor(name.into())
    };
    anchor_id(&e)
}

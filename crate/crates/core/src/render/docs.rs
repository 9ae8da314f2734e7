use std::collections::BTreeMap;
use std::fmt::Write;

use super::prompts::prompt_table;
use super::{anchor_id, render_activity, render_context, render_deployment};
use crate::analysis::{classify::classify_body, loop_facts};
use crate::model::*;
use crate::resolve::{ResolvedModel, TaskKey};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocsBundle {
    /// Relative path to markdown content.
    pub files: BTreeMap<String, String>,
    /// Table of contents: `(title, path)` in reading order.
    pub index: Vec<(String, String)>,
    /// Element to `path#anchor`.
    pub anchors: BTreeMap<ElementRef, String>,
}

struct Page<'a> {
    path: &'a str,
    text: String,
    anchors: &'a mut BTreeMap<ElementRef, String>,
}

impl<'a> Page<'a> {
    fn new(path: &'a str, anchors: &'a mut BTreeMap<ElementRef, String>) -> Self {
        Page {
            path,
            text: String::new(),
            anchors,
        }
    }

    fn anchor(&mut self, e: ElementRef) -> String {
        let id = anchor_id(&e);
        self.anchors.insert(e, format!("{}#{id}", self.path));
        format!("<a id=\"{id}\"></a>")
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn fenced(&mut self, lang: &str, body: &str) {
        writeln!(self.text, "```{lang}\n{body}```").unwrap();
    }
}

fn names(ids: &[Ident]) -> String {
    if ids.is_empty() {
        "-".to_string()
    } else {
        ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ")
    }
}

/// Markdown documentation: an index, one page per populated level and
/// one page per agent.
pub fn docs_bundle(model: &ResolvedModel) -> DocsBundle {
    let mut files = BTreeMap::new();
    let mut index = Vec::new();
    let mut anchors = BTreeMap::new();

    {
        let mut p = Page::new("c1.md", &mut anchors);
        context_page(model, &mut p);
        files.insert("c1.md".to_string(), p.text);
        index.push(("Context (C1)".to_string(), "c1.md".to_string()));
    }
    if model.deployment().is_some() {
        let mut p = Page::new("c2.md", &mut anchors);
        deployment_page(model, &mut p);
        files.insert("c2.md".to_string(), p.text);
        index.push(("Deployment (C2)".to_string(), "c2.md".to_string()));
    }
    if model.tasks().any(|(_, t)| t.is_composite()) {
        let mut p = Page::new("c3.md", &mut anchors);
        composite_page(model, &mut p);
        files.insert("c3.md".to_string(), p.text);
        index.push(("Composite tasks (C3)".to_string(), "c3.md".to_string()));
    }
    if model.tasks().any(|(_, t)| !t.is_composite()) {
        let mut p = Page::new("c4.md", &mut anchors);
        leaf_page(model, &mut p);
        files.insert("c4.md".to_string(), p.text);
        index.push(("Leaf tasks (C4)".to_string(), "c4.md".to_string()));
    }
    for agent in &model.agents {
        let path = format!("agents/{}.md", agent.name);
        let mut p = Page::new(&path, &mut anchors);
        agent_page(model, agent, &mut p);
        files.insert(path.clone(), p.text);
        index.push((format!("Agent {}", agent.name), path));
    }

    let mut s = String::new();
    writeln!(s, "# {}\n", model.name).unwrap();
    s.push_str("| Page | Path |\n| --- | --- |\n");
    for (title, path) in &index {
        writeln!(s, "| [{title}]({path}) | `{path}` |").unwrap();
    }
    files.insert("index.md".to_string(), s);
    index.insert(0, ("Index".to_string(), "index.md".to_string()));
    DocsBundle {
        files,
        index,
        anchors,
    }
}

fn context_page(model: &ResolvedModel, p: &mut Page<'_>) {
    p.line("# Context (C1)\n");
    let diagram = render_context(model);
    p.fenced("plantuml", &diagram.body);
    if let Some(ctx) = model.context() {
        p.line("\n## Actors\n");
        p.line("| Actor | Kind |\n| --- | --- |");
        for a in &ctx.actors {
            let kind = match a.kind {
                ActorKind::System => "system",
                ActorKind::User => "user",
                ActorKind::ExternalSystem => "external system",
            };
            let anchor = p.anchor(ElementRef::Actor(a.name.name.clone()));
            p.line(format!("| {anchor}{} | {kind} |", a.name));
        }
        if !ctx.flows.is_empty() {
            p.line("\n## Flows\n");
            p.line("| From | To | Artifacts |\n| --- | --- | --- |");
            for (i, f) in ctx.flows.iter().enumerate() {
                let anchor = p.anchor(ElementRef::flow(i, f));
                p.line(format!("| {anchor}{} | {} | {} |", f.from, f.to, names(&f.artifacts)));
            }
        }
    }
    if !model.llms.is_empty() {
        p.line("\n## LLMs\n");
        p.line("| LLM | Version | Default |\n| --- | --- | --- |");
        for l in &model.llms {
            let anchor = p.anchor(ElementRef::Llm(l.name.name.clone()));
            let version = l.version.as_deref().unwrap_or("-");
            let default = if l.default { "yes" } else { "no" };
            p.line(format!("| {anchor}{} | {version} | {default} |", l.name));
        }
    }
    if !model.tools.is_empty() {
        p.line("\n## Tools\n");
        p.line("| Tool | External |\n| --- | --- |");
        for t in &model.tools {
            let anchor = p.anchor(ElementRef::Tool(t.name.name.clone()));
            let external = if t.external { "yes" } else { "no" };
            p.line(format!("| {anchor}{} | {external} |", t.name));
        }
    }
    if !model.artifacts.is_empty() {
        p.line("\n## Artifacts\n");
        p.line("| Artifact | Collection of |\n| --- | --- |");
        for a in &model.artifacts {
            let anchor = p.anchor(ElementRef::Artifact(a.name.name.clone()));
            let elem = a.element_type.as_ref().map_or("-", |e| e.as_str());
            p.line(format!("| {anchor}{} | {elem} |", a.name));
        }
    }
}

fn deployment_page(model: &ResolvedModel, p: &mut Page<'_>) {
    let Ok(diagram) = render_deployment(model) else { return };
    let dep = model.deployment().expect("deployment present");
    p.line("# Deployment (C2)\n");
    p.fenced("plantuml", &diagram.body);
    p.line("\n## Nodes\n");
    p.line("| Node | External | Hosts |\n| --- | --- | --- |");
    for n in &dep.nodes {
        let anchor = p.anchor(ElementRef::DeploymentNode(n.name.name.clone()));
        let external = if n.external { "yes" } else { "no" };
        p.line(format!("| {anchor}{} | {external} | {} |", n.name, names(&n.hosts)));
    }
    if !dep.links.is_empty() {
        p.line("\n## Links\n");
        p.line("| From | To | Protocol | Artifacts |\n| --- | --- | --- | --- |");
        for (i, l) in dep.links.iter().enumerate() {
            let anchor = p.anchor(ElementRef::link(i, l));
            p.line(format!(
                "| {anchor}{} | {} | {} | {} |",
                l.from,
                l.to,
                l.protocol,
                names(&l.artifacts)
            ));
        }
    }
}

fn signature(p: &mut Page<'_>, task: &Task) {
    p.line(format!("- in: {}", names(&task.io.inputs)));
    p.line(format!("- out: {}", names(&task.io.outputs)));
}

fn diagram(model: &ResolvedModel, p: &mut Page<'_>, key: &TaskKey) {
    if let Ok(d) = render_activity(model, key) {
        let nodes: Vec<String> = d
            .anchors
            .keys()
            .filter_map(|e| match e {
                ElementRef::ActivityNode { node, .. } => {
                    let node = node.clone();
                    Some(format!("{}`{node}`", p.anchor(e.clone())))
                }
                _ => None,
            })
            .collect();
        if !nodes.is_empty() {
            p.line(format!("\nNodes: {}", nodes.join(", ")));
        }
        p.line("");
        p.fenced("dot", &d.body);
    }
}

fn composite_page(model: &ResolvedModel, p: &mut Page<'_>) {
    p.line("# Composite tasks (C3)");
    for (agent, task) in model.tasks().filter(|(_, t)| t.is_composite()) {
        let key = TaskKey::new(&agent.name.name, &task.name.name);
        let anchor = p.anchor(ElementRef::task(&key.agent, &key.task));
        p.line(format!("\n## {anchor}{key}\n"));
        signature(p, task);
        let body = task.body.as_ref().expect("composite task has a body");
        let class = classify_body(agent, task, body);
        p.line(format!("\nPattern: **{}**\n", class.value));
        for e in &class.evidence {
            let els: Vec<String> = e.elements.iter().map(|x| format!("`{x}`")).collect();
            p.line(format!("- {}: {}", e.criterion, els.join(", ")));
        }
        let loops = loop_facts(task);
        if !loops.is_empty() {
            p.line("\nLoops:\n");
            for l in loops {
                let exits: Vec<String> = l
                    .exits
                    .iter()
                    .map(|x| format!("`{} -> {} {}`", x.from, x.to, x.guard))
                    .collect();
                let exits = if exits.is_empty() { "none".to_string() } else { exits.join(", ") };
                p.line(format!("- `{}` exits: {exits}", l.path()));
            }
        }
        diagram(model, p, &key);
    }
}

fn leaf_page(model: &ResolvedModel, p: &mut Page<'_>) {
    p.line("# Leaf tasks (C4)");
    for (agent, task) in model.tasks().filter(|(_, t)| !t.is_composite()) {
        let key = TaskKey::new(&agent.name.name, &task.name.name);
        let anchor = p.anchor(ElementRef::task(&key.agent, &key.task));
        p.line(format!("\n## {anchor}{key}\n"));
        signature(p, task);
        let tools: Vec<_> = task.tool_calls().collect();
        if !tools.is_empty() {
            p.line("\nTool calls:\n");
            for (node, call) in tools {
                p.line(format!(
                    "- `{}` {} (in: {}; out: {})",
                    node.id,
                    call.display(),
                    names(&call.io.inputs),
                    names(&call.io.outputs)
                ));
            }
        }
        if let Some(prompt) = &task.prompt {
            p.line("\nPrompt:\n");
            p.text.push_str(&prompt_table(&prompt.rows));
        }
        if task.body.is_some() {
            diagram(model, p, &key);
        }
    }
}

fn agent_page(model: &ResolvedModel, agent: &Agent, p: &mut Page<'_>) {
    let anchor = p.anchor(ElementRef::Agent(agent.name.name.clone()));
    p.line(format!("# {anchor}«agent» {}\n", agent.name));
    match model.llm_binding(agent) {
        Some(llm) if agent.llm.is_some() => p.line(format!("- LLM: {}", llm.name)),
        Some(llm) => p.line(format!("- LLM: {} (default)", llm.name)),
        None => p.line("- LLM: none"),
    }
    if let Some(node) = model.deployment().and_then(|d| d.host_of(&agent.name.name)) {
        p.line(format!("- Hosted on: {}", node.name));
    }
    if !agent.stores.is_empty() {
        p.line("\n## Datastores\n");
        for st in &agent.stores {
            let anchor = p.anchor(ElementRef::Datastore {
                agent: agent.name.name.clone(),
                store: st.name.name.clone(),
            });
            p.line(format!("- {anchor}«datastore» {} : {}", st.name, st.artifact));
        }
    }
    if !agent.tasks.is_empty() {
        p.line("\n## Tasks\n");
        for task in &agent.tasks {
            let (page, level) = if task.is_composite() { ("c3.md", "C3") } else { ("c4.md", "C4") };
            let id = anchor_id(&ElementRef::task(&agent.name.name, &task.name.name));
            p.line(format!("- [{}](../{page}#{id}) ({level})", task.name));
        }
    }
}

//! Deterministic text emitters: PlantUML context and deployment views,
//! DOT activity graphs, markdown prompt tables and a documentation bundle.

mod activity;
mod context;
mod deployment;
mod docs;
mod prompts;

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::{Component, Path};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::diag::Diagnostic;
use crate::model::{ElementRef, Span};
use crate::resolve::{ResolvedModel, TaskKey};

pub use activity::render_activity;
pub use context::render_context;
pub use deployment::render_deployment;
pub use docs::{docs_bundle, DocsBundle};
pub use prompts::render_prompts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramKind {
    Context,
    Deployment,
    Activity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramText {
    pub kind: DiagramKind,
    pub body: String,
    /// Anchor id of every element drawn; each id occurs in `body`.
    pub anchors: BTreeMap<ElementRef, String>,
}

impl fmt::Display for DiagramText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.body)
    }
}

/// Stable identifier for an element, usable as a PlantUML alias, a DOT
/// node id and an HTML anchor.
pub fn anchor_id(element: &ElementRef) -> String {
    match element {
        ElementRef::Actor(n) => format!("actor_{n}"),
        ElementRef::Llm(n) => format!("llm_{n}"),
        ElementRef::Tool(n) => format!("tool_{n}"),
        ElementRef::Artifact(n) => format!("artifact_{n}"),
        ElementRef::Agent(n) => format!("agent_{n}"),
        ElementRef::DeploymentNode(n) => format!("node_{n}"),
        ElementRef::Flow { index, from, to } => format!("flow_{index}_{from}_{to}"),
        ElementRef::Link { index, from, to } => format!("link_{index}_{from}_{to}"),
        ElementRef::Task { agent, task } => format!("task_{agent}__{task}"),
        ElementRef::Datastore { agent, store } => format!("store_{agent}__{store}"),
        ElementRef::ActivityNode { agent, task, node } => format!("act_{agent}__{task}__{node}"),
    }
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Files produced by a render run, keyed by relative path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutputTree {
    files: BTreeMap<String, String>,
}

impl OutputTree {
    pub fn insert(&mut self, path: impl Into<String>, content: impl Into<String>) {
        let path = path.into();
        debug_assert!(is_safe_relative(&path), "{path}");
        self.files.insert(path, content.into());
    }

    pub fn files(&self) -> &BTreeMap<String, String> {
        &self.files
    }

    pub fn get(&self, path: &str) -> Option<&str> {
        self.files.get(path).map(String::as_str)
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    /// `{"files":[{"path","sha256"}]}` over every file but the manifest.
    pub fn manifest(&self) -> Value {
        let files: Vec<Value> = self
            .files
            .iter()
            .filter(|(p, _)| p.as_str() != "manifest.json")
            .map(|(p, c)| json!({"path": p, "sha256": hex::encode(Sha256::digest(c.as_bytes()))}))
            .collect();
        json!({ "files": files })
    }

    pub fn with_manifest(mut self) -> Self {
        let text = serde_json::to_string_pretty(&self.manifest()).expect("manifest serializes") + "\n";
        self.files.insert("manifest.json".into(), text);
        self
    }

    /// Writes every file below `dir`, creating directories as needed.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (path, content) in &self.files {
            let target = dir.join(path);
            if let Some(parent) = target.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(target, content)?;
        }
        Ok(())
    }
}

pub fn is_safe_relative(path: &str) -> bool {
    !path.is_empty()
        && Path::new(path)
            .components()
            .all(|c| matches!(c, Component::Normal(_)))
}

pub fn task_file_stem(key: &TaskKey) -> String {
    format!("{}.{}", key.agent, key.task)
}

fn render_error(model: &ResolvedModel, code: &str, message: String, span: Span) -> Diagnostic {
    Diagnostic::error(code, message, model.file(), span)
}

/// One output level, selected by name from the CLI.
pub trait Renderer: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn render(&self, model: &ResolvedModel, out: &mut OutputTree) -> Result<(), Diagnostic>;
}

struct ContextRenderer;
struct DeploymentRenderer;
struct CompositeRenderer;
struct LeafRenderer;

impl Renderer for ContextRenderer {
    fn name(&self) -> &'static str {
        "c1"
    }

    fn description(&self) -> &'static str {
        "context diagram (PlantUML)"
    }

    fn render(&self, model: &ResolvedModel, out: &mut OutputTree) -> Result<(), Diagnostic> {
        out.insert("c1.puml", render_context(model).body);
        Ok(())
    }
}

impl Renderer for DeploymentRenderer {
    fn name(&self) -> &'static str {
        "c2"
    }

    fn description(&self) -> &'static str {
        "deployment diagram (PlantUML)"
    }

    fn render(&self, model: &ResolvedModel, out: &mut OutputTree) -> Result<(), Diagnostic> {
        out.insert("c2.puml", render_deployment(model)?.body);
        Ok(())
    }
}

impl Renderer for CompositeRenderer {
    fn name(&self) -> &'static str {
        "c3"
    }

    fn description(&self) -> &'static str {
        "activity graphs of composite tasks (DOT)"
    }

    fn render(&self, model: &ResolvedModel, out: &mut OutputTree) -> Result<(), Diagnostic> {
        for (agent, task) in model.tasks().filter(|(_, t)| t.is_composite()) {
            let key = TaskKey::new(&agent.name.name, &task.name.name);
            let dot = render_activity(model, &key)?;
            out.insert(format!("activity/{}.dot", task_file_stem(&key)), dot.body);
        }
        Ok(())
    }
}

impl Renderer for LeafRenderer {
    fn name(&self) -> &'static str {
        "c4"
    }

    fn description(&self) -> &'static str {
        "leaf task activity graphs (DOT) and prompt tables (markdown)"
    }

    fn render(&self, model: &ResolvedModel, out: &mut OutputTree) -> Result<(), Diagnostic> {
        for (agent, task) in model.tasks() {
            let key = TaskKey::new(&agent.name.name, &task.name.name);
            if !task.is_composite() && task.body.is_some() {
                let dot = render_activity(model, &key)?;
                out.insert(format!("activity/{}.dot", task_file_stem(&key)), dot.body);
            }
            if task.prompt.is_some() {
                out.insert(
                    format!("prompts/{}.md", task_file_stem(&key)),
                    render_prompts(model, &key)?,
                );
            }
        }
        Ok(())
    }
}

pub struct RendererRegistry {
    renderers: Vec<Box<dyn Renderer>>,
}

impl Default for RendererRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl RendererRegistry {
    pub fn standard() -> Self {
        Self {
            renderers: vec![
                Box::new(ContextRenderer),
                Box::new(DeploymentRenderer),
                Box::new(CompositeRenderer),
                Box::new(LeafRenderer),
            ],
        }
    }

    pub fn register(&mut self, renderer: Box<dyn Renderer>) {
        self.renderers.push(renderer);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.renderers.iter().map(|r| r.name()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&dyn Renderer> {
        self.renderers
            .iter()
            .find(|r| r.name().eq_ignore_ascii_case(name))
            .map(|r| r.as_ref())
    }

    /// Renders one level, or every level for `all`. With `all`, a model
    /// without deployment simply has no `c2.puml`.
    pub fn render(&self, model: &ResolvedModel, level: &str, out: &mut OutputTree) -> Result<(), Diagnostic> {
        if level.eq_ignore_ascii_case("all") {
            for r in &self.renderers {
                if r.name() == "c2" && model.deployment().is_none() {
                    continue;
                }
                r.render(model, out)?;
            }
            return Ok(());
        }
        match self.get(level) {
            Some(r) => r.render(model, out),
            None => Err(render_error(
                model,
                "R000",
                format!("unknown render level `{level}`"),
                Span::default(),
            )),
        }
    }
}

/// Every diagram and the documentation bundle under `docs/`, plus the
/// manifest.
pub fn full_tree(model: &ResolvedModel) -> Result<OutputTree, Diagnostic> {
    let mut out = OutputTree::default();
    RendererRegistry::standard().render(model, "all", &mut out)?;
    for (path, content) in docs_bundle(model).files {
        out.insert(format!("docs/{path}"), content);
    }
    Ok(out.with_manifest())
}

/// Anchors of every element across all rendered artifacts.
pub fn all_anchors(model: &ResolvedModel) -> BTreeMap<ElementRef, String> {
    let mut anchors = render_context(model).anchors;
    if let Ok(d) = render_deployment(model) {
        anchors.extend(d.anchors);
    }
    for (agent, task) in model.tasks() {
        let key = TaskKey::new(&agent.name.name, &task.name.name);
        if let Ok(a) = render_activity(model, &key) {
            anchors.extend(a.anchors);
        }
    }
    anchors.extend(docs_bundle(model).anchors);
    anchors
}

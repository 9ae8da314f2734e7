//! Metamodel for agentic architecture descriptions.
//!
//! A [`Model`] covers all four description levels: the context (users,
//! the system, external systems, LLMs and tools), the deployment view
//! (nodes, hosted agents and tools, protocol links), and the agents with
//! their tasks, whose bodies are activity graphs of task calls, tool calls,
//! quality gates and datastore accesses.
//!
//! Every declaration and reference carries the [`Span`] it was parsed from.
//! Two models are *structurally equal* when they are equal after all spans
//! are cleared, see [`Model::structurally_eq`].

use std::cmp::Ordering;
use std::fmt;
use std::path::PathBuf;

/// 1-based line/column position. `Pos::default()` (0:0) marks synthetic
/// elements that were not read from a file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl Pos {
    pub fn new(line: u32, column: u32) -> Self {
        Self { line, column }
    }
}

/// Half-open source range; `end` is the position just past the last character.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn new(start: Pos, end: Pos) -> Self {
        Self { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span {
            start: self.start,
            end: other.end,
        }
    }

    pub fn is_synthetic(&self) -> bool {
        self.start.line == 0
    }
}

/// A name together with where it was written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            span: Span::default(),
        }
    }

    pub fn spanned(name: impl Into<String>, span: Span) -> Self {
        Self {
            name: name.into(),
            span,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActorKind {
    System,
    User,
    ExternalSystem,
}

impl ActorKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ActorKind::System => "system",
            ActorKind::User => "user",
            ActorKind::ExternalSystem => "external",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Actor {
    pub kind: ActorKind,
    pub name: Ident,
    pub span: Span,
}

/// Directed C1 connection labeled with the artifacts it carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextFlow {
    pub from: Ident,
    pub to: Ident,
    pub artifacts: Vec<Ident>,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextSection {
    pub actors: Vec<Actor>,
    pub flows: Vec<ContextFlow>,
    pub span: Span,
}

impl ContextSection {
    pub fn system(&self) -> Option<&Actor> {
        self.actors.iter().find(|a| a.kind == ActorKind::System)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmDecl {
    pub name: Ident,
    pub version: Option<String>,
    pub default: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolDecl {
    pub name: Ident,
    pub external: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeploymentNode {
    pub name: Ident,
    pub external: bool,
    /// Agents and tools running on this node.
    pub hosts: Vec<Ident>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeploymentLink {
    pub from: Ident,
    pub to: Ident,
    pub protocol: String,
    /// Optional artifacts exchanged over the link.
    pub artifacts: Vec<Ident>,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeploymentSection {
    pub nodes: Vec<DeploymentNode>,
    pub links: Vec<DeploymentLink>,
    pub span: Span,
}

impl DeploymentSection {
    /// Node hosting `element`, first declaration wins.
    pub fn host_of(&self, element: &str) -> Option<&DeploymentNode> {
        self.nodes
            .iter()
            .find(|n| n.hosts.iter().any(|h| h.name == element))
    }

    pub fn linked(&self, a: &str, b: &str) -> bool {
        self.links.iter().any(|l| {
            (l.from.name == a && l.to.name == b) || (l.from.name == b && l.to.name == a)
        })
    }
}

/// Artifact type; `element_type` is present iff this is a collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactType {
    pub name: Ident,
    pub element_type: Option<Ident>,
    pub span: Span,
}

impl ArtifactType {
    pub fn is_collection(&self) -> bool {
        self.element_type.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Datastore {
    pub name: Ident,
    pub artifact: Ident,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Io {
    pub inputs: Vec<Ident>,
    pub outputs: Vec<Ident>,
}

impl Io {
    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty() && self.outputs.is_empty()
    }

    pub fn consumes(&self, artifact: &str) -> bool {
        self.inputs.iter().any(|i| i.name == artifact)
    }

    pub fn produces(&self, artifact: &str) -> bool {
        self.outputs.iter().any(|i| i.name == artifact)
    }
}

/// Where the `in` / `out` lines of a task header were written.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IoSpans {
    pub inputs: Span,
    pub outputs: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub name: Ident,
    pub io: Io,
    pub io_spans: IoSpans,
    pub body: Option<ActivityGraph>,
    pub prompt: Option<PromptSpec>,
    pub span: Span,
}

impl Task {
    /// A task is composite iff its body contains at least one task call.
    pub fn is_composite(&self) -> bool {
        self.body
            .as_ref()
            .is_some_and(|b| b.nodes.iter().any(|n| matches!(n.kind, NodeKind::Call(_))))
    }

    pub fn level(&self) -> Level {
        if self.is_composite() {
            Level::C3
        } else {
            Level::C4
        }
    }

    pub fn calls(&self) -> impl Iterator<Item = (&ActivityNode, &TaskCall)> {
        self.nodes().filter_map(|n| match &n.kind {
            NodeKind::Call(c) => Some((n, c)),
            _ => None,
        })
    }

    pub fn tool_calls(&self) -> impl Iterator<Item = (&ActivityNode, &ToolCall)> {
        self.nodes().filter_map(|n| match &n.kind {
            NodeKind::Invoke(c) => Some((n, c)),
            _ => None,
        })
    }

    fn nodes(&self) -> impl Iterator<Item = &ActivityNode> {
        self.body.iter().flat_map(|b| b.nodes.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub name: Ident,
    pub llm: Option<Ident>,
    pub stores: Vec<Datastore>,
    pub tasks: Vec<Task>,
    pub span: Span,
}

impl Agent {
    pub fn task(&self, name: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.name.name == name)
    }

    pub fn store(&self, name: &str) -> Option<&Datastore> {
        self.stores.iter().find(|s| s.name.name == name)
    }
}

/// Body of a task: declared nodes plus edges. The initial and final nodes
/// are implicit and addressed by the `start` / `end` endpoints; datastore
/// nodes are implied by `Store.read` / `Store.write` endpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActivityGraph {
    pub nodes: Vec<ActivityNode>,
    pub edges: Vec<ActivityEdge>,
    pub span: Span,
}

impl ActivityGraph {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    pub fn node(&self, id: &str) -> Option<&ActivityNode> {
        self.nodes.iter().find(|n| n.id.name == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityNode {
    pub id: Ident,
    pub kind: NodeKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Call(TaskCall),
    Invoke(ToolCall),
    Decision { subject: Ident },
    Fork,
    Join,
    Merge,
}

impl NodeKind {
    /// Artifacts read by the node (call inputs including the iterated
    /// collection, tool inputs, or the gated artifact of a decision).
    pub fn consumed(&self) -> Vec<&Ident> {
        match self {
            NodeKind::Call(c) => c.io.inputs.iter().chain(c.each.iter()).collect(),
            NodeKind::Invoke(t) => t.io.inputs.iter().collect(),
            NodeKind::Decision { subject } => vec![subject],
            _ => Vec::new(),
        }
    }

    pub fn produced(&self) -> &[Ident] {
        match self {
            NodeKind::Call(c) => &c.io.outputs,
            NodeKind::Invoke(t) => &t.io.outputs,
            _ => &[],
        }
    }
}

/// `<<TaskCall>>`: invocation of `task` on `agent` (the enclosing agent
/// when absent). `each` names the collection processed element-wise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskCall {
    pub task: Ident,
    pub agent: Option<Ident>,
    pub each: Option<Ident>,
    pub io: Io,
}

impl TaskCall {
    pub fn element_wise(&self) -> bool {
        self.each.is_some()
    }

    pub fn callee_agent<'a>(&'a self, enclosing: &'a str) -> &'a str {
        self.agent.as_ref().map_or(enclosing, |a| a.as_str())
    }

    pub fn is_self_call(&self, enclosing: &str) -> bool {
        self.callee_agent(enclosing) == enclosing
    }

    /// `task:Agent`, or just `task` for a call on the enclosing agent.
    pub fn display(&self, enclosing: &str) -> String {
        if self.is_self_call(enclosing) {
            self.task.name.clone()
        } else {
            format!("{}:{}", self.task, self.callee_agent(enclosing))
        }
    }
}

/// `<<ToolCall>>`: `operation` on `tool`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolCall {
    pub tool: Ident,
    pub operation: Ident,
    pub io: Io,
}

impl ToolCall {
    pub fn display(&self) -> String {
        format!("{}:{}", self.operation, self.tool)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Start,
    End,
    Node(Ident),
    StoreRead(Ident),
    StoreWrite(Ident),
}

impl Endpoint {
    pub fn store(&self) -> Option<&Ident> {
        match self {
            Endpoint::StoreRead(s) | Endpoint::StoreWrite(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Start => f.write_str("start"),
            Endpoint::End => f.write_str("end"),
            Endpoint::Node(id) => write!(f, "{id}"),
            Endpoint::StoreRead(s) => write!(f, "{s}.read"),
            Endpoint::StoreWrite(s) => write!(f, "{s}.write"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Control,
    StoreRead,
    StoreWrite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityEdge {
    pub from: Endpoint,
    pub to: Endpoint,
    pub guard: Option<Guard>,
    pub span: Span,
}

impl ActivityEdge {
    pub fn kind(&self) -> EdgeKind {
        if matches!(self.from, Endpoint::StoreRead(_)) {
            EdgeKind::StoreRead
        } else if matches!(self.to, Endpoint::StoreWrite(_)) {
            EdgeKind::StoreWrite
        } else {
            EdgeKind::Control
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub form: GuardForm,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuardForm {
    Equals { artifact: Ident, literal: Ident },
    Else,
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            GuardForm::Equals { artifact, literal } => write!(f, "[{artifact} == {literal}]"),
            GuardForm::Else => f.write_str("[else]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PromptPart {
    Static,
    TaskSpecific,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptRow {
    pub part: PromptPart,
    pub name: Ident,
    pub template: String,
    pub span: Span,
}

impl PromptRow {
    /// `{Name}` placeholders in the template, in order of appearance.
    pub fn placeholders(&self) -> Vec<&str> {
        placeholders(&self.template)
    }
}

pub fn placeholders(template: &str) -> Vec<&str> {
    let mut found = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let len = after
            .char_indices()
            .take_while(|(i, c)| {
                if *i == 0 {
                    c.is_ascii_alphabetic()
                } else {
                    c.is_ascii_alphanumeric() || *c == '_'
                }
            })
            .count();
        if len > 0 && after[len..].starts_with('}') {
            found.push(&after[..len]);
            rest = &after[len + 1..];
        } else {
            rest = after;
        }
    }
    found
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PromptSpec {
    pub rows: Vec<PromptRow>,
    pub span: Span,
}

/// Root of a parsed description. Context and deployment are kept as lists
/// so that duplicates survive parsing and can be reported by resolution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    pub name: String,
    pub file: PathBuf,
    pub contexts: Vec<ContextSection>,
    pub deployments: Vec<DeploymentSection>,
    pub artifacts: Vec<ArtifactType>,
    pub llms: Vec<LlmDecl>,
    pub tools: Vec<ToolDecl>,
    pub agents: Vec<Agent>,
    pub span: Span,
}

impl Model {
    pub fn context(&self) -> Option<&ContextSection> {
        self.contexts.first()
    }

    pub fn deployment(&self) -> Option<&DeploymentSection> {
        self.deployments.first()
    }

    pub fn artifact(&self, name: &str) -> Option<&ArtifactType> {
        self.artifacts.iter().find(|a| a.name.name == name)
    }

    pub fn agent(&self, name: &str) -> Option<&Agent> {
        self.agents.iter().find(|a| a.name.name == name)
    }

    pub fn tool(&self, name: &str) -> Option<&ToolDecl> {
        self.tools.iter().find(|t| t.name.name == name)
    }

    pub fn llm(&self, name: &str) -> Option<&LlmDecl> {
        self.llms.iter().find(|l| l.name.name == name)
    }

    pub fn default_llm(&self) -> Option<&LlmDecl> {
        self.llms.iter().find(|l| l.default)
    }

    pub fn is_collection(&self, artifact: &str) -> bool {
        self.artifact(artifact).is_some_and(|a| a.is_collection())
    }

    /// Copy of the model with every span and the file path cleared.
    pub fn without_spans(&self) -> Model {
        let mut m = self.clone();
        m.strip_spans();
        m
    }

    /// Equality modulo source positions.
    pub fn structurally_eq(&self, other: &Model) -> bool {
        self.without_spans() == other.without_spans()
    }

    /// Every element that rendered documentation must account for.
    pub fn elements(&self) -> Vec<ElementRef> {
        let mut out = Vec::new();
        if let Some(ctx) = self.context() {
            out.extend(ctx.actors.iter().map(|a| ElementRef::Actor(a.name.name.clone())));
            out.extend(ctx.flows.iter().enumerate().map(|(i, f)| ElementRef::flow(i, f)));
        }
        out.extend(self.llms.iter().map(|l| ElementRef::Llm(l.name.name.clone())));
        out.extend(self.tools.iter().map(|t| ElementRef::Tool(t.name.name.clone())));
        out.extend(self.artifacts.iter().map(|a| ElementRef::Artifact(a.name.name.clone())));
        if let Some(dep) = self.deployment() {
            out.extend(dep.nodes.iter().map(|n| ElementRef::DeploymentNode(n.name.name.clone())));
            out.extend(dep.links.iter().enumerate().map(|(i, l)| ElementRef::link(i, l)));
        }
        for agent in &self.agents {
            out.push(ElementRef::Agent(agent.name.name.clone()));
            for store in &agent.stores {
                out.push(ElementRef::Datastore {
                    agent: agent.name.name.clone(),
                    store: store.name.name.clone(),
                });
            }
            for task in &agent.tasks {
                out.push(ElementRef::task(&agent.name.name, &task.name.name));
                for node in task.body.iter().flat_map(|b| &b.nodes) {
                    out.push(ElementRef::ActivityNode {
                        agent: agent.name.name.clone(),
                        task: task.name.name.clone(),
                        node: node.id.name.clone(),
                    });
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

trait StripSpans {
    fn strip_spans(&mut self);
}

impl<T: StripSpans> StripSpans for Vec<T> {
    fn strip_spans(&mut self) {
        self.iter_mut().for_each(StripSpans::strip_spans);
    }
}

impl<T: StripSpans> StripSpans for Option<T> {
    fn strip_spans(&mut self) {
        if let Some(v) = self {
            v.strip_spans();
        }
    }
}

impl StripSpans for Ident {
    fn strip_spans(&mut self) {
        self.span = Span::default();
    }
}

impl StripSpans for Io {
    fn strip_spans(&mut self) {
        self.inputs.strip_spans();
        self.outputs.strip_spans();
    }
}

impl StripSpans for Endpoint {
    fn strip_spans(&mut self) {
        match self {
            Endpoint::Start | Endpoint::End => {}
            Endpoint::Node(i) | Endpoint::StoreRead(i) | Endpoint::StoreWrite(i) => i.strip_spans(),
        }
    }
}

impl StripSpans for Model {
    fn strip_spans(&mut self) {
        self.file = PathBuf::new();
        self.span = Span::default();
        for ctx in &mut self.contexts {
            ctx.span = Span::default();
            for a in &mut ctx.actors {
                a.span = Span::default();
                a.name.strip_spans();
            }
            for f in &mut ctx.flows {
                f.span = Span::default();
                f.from.strip_spans();
                f.to.strip_spans();
                f.artifacts.strip_spans();
            }
        }
        for dep in &mut self.deployments {
            dep.span = Span::default();
            for n in &mut dep.nodes {
                n.span = Span::default();
                n.name.strip_spans();
                n.hosts.strip_spans();
            }
            for l in &mut dep.links {
                l.span = Span::default();
                l.from.strip_spans();
                l.to.strip_spans();
                l.artifacts.strip_spans();
            }
        }
        for a in &mut self.artifacts {
            a.span = Span::default();
            a.name.strip_spans();
            a.element_type.strip_spans();
        }
        for l in &mut self.llms {
            l.span = Span::default();
            l.name.strip_spans();
        }
        for t in &mut self.tools {
            t.span = Span::default();
            t.name.strip_spans();
        }
        self.agents.strip_spans();
    }
}

impl StripSpans for Agent {
    fn strip_spans(&mut self) {
        self.span = Span::default();
        self.name.strip_spans();
        self.llm.strip_spans();
        for s in &mut self.stores {
            s.span = Span::default();
            s.name.strip_spans();
            s.artifact.strip_spans();
        }
        self.tasks.strip_spans();
    }
}

impl StripSpans for Task {
    fn strip_spans(&mut self) {
        self.span = Span::default();
        self.io_spans = IoSpans::default();
        self.name.strip_spans();
        self.io.strip_spans();
        if let Some(body) = &mut self.body {
            body.span = Span::default();
            body.nodes.strip_spans();
            body.edges.strip_spans();
        }
        if let Some(prompt) = &mut self.prompt {
            prompt.span = Span::default();
            for row in &mut prompt.rows {
                row.span = Span::default();
                row.name.strip_spans();
            }
        }
    }
}

impl StripSpans for ActivityNode {
    fn strip_spans(&mut self) {
        self.span = Span::default();
        self.id.strip_spans();
        match &mut self.kind {
            NodeKind::Call(c) => {
                c.task.strip_spans();
                c.agent.strip_spans();
                c.each.strip_spans();
                c.io.strip_spans();
            }
            NodeKind::Invoke(t) => {
                t.tool.strip_spans();
                t.operation.strip_spans();
                t.io.strip_spans();
            }
            NodeKind::Decision { subject } => subject.strip_spans(),
            NodeKind::Fork | NodeKind::Join | NodeKind::Merge => {}
        }
    }
}

impl StripSpans for ActivityEdge {
    fn strip_spans(&mut self) {
        self.span = Span::default();
        self.from.strip_spans();
        self.to.strip_spans();
        if let Some(g) = &mut self.guard {
            g.span = Span::default();
            if let GuardForm::Equals { artifact, literal } = &mut g.form {
                artifact.strip_spans();
                literal.strip_spans();
            }
        }
    }
}

/// Description level a view or element belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    C1,
    C2,
    C3,
    C4,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::C1 => "C1",
            Level::C2 => "C2",
            Level::C3 => "C3",
            Level::C4 => "C4",
        })
    }
}

/// Reference to any model element. The display form is the element's
/// qualified name: agents, artifacts, tools, LLMs and actors by name,
/// tasks as `Agent.task`, activity nodes as `Agent.task#id`, flows and
/// links as `flow:From->To` / `link:From->To`, deployment nodes as
/// `node:Name`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ElementRef {
    Actor(String),
    Flow { index: usize, from: String, to: String },
    Llm(String),
    Tool(String),
    Artifact(String),
    DeploymentNode(String),
    Link { index: usize, from: String, to: String },
    Agent(String),
    Task { agent: String, task: String },
    Datastore { agent: String, store: String },
    ActivityNode { agent: String, task: String, node: String },
}

impl ElementRef {
    pub fn task(agent: &str, task: &str) -> Self {
        ElementRef::Task {
            agent: agent.to_string(),
            task: task.to_string(),
        }
    }

    pub fn flow(index: usize, flow: &ContextFlow) -> Self {
        ElementRef::Flow {
            index,
            from: flow.from.name.clone(),
            to: flow.to.name.clone(),
        }
    }

    pub fn link(index: usize, link: &DeploymentLink) -> Self {
        ElementRef::Link {
            index,
            from: link.from.name.clone(),
            to: link.to.name.clone(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ElementRef::Actor(_) => "actor",
            ElementRef::Flow { .. } => "flow",
            ElementRef::Llm(_) => "llm",
            ElementRef::Tool(_) => "tool",
            ElementRef::Artifact(_) => "artifact",
            ElementRef::DeploymentNode(_) => "node",
            ElementRef::Link { .. } => "link",
            ElementRef::Agent(_) => "agent",
            ElementRef::Task { .. } => "task",
            ElementRef::Datastore { .. } => "store",
            ElementRef::ActivityNode { .. } => "activity-node",
        }
    }

    fn sort_key(&self) -> (String, &'static str, usize) {
        let index = match self {
            ElementRef::Flow { index, .. } | ElementRef::Link { index, .. } => *index,
            _ => 0,
        };
        (self.to_string(), self.kind(), index)
    }
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementRef::Actor(n)
            | ElementRef::Llm(n)
            | ElementRef::Tool(n)
            | ElementRef::Artifact(n)
            | ElementRef::Agent(n) => f.write_str(n),
            ElementRef::DeploymentNode(n) => write!(f, "node:{n}"),
            ElementRef::Flow { from, to, .. } => write!(f, "flow:{from}->{to}"),
            ElementRef::Link { from, to, .. } => write!(f, "link:{from}->{to}"),
            ElementRef::Task { agent, task } => write!(f, "{agent}.{task}"),
            ElementRef::Datastore { agent, store } => write!(f, "{agent}.{store}"),
            ElementRef::ActivityNode { agent, task, node } => write!(f, "{agent}.{task}#{node}"),
        }
    }
}

impl Ord for ElementRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for ElementRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Qualified display name of an element.
pub fn qualified_name(element: &ElementRef) -> String {
    element.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholder_scan() {
        assert_eq!(placeholders("a {TestCode} b {TestLog}"), vec!["TestCode", "TestLog"]);
        assert_eq!(placeholders("{ not } {1x} {ok_1}"), vec!["ok_1"]);
        assert!(placeholders("plain").is_empty());
    }

    #[test]
    fn call_display_forms() {
        let call = TaskCall {
            task: Ident::new("execute"),
            agent: Some(Ident::new("Executor")),
            each: None,
            io: Io::default(),
        };
        assert_eq!(call.display("TestPipeline"), "execute:Executor");
        let own = TaskCall {
            task: Ident::new("createQuery"),
            agent: None,
            each: None,
            io: Io::default(),
        };
        assert_eq!(own.display("MarketSearchConductor"), "createQuery");
        assert_eq!(qualified_name(&ElementRef::Agent("DevTeam".into())), "DevTeam");
        assert_eq!(
            qualified_name(&ElementRef::task("Executor", "execute")),
            "Executor.execute"
        );
    }

    #[test]
    fn element_ordering_is_by_qualified_name() {
        let mut v = [
            ElementRef::task("B", "x"),
            ElementRef::Artifact("A".into()),
            ElementRef::Agent("B".into()),
        ];
        v.sort();
        let names: Vec<_> = v.iter().map(|e| e.to_string()).collect();
        assert_eq!(names, ["A", "B", "B.x"]);
    }
}

//! Name resolution and the task-decomposition call graph.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::Deref;
use std::path::Path;

use crate::diag::{sort_diagnostics, Diagnostic};
use crate::graph::strongly_connected;
use crate::model::*;

/// `(agent, task)` pair identifying a task.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskKey {
    pub agent: String,
    pub task: String,
}

impl TaskKey {
    pub fn new(agent: impl Into<String>, task: impl Into<String>) -> Self {
        Self {
            agent: agent.into(),
            task: task.into(),
        }
    }
}

impl fmt::Display for TaskKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.agent, self.task)
    }
}

/// Directed graph over tasks: `a -> b` iff the body of `a` calls `b`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallGraph {
    callees: BTreeMap<TaskKey, BTreeSet<TaskKey>>,
    callers: BTreeMap<TaskKey, BTreeSet<TaskKey>>,
}

impl CallGraph {
    pub fn tasks(&self) -> impl Iterator<Item = &TaskKey> {
        self.callees.keys()
    }

    pub fn callees(&self, task: &TaskKey) -> impl Iterator<Item = &TaskKey> {
        self.callees.get(task).into_iter().flatten()
    }

    pub fn callers(&self, task: &TaskKey) -> impl Iterator<Item = &TaskKey> {
        self.callers.get(task).into_iter().flatten()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&TaskKey, &TaskKey)> {
        self.callees
            .iter()
            .flat_map(|(from, tos)| tos.iter().map(move |to| (from, to)))
    }

    /// Tasks no other task calls.
    pub fn roots(&self) -> impl Iterator<Item = &TaskKey> {
        self.callees
            .keys()
            .filter(|k| self.callers.get(*k).is_none_or(BTreeSet::is_empty))
    }

    /// Groups of tasks that call each other recursively, including tasks
    /// calling themselves. Each group is sorted; groups are sorted.
    pub fn recursive_groups(&self) -> Vec<Vec<TaskKey>> {
        let keys: Vec<&TaskKey> = self.callees.keys().collect();
        let index: HashMap<&TaskKey, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let succ: Vec<Vec<usize>> = keys
            .iter()
            .map(|k| self.callees(k).map(|c| index[c]).collect())
            .collect();
        let mut groups: Vec<Vec<TaskKey>> = strongly_connected(&succ)
            .into_iter()
            .filter(|c| c.len() > 1 || succ[c[0]].contains(&c[0]))
            .map(|c| {
                let mut g: Vec<TaskKey> = c.into_iter().map(|i| keys[i].clone()).collect();
                g.sort();
                g
            })
            .collect();
        groups.sort();
        groups
    }
}

/// A model whose references all resolve. Immutable; dereferences to the
/// underlying [`Model`].
#[derive(Debug, Clone)]
pub struct ResolvedModel {
    model: Model,
    symbols: SymbolTable,
    call_graph: CallGraph,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    pub artifacts: BTreeMap<String, usize>,
    pub llms: BTreeMap<String, usize>,
    pub tools: BTreeMap<String, usize>,
    pub agents: BTreeMap<String, usize>,
    pub actors: BTreeMap<String, usize>,
    pub nodes: BTreeMap<String, usize>,
    pub tasks: BTreeMap<TaskKey, (usize, usize)>,
}

impl Deref for ResolvedModel {
    type Target = Model;

    fn deref(&self) -> &Model {
        &self.model
    }
}

impl ResolvedModel {
    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn into_model(self) -> Model {
        self.model
    }

    pub fn file(&self) -> &Path {
        &self.model.file
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn call_graph(&self) -> &CallGraph {
        &self.call_graph
    }

    pub fn task(&self, key: &TaskKey) -> Option<(&Agent, &Task)> {
        let &(a, t) = self.symbols.tasks.get(key)?;
        let agent = &self.model.agents[a];
        Some((agent, &agent.tasks[t]))
    }

    pub fn tasks(&self) -> impl Iterator<Item = (&Agent, &Task)> {
        self.model
            .agents
            .iter()
            .flat_map(|a| a.tasks.iter().map(move |t| (a, t)))
    }

    /// The LLM driving `agent`: its own binding, else the model default.
    pub fn llm_binding(&self, agent: &Agent) -> Option<&LlmDecl> {
        match &agent.llm {
            Some(name) => self.model.llm(&name.name),
            None => self.model.default_llm(),
        }
    }

    /// Target of a call made from the body of a task on `enclosing`.
    pub fn callee(&self, enclosing: &Agent, call: &TaskCall) -> Option<(&Agent, &Task)> {
        let agent = self.model.agent(call.callee_agent(&enclosing.name.name))?;
        Some((agent, agent.task(&call.task.name)?))
    }
}

/// Binds every name reference to its declaration.
///
/// Task names in call statements and tool names in invoke statements are
/// left to the semantic rules (E101 and E108), which report them with
/// their own codes.
pub fn resolve(model: Model) -> Result<ResolvedModel, Vec<Diagnostic>> {
    let mut r = Resolver {
        file: &model.file,
        model: &model,
        diags: Vec::new(),
    };
    r.run();
    let mut diags = r.diags;
    if !diags.is_empty() {
        sort_diagnostics(&mut diags);
        return Err(diags);
    }
    let symbols = symbol_table(&model);
    let call_graph = build_call_graph(&model);
    Ok(ResolvedModel {
        model,
        symbols,
        call_graph,
    })
}

/// Call graph over `(agent, task)` pairs; calls whose target does not
/// exist contribute no edge.
pub fn call_graph(model: &ResolvedModel) -> &CallGraph {
    model.call_graph()
}

/// C3 for composite tasks, C4 for leaf tasks.
pub fn level_of(task: &Task) -> Level {
    task.level()
}

fn index_by_name<'a>(names: impl Iterator<Item = &'a Ident>) -> BTreeMap<String, usize> {
    let mut map = BTreeMap::new();
    for (i, n) in names.enumerate() {
        map.entry(n.name.clone()).or_insert(i);
    }
    map
}

fn symbol_table(model: &Model) -> SymbolTable {
    let mut tasks = BTreeMap::new();
    for (ai, a) in model.agents.iter().enumerate() {
        for (ti, t) in a.tasks.iter().enumerate() {
            tasks.insert(TaskKey::new(&a.name.name, &t.name.name), (ai, ti));
        }
    }
    SymbolTable {
        artifacts: index_by_name(model.artifacts.iter().map(|a| &a.name)),
        llms: index_by_name(model.llms.iter().map(|l| &l.name)),
        tools: index_by_name(model.tools.iter().map(|t| &t.name)),
        agents: index_by_name(model.agents.iter().map(|a| &a.name)),
        actors: index_by_name(model.context().into_iter().flat_map(|c| c.actors.iter().map(|a| &a.name))),
        nodes: index_by_name(model.deployment().into_iter().flat_map(|d| d.nodes.iter().map(|n| &n.name))),
        tasks,
    }
}

fn build_call_graph(model: &Model) -> CallGraph {
    let mut g = CallGraph::default();
    for a in &model.agents {
        for t in &a.tasks {
            let key = TaskKey::new(&a.name.name, &t.name.name);
            g.callees.entry(key.clone()).or_default();
            g.callers.entry(key).or_default();
        }
    }
    for a in &model.agents {
        for t in &a.tasks {
            let from = TaskKey::new(&a.name.name, &t.name.name);
            for (_, call) in t.calls() {
                let to = TaskKey::new(call.callee_agent(&a.name.name), &call.task.name);
                if g.callees.contains_key(&to) {
                    g.callees.get_mut(&from).unwrap().insert(to.clone());
                    g.callers.get_mut(&to).unwrap().insert(from.clone());
                }
            }
        }
    }
    g
}

struct Resolver<'m> {
    file: &'m Path,
    model: &'m Model,
    diags: Vec<Diagnostic>,
}

impl<'m> Resolver<'m> {
    fn unresolved(&mut self, what: &str, id: &Ident) {
        self.diags.push(Diagnostic::error(
            "E001",
            format!("unresolved {what} `{}`", id.name),
            self.file,
            id.span,
        ));
    }

    fn invalid(&mut self, message: String, span: Span) {
        self.diags
            .push(Diagnostic::error("E003", message, self.file, span));
    }

    fn duplicates<'a>(&mut self, what: &str, names: impl Iterator<Item = &'a Ident>) {
        let mut seen: HashMap<&str, Span> = HashMap::new();
        for n in names {
            if let Some(first) = seen.get(n.name.as_str()) {
                let d = Diagnostic::error(
                    "E002",
                    format!("duplicate {what} `{}`", n.name),
                    self.file,
                    n.span,
                )
                .with_related("first declared here", self.file, *first);
                self.diags.push(d);
            } else {
                seen.insert(&n.name, n.span);
            }
        }
    }

    fn artifact_ref(&mut self, id: &Ident) {
        if self.model.artifact(&id.name).is_none() {
            self.unresolved("artifact", id);
        }
    }

    fn artifact_refs(&mut self, ids: &[Ident]) {
        for id in ids {
            self.artifact_ref(id);
        }
    }

    fn run(&mut self) {
        let model = self.model;
        self.context(model);
        self.duplicates("artifact", model.artifacts.iter().map(|a| &a.name));
        for a in &model.artifacts {
            if let Some(elem) = &a.element_type {
                match model.artifact(&elem.name) {
                    None => self.unresolved("artifact", elem),
                    Some(inner) if inner.is_collection() => self.invalid(
                        format!("`{}` is a collection of the collection `{}`; nesting is limited to one level", a.name, elem.name),
                        elem.span,
                    ),
                    Some(_) => {}
                }
            }
        }
        self.duplicates("LLM", model.llms.iter().map(|l| &l.name));
        let defaults: Vec<&LlmDecl> = model.llms.iter().filter(|l| l.default).collect();
        for extra in defaults.iter().skip(1) {
            self.diags.push(
                Diagnostic::error(
                    "E002",
                    format!("`{}` is a second default LLM", extra.name),
                    self.file,
                    extra.span,
                )
                .with_related("first default here", self.file, defaults[0].span),
            );
        }
        self.duplicates("tool", model.tools.iter().map(|t| &t.name));
        self.deployment(model);
        self.duplicates("agent", model.agents.iter().map(|a| &a.name));
        for agent in &model.agents {
            self.agent(agent);
        }
    }

    fn context(&mut self, model: &'m Model) {
        for extra in model.contexts.iter().skip(1) {
            self.diags.push(Diagnostic::error(
                "E002",
                "duplicate context section",
                self.file,
                extra.span,
            ));
        }
        let Some(ctx) = model.context() else {
            self.invalid("model has no context section with a system actor".into(), model.span);
            return;
        };
        let systems: Vec<&Actor> = ctx
            .actors
            .iter()
            .filter(|a| a.kind == ActorKind::System)
            .collect();
        if systems.is_empty() {
            self.invalid("context declares no system actor".into(), ctx.span);
        }
        for extra in systems.iter().skip(1) {
            self.diags.push(
                Diagnostic::error(
                    "E002",
                    format!("second system actor `{}`", extra.name),
                    self.file,
                    extra.name.span,
                )
                .with_related("first system here", self.file, systems[0].name.span),
            );
        }
        self.duplicates("actor", ctx.actors.iter().map(|a| &a.name));
        for flow in &ctx.flows {
            for end in [&flow.from, &flow.to] {
                let known = ctx.actors.iter().any(|a| a.name.name == end.name)
                    || model.tool(&end.name).is_some()
                    || model.llm(&end.name).is_some();
                if !known {
                    self.unresolved("flow endpoint", end);
                }
            }
            if flow.from.name == flow.to.name {
                self.invalid(
                    format!("flow from `{}` to itself", flow.from.name),
                    flow.span,
                );
            }
            self.artifact_refs(&flow.artifacts);
        }
    }

    fn deployment(&mut self, model: &'m Model) {
        for extra in model.deployments.iter().skip(1) {
            self.diags.push(Diagnostic::error(
                "E002",
                "duplicate deployment section",
                self.file,
                extra.span,
            ));
        }
        let Some(dep) = model.deployment() else {
            return;
        };
        self.duplicates("deployment node", dep.nodes.iter().map(|n| &n.name));
        for node in &dep.nodes {
            for h in &node.hosts {
                if model.agent(&h.name).is_none() && model.tool(&h.name).is_none() {
                    self.unresolved("hosted agent or tool", h);
                }
            }
        }
        for link in &dep.links {
            for end in [&link.from, &link.to] {
                if !dep.nodes.iter().any(|n| n.name.name == end.name) {
                    self.unresolved("deployment node", end);
                }
            }
            self.artifact_refs(&link.artifacts);
        }
    }

    fn agent(&mut self, agent: &'m Agent) {
        let model = self.model;
        if let Some(llm) = &agent.llm {
            if model.llm(&llm.name).is_none() {
                self.unresolved("LLM", llm);
            }
        }
        self.duplicates("datastore", agent.stores.iter().map(|s| &s.name));
        for s in &agent.stores {
            self.artifact_ref(&s.artifact);
        }
        self.duplicates("task", agent.tasks.iter().map(|t| &t.name));
        for task in &agent.tasks {
            self.artifact_refs(&task.io.inputs);
            self.artifact_refs(&task.io.outputs);
            if let Some(body) = &task.body {
                self.body(agent, body);
            }
            if let Some(prompt) = &task.prompt {
                self.duplicates("prompt row", prompt.rows.iter().map(|r| &r.name));
                for row in &prompt.rows {
                    for ph in row.placeholders() {
                        if !task.io.consumes(ph) {
                            self.invalid(
                                format!(
                                    "prompt row `{}` uses `{{{ph}}}`, which is not an input of task `{}`",
                                    row.name, task.name
                                ),
                                row.span,
                            );
                        }
                    }
                }
            }
        }
    }

    fn body(&mut self, agent: &'m Agent, body: &'m ActivityGraph) {
        let model = self.model;
        self.duplicates(
            "activity node",
            agent
                .stores
                .iter()
                .map(|s| &s.name)
                .filter(|s| body.nodes.iter().any(|n| n.id.name == s.name))
                .chain(body.nodes.iter().map(|n| &n.id)),
        );
        for node in &body.nodes {
            match &node.kind {
                NodeKind::Call(c) => {
                    if let Some(a) = &c.agent {
                        if model.agent(&a.name).is_none() {
                            self.unresolved("agent", a);
                        }
                    }
                    if let Some(e) = &c.each {
                        self.artifact_ref(e);
                    }
                    self.artifact_refs(&c.io.inputs);
                    self.artifact_refs(&c.io.outputs);
                }
                NodeKind::Invoke(t) => {
                    self.artifact_refs(&t.io.inputs);
                    self.artifact_refs(&t.io.outputs);
                }
                NodeKind::Decision { subject } => self.artifact_ref(subject),
                NodeKind::Fork | NodeKind::Join | NodeKind::Merge => {}
            }
        }
        for edge in &body.edges {
            for end in [&edge.from, &edge.to] {
                match end {
                    Endpoint::Start | Endpoint::End => {}
                    Endpoint::Node(id) => {
                        if body.node(&id.name).is_none() {
                            self.unresolved("activity node", id);
                        }
                    }
                    Endpoint::StoreRead(id) | Endpoint::StoreWrite(id) => {
                        if agent.store(&id.name).is_none() {
                            self.unresolved("datastore", id);
                        }
                    }
                }
            }
            if let Some(Guard {
                form: GuardForm::Equals { artifact, .. },
                ..
            }) = &edge.guard
            {
                self.artifact_ref(artifact);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn resolve_text(text: &str) -> Result<ResolvedModel, Vec<Diagnostic>> {
        resolve(parse(text, "t.a4c").model.expect("parses"))
    }

    fn codes(text: &str) -> Vec<String> {
        match resolve_text(text) {
            Ok(_) => Vec::new(),
            Err(d) => d.into_iter().map(|d| d.code).collect(),
        }
    }

    #[test]
    fn minimal_model_resolves() {
        assert!(resolve_text(r#"model "m" { context { system X } }"#).is_ok());
    }

    #[test]
    fn unresolved_agent_in_call() {
        let text = "model \"m\" {\n context { system S }\n agent A { task t { body {\n call c = fix on Developr {}\n start -> c\n c -> end\n } } }\n}";
        let err = resolve_text(text).unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].code, "E001");
        assert_eq!(err[0].span.start, Pos::new(4, 18));
    }

    #[test]
    fn duplicates_and_structure() {
        assert_eq!(
            codes("model \"m\" { context { system S } artifact A artifact A }"),
            ["E002"]
        );
        assert_eq!(codes("model \"m\" { context { user U } }"), ["E003"]);
        assert_eq!(codes("model \"m\" { artifact A }"), ["E003"]);
        assert_eq!(
            codes("model \"m\" { context { system S system T } }"),
            ["E002"]
        );
        assert_eq!(
            codes("model \"m\" { context { system S } artifact X artifact L collection of X artifact LL collection of L }"),
            ["E003"]
        );
        assert_eq!(
            codes("model \"m\" { context { system S flow S -> S : X } artifact X }"),
            ["E003"]
        );
        assert_eq!(
            codes("model \"m\" { context { system S } llm a default llm b default }"),
            ["E002"]
        );
    }

    #[test]
    fn prompt_placeholders_must_be_inputs() {
        let ok = "model \"m\" { context { system S } artifact X agent A { task t { in X prompt { dynamic d = \"{X}\" } } } }";
        assert!(codes(ok).is_empty());
        let bad = "model \"m\" { context { system S } artifact X artifact Y agent A { task t { in X prompt { dynamic d = \"{Y}\" } } } }";
        assert_eq!(codes(bad), ["E003"]);
    }

    #[test]
    fn body_references() {
        let text = "model \"m\" { context { system S } artifact X agent A { store M : X task t { body {\n start -> ghost\n M.read -> end\n N.read -> end\n } } } }";
        let err = resolve_text(text).unwrap_err();
        let msgs: Vec<_> = err.iter().map(|d| d.message.as_str()).collect();
        assert_eq!(msgs, ["unresolved activity node `ghost`", "unresolved datastore `N`"]);
    }

    #[test]
    fn call_graph_edges_and_levels() {
        let text = "model \"m\" { context { system S } agent A {
            task top { body { call a = leaf { } call b = other on B { } start -> a a -> b b -> end } }
            task leaf { prompt { static r = \"x\" } }
        }
        agent B { task other { prompt { static r = \"y\" } } } }";
        let m = resolve_text(text).unwrap();
        let top = TaskKey::new("A", "top");
        let callees: Vec<String> = m.call_graph().callees(&top).map(|k| k.to_string()).collect();
        assert_eq!(callees, ["A.leaf", "B.other"]);
        let roots: Vec<String> = m.call_graph().roots().map(|k| k.to_string()).collect();
        assert_eq!(roots, ["A.top"]);
        assert_eq!(level_of(m.task(&top).unwrap().1), Level::C3);
        assert_eq!(level_of(m.task(&TaskKey::new("A", "leaf")).unwrap().1), Level::C4);
        assert!(m.call_graph().recursive_groups().is_empty());
    }

    #[test]
    fn recursion_groups() {
        let text = "model \"m\" { context { system S } agent A {
            task a { body { call x = b { } start -> x x -> end } }
            task b { body { call y = a { } start -> y y -> end } }
            task c { body { call z = c { } start -> z z -> end } }
        } }";
        let m = resolve_text(text).unwrap();
        let groups: Vec<Vec<String>> = m
            .call_graph()
            .recursive_groups()
            .into_iter()
            .map(|g| g.iter().map(|k| k.to_string()).collect())
            .collect();
        assert_eq!(groups, vec![vec!["A.a", "A.b"], vec!["A.c"]]);
    }
}

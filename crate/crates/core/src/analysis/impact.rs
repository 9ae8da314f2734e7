use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::diag::Diagnostic;
use crate::model::*;
use crate::resolve::ResolvedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Produces,
    Consumes,
    Calls,
    CalledBy,
    Hosts,
    FlowsOver,
    Gates,
    Owns,
    Stores,
    Drives,
}

impl Relation {
    fn reversed(self) -> Self {
        match self {
            Relation::Calls => Relation::CalledBy,
            Relation::CalledBy => Relation::Calls,
            other => other,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
    Both,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Both => "both",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            "both" => Ok(Direction::Both),
            _ => Err(format!("unknown direction `{s}`, expected up, down or both")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affected {
    pub element: ElementRef,
    pub relation: Relation,
    /// From the element next to the seed up to and including `element`.
    pub path: Vec<ElementRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpactReport {
    pub seed: ElementRef,
    pub direction: Direction,
    /// Sorted by qualified name.
    pub affected: Vec<Affected>,
    pub levels: BTreeSet<Level>,
}

impl ImpactReport {
    pub fn elements(&self) -> BTreeSet<ElementRef> {
        self.affected.iter().map(|a| a.element.clone()).collect()
    }

    pub fn get(&self, element: &str) -> Option<&Affected> {
        self.affected.iter().find(|a| a.element.to_string() == element)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.seed.to_string(),
            "direction": self.direction.to_string(),
            "affected": self.affected.iter().map(|a| json!({
                "element": a.element.to_string(),
                "relation": a.relation.to_string(),
                "path": a.path.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "levels": self.levels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for ImpactReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "impact of {} ({}):", self.seed, self.direction)?;
        for a in &self.affected {
            let path: Vec<String> = a.path.iter().map(|p| p.to_string()).collect();
            writeln!(f, "  {} [{}] via {}", a.element, a.relation, path.join(" > "))?;
        }
        let levels: Vec<String> = self.levels.iter().map(|l| l.to_string()).collect();
        write!(f, "levels: {}", if levels.is_empty() { "-".into() } else { levels.join(", ") })
    }
}

type Adjacency = BTreeMap<ElementRef, BTreeSet<(ElementRef, Relation)>>;

/// Dependency relation over model elements. A `down` edge `a -> b` means
/// a change to `a` may require a change to `b`.
#[derive(Debug, Clone, Default)]
pub struct ImpactGraph {
    down: Adjacency,
    up: Adjacency,
}

impl ImpactGraph {
    pub fn new(model: &ResolvedModel) -> Self {
        let mut g = ImpactGraph::default();
        for artifact in &model.artifacts {
            g.node(ElementRef::Artifact(artifact.name.name.clone()));
        }
        for agent in &model.agents {
            let a = &agent.name.name;
            let agent_ref = ElementRef::Agent(a.clone());
            if let Some(llm) = model.llm_binding(agent) {
                g.edge(ElementRef::Llm(llm.name.name.clone()), agent_ref.clone(), Relation::Drives);
            }
            for store in &agent.stores {
                let s = store_ref(a, &store.name.name);
                g.edge(agent_ref.clone(), s.clone(), Relation::Owns);
                g.edge(ElementRef::Artifact(store.artifact.name.clone()), s, Relation::Stores);
            }
            for task in &agent.tasks {
                let t = ElementRef::task(a, &task.name.name);
                g.edge(agent_ref.clone(), t.clone(), Relation::Owns);
                g.signature(&t, &task.io.inputs, &task.io.outputs);
                let Some(body) = &task.body else { continue };
                for node in &body.nodes {
                    match &node.kind {
                        NodeKind::Call(call) => {
                            let callee = ElementRef::task(call.callee_agent(a), &call.task.name);
                            if model.callee(agent, call).is_some() {
                                g.edge(t.clone(), callee.clone(), Relation::Calls);
                                let inputs: Vec<Ident> =
                                    call.io.inputs.iter().chain(call.each.iter()).cloned().collect();
                                g.signature(&callee, &inputs, &call.io.outputs);
                            }
                        }
                        NodeKind::Invoke(inv) => {
                            if model.tool(&inv.tool.name).is_some() {
                                g.edge(ElementRef::Tool(inv.tool.name.clone()), t.clone(), Relation::CalledBy);
                            }
                            g.signature(&t, &inv.io.inputs, &inv.io.outputs);
                        }
                        NodeKind::Decision { subject } => {
                            let d = ElementRef::ActivityNode {
                                agent: a.clone(),
                                task: task.name.name.clone(),
                                node: node.id.name.clone(),
                            };
                            g.edge(ElementRef::Artifact(subject.name.clone()), d, Relation::Gates);
                        }
                        _ => {}
                    }
                }
                for edge in &body.edges {
                    match (&edge.from, &edge.to) {
                        (Endpoint::StoreRead(s), _) => {
                            g.edge(store_ref(a, &s.name), t.clone(), Relation::Consumes)
                        }
                        (_, Endpoint::StoreWrite(s)) => {
                            g.edge(t.clone(), store_ref(a, &s.name), Relation::Produces)
                        }
                        _ => {}
                    }
                }
            }
        }
        if let Some(dep) = model.deployment() {
            for node in &dep.nodes {
                let n = ElementRef::DeploymentNode(node.name.name.clone());
                g.node(n.clone());
                for h in &node.hosts {
                    g.edge(n.clone(), hosted_ref(model, &h.name), Relation::Hosts);
                }
            }
        }
        g
    }

    fn node(&mut self, e: ElementRef) {
        self.down.entry(e.clone()).or_default();
        self.up.entry(e).or_default();
    }

    fn edge(&mut self, from: ElementRef, to: ElementRef, rel: Relation) {
        self.node(from.clone());
        self.node(to.clone());
        self.down.get_mut(&from).unwrap().insert((to.clone(), rel));
        self.up.get_mut(&to).unwrap().insert((from, rel.reversed()));
    }

    fn signature(&mut self, task: &ElementRef, inputs: &[Ident], outputs: &[Ident]) {
        for i in inputs {
            self.edge(ElementRef::Artifact(i.name.clone()), task.clone(), Relation::Consumes);
        }
        for o in outputs {
            self.edge(task.clone(), ElementRef::Artifact(o.name.clone()), Relation::Produces);
        }
    }

    pub fn down_edges(&self) -> impl Iterator<Item = (&ElementRef, &ElementRef, Relation)> {
        self.down
            .iter()
            .flat_map(|(f, tos)| tos.iter().map(move |(t, r)| (f, t, *r)))
    }

    fn closure(&self, seed: &ElementRef, adj: &Adjacency) -> BTreeMap<ElementRef, (Relation, Vec<ElementRef>)> {
        let mut found: BTreeMap<ElementRef, (Relation, Vec<ElementRef>)> = BTreeMap::new();
        let mut queue = VecDeque::from([seed.clone()]);
        while let Some(v) = queue.pop_front() {
            let base = found.get(&v).map(|(_, p)| p.clone()).unwrap_or_default();
            for (w, rel) in adj.get(&v).into_iter().flatten() {
                if w == seed || found.contains_key(w) {
                    continue;
                }
                let mut path = base.clone();
                path.push(w.clone());
                found.insert(w.clone(), (*rel, path));
                queue.push_back(w.clone());
            }
        }
        found
    }
}

fn store_ref(agent: &str, store: &str) -> ElementRef {
    ElementRef::Datastore {
        agent: agent.to_string(),
        store: store.to_string(),
    }
}

fn hosted_ref(model: &Model, name: &str) -> ElementRef {
    if model.agent(name).is_some() {
        ElementRef::Agent(name.to_string())
    } else {
        ElementRef::Tool(name.to_string())
    }
}

fn flow_endpoint_ref(model: &Model, name: &str) -> ElementRef {
    if model.tool(name).is_some() {
        ElementRef::Tool(name.to_string())
    } else if model.llm(name).is_some() {
        ElementRef::Llm(name.to_string())
    } else {
        ElementRef::Actor(name.to_string())
    }
}

/// Resolves a seed such as `Report`, `Developer.fix`, `task:Developer.fix`
/// or `node:JenkinsHost`.
pub fn resolve_seed(model: &ResolvedModel, seed: &str) -> Option<ElementRef> {
    let (kind, name) = match seed.split_once(':') {
        Some((k, n)) => (Some(k), n),
        None => (None, seed),
    };
    let actors = || model.context().into_iter().flat_map(|c| c.actors.iter());
    let nodes = || model.deployment().into_iter().flat_map(|d| d.nodes.iter());
    let dotted = name.split_once('.');
    let candidates: [(&str, Option<ElementRef>); 8] = [
        ("artifact", model.artifact(name).map(|_| ElementRef::Artifact(name.into()))),
        ("agent", model.agent(name).map(|_| ElementRef::Agent(name.into()))),
        (
            "task",
            dotted.and_then(|(a, t)| model.agent(a)?.task(t).map(|_| ElementRef::task(a, t))),
        ),
        (
            "store",
            dotted.and_then(|(a, s)| model.agent(a)?.store(s).map(|_| store_ref(a, s))),
        ),
        ("tool", model.tool(name).map(|_| ElementRef::Tool(name.into()))),
        ("llm", model.llm(name).map(|_| ElementRef::Llm(name.into()))),
        (
            "actor",
            actors().any(|a| a.name.name == name).then(|| ElementRef::Actor(name.into())),
        ),
        (
            "node",
            nodes()
                .any(|n| n.name.name == name)
                .then(|| ElementRef::DeploymentNode(name.into())),
        ),
    ];
    candidates
        .into_iter()
        .filter(|(k, _)| kind.is_none_or(|want| want == *k))
        .find_map(|(_, e)| e)
}

pub fn level_of(model: &ResolvedModel, element: &ElementRef) -> Option<Level> {
    match element {
        ElementRef::Actor(_) | ElementRef::Flow { .. } | ElementRef::Llm(_) | ElementRef::Tool(_) => {
            Some(Level::C1)
        }
        ElementRef::DeploymentNode(_) | ElementRef::Link { .. } => Some(Level::C2),
        ElementRef::Agent(_) | ElementRef::Datastore { .. } => Some(Level::C3),
        ElementRef::Task { agent, task } | ElementRef::ActivityNode { agent, task, .. } => {
            model.agent(agent)?.task(task).map(Task::level)
        }
        ElementRef::Artifact(_) => None,
    }
}

/// Transitive change impact of `seed` in `direction`.
pub fn impact(model: &ResolvedModel, seed: &str, direction: Direction) -> Result<ImpactReport, Diagnostic> {
    let seed_ref = resolve_seed(model, seed).ok_or_else(|| {
        Diagnostic::error("A001", format!("unknown seed element `{seed}`"), model.file(), Span::default())
    })?;
    Ok(impact_of(model, &ImpactGraph::new(model), seed_ref, direction))
}

pub fn impact_of(model: &ResolvedModel, graph: &ImpactGraph, seed: ElementRef, direction: Direction) -> ImpactReport {
    let mut found = match direction {
        Direction::Down => graph.closure(&seed, &graph.down),
        Direction::Up => graph.closure(&seed, &graph.up),
        Direction::Both => {
            let mut down = graph.closure(&seed, &graph.down);
            for (e, (rel, path)) in graph.closure(&seed, &graph.up) {
                match down.get(&e) {
                    Some((_, p)) if p.len() <= path.len() => {}
                    _ => {
                        down.insert(e, (rel, path));
                    }
                }
            }
            down
        }
    };
    add_sinks(model, &seed, &mut found);
    let affected = found
        .into_iter()
        .map(|(element, (relation, path))| Affected { element, relation, path })
        .collect::<Vec<_>>();
    let levels = affected
        .iter()
        .filter_map(|a| level_of(model, &a.element))
        .collect();
    ImpactReport {
        seed,
        direction,
        affected,
        levels,
    }
}

/// Flows, links and hosting nodes that mention an affected element or the
/// seed.
fn add_sinks(model: &ResolvedModel, seed: &ElementRef, found: &mut BTreeMap<ElementRef, (Relation, Vec<ElementRef>)>) {
    let reached = |found: &BTreeMap<ElementRef, (Relation, Vec<ElementRef>)>, e: &ElementRef| -> Option<Vec<ElementRef>> {
        if e == seed {
            Some(Vec::new())
        } else {
            found.get(e).map(|(_, p)| p.clone())
        }
    };
    let mut sinks: Vec<(ElementRef, Relation, Vec<ElementRef>)> = Vec::new();
    let shortest = |cands: Vec<Vec<ElementRef>>| cands.into_iter().min_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    if let Some(ctx) = model.context() {
        for (i, flow) in ctx.flows.iter().enumerate() {
            let mentioned = flow
                .artifacts
                .iter()
                .map(|a| ElementRef::Artifact(a.name.clone()))
                .chain([flow_endpoint_ref(model, &flow.from.name), flow_endpoint_ref(model, &flow.to.name)]);
            if let Some(path) = shortest(mentioned.filter_map(|e| reached(found, &e)).collect()) {
                sinks.push((ElementRef::flow(i, flow), Relation::FlowsOver, path));
            }
        }
    }
    if let Some(dep) = model.deployment() {
        for (i, link) in dep.links.iter().enumerate() {
            let mentioned = link.artifacts.iter().map(|a| ElementRef::Artifact(a.name.clone()));
            if let Some(path) = shortest(mentioned.filter_map(|e| reached(found, &e)).collect()) {
                sinks.push((ElementRef::link(i, link), Relation::FlowsOver, path));
            }
        }
        for node in &dep.nodes {
            let hosted = node.hosts.iter().map(|h| hosted_ref(model, &h.name));
            if let Some(path) = shortest(hosted.filter_map(|e| reached(found, &e)).collect()) {
                sinks.push((ElementRef::DeploymentNode(node.name.name.clone()), Relation::Hosts, path));
            }
        }
    }
    for (element, rel, mut path) in sinks {
        if element == *seed || found.contains_key(&element) {
            continue;
        }
        path.push(element.clone());
        found.insert(element, (rel, path));
    }
}

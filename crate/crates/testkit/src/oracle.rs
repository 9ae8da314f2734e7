//! Brute-force reference implementations used as test oracles.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use a4c_core::analysis::Direction;
use a4c_core::model::*;

pub type Edges = BTreeSet<(ElementRef, ElementRef)>;

/// Dependency edges read straight off the model, `a -> b` meaning a change
/// to `a` may require a change to `b`.
pub fn impact_edges(m: &Model) -> Edges {
    let mut e = Edges::new();
    let art = |i: &Ident| ElementRef::Artifact(i.name.clone());
    let sig = |e: &mut Edges, t: &ElementRef, io: &Io, extra: Option<&Ident>| {
        for i in io.inputs.iter().chain(extra) {
            e.insert((art(i), t.clone()));
        }
        for o in &io.outputs {
            e.insert((t.clone(), art(o)));
        }
    };
    for agent in &m.agents {
        let a = agent.name.name.clone();
        let me = ElementRef::Agent(a.clone());
        let llm = agent.llm.as_ref().map(|l| l.name.clone()).or_else(|| {
            m.llms.iter().find(|l| l.default).map(|l| l.name.name.clone())
        });
        if let Some(l) = llm {
            e.insert((ElementRef::Llm(l), me.clone()));
        }
        for st in &agent.stores {
            let s = ElementRef::Datastore { agent: a.clone(), store: st.name.name.clone() };
            e.insert((me.clone(), s.clone()));
            e.insert((art(&st.artifact), s));
        }
        for task in &agent.tasks {
            let t = ElementRef::Task { agent: a.clone(), task: task.name.name.clone() };
            e.insert((me.clone(), t.clone()));
            sig(&mut e, &t, &task.io, None);
            let Some(body) = &task.body else { continue };
            for node in &body.nodes {
                match &node.kind {
                    NodeKind::Call(c) => {
                        let target = c.agent.as_ref().map_or(a.clone(), |x| x.name.clone());
                        let exists = m.agents.iter().any(|g| {
                            g.name.name == target && g.tasks.iter().any(|k| k.name.name == c.task.name)
                        });
                        if exists {
                            let callee = ElementRef::Task { agent: target, task: c.task.name.clone() };
                            e.insert((t.clone(), callee.clone()));
                            sig(&mut e, &callee, &c.io, c.each.as_ref());
                        }
                    }
                    NodeKind::Invoke(inv) => {
                        if m.tools.iter().any(|x| x.name.name == inv.tool.name) {
                            e.insert((ElementRef::Tool(inv.tool.name.clone()), t.clone()));
                        }
                        sig(&mut e, &t, &inv.io, None);
                    }
                    NodeKind::Decision { subject } => {
                        let d = ElementRef::ActivityNode {
                            agent: a.clone(),
                            task: task.name.name.clone(),
                            node: node.id.name.clone(),
                        };
                        e.insert((art(subject), d));
                    }
                    _ => {}
                }
            }
            for edge in &body.edges {
                if let Endpoint::StoreRead(s) = &edge.from {
                    e.insert((ElementRef::Datastore { agent: a.clone(), store: s.name.clone() }, t.clone()));
                }
                if let Endpoint::StoreWrite(s) = &edge.to {
                    e.insert((t.clone(), ElementRef::Datastore { agent: a.clone(), store: s.name.clone() }));
                }
            }
        }
    }
    for n in m.deployments.iter().flat_map(|d| &d.nodes) {
        for h in &n.hosts {
            let target = if m.agents.iter().any(|g| g.name.name == h.name) {
                ElementRef::Agent(h.name.clone())
            } else {
                ElementRef::Tool(h.name.clone())
            };
            e.insert((ElementRef::DeploymentNode(n.name.name.clone()), target));
        }
    }
    e
}

/// Naive fixpoint: keep adding successors until nothing changes.
pub fn fixpoint(edges: &Edges, seed: &ElementRef, up: bool) -> BTreeSet<ElementRef> {
    let mut reached = BTreeSet::new();
    loop {
        let before = reached.len();
        for (a, b) in edges {
            let (from, to) = if up { (b, a) } else { (a, b) };
            if (from == seed || reached.contains(from)) && to != seed {
                reached.insert(to.clone());
            }
        }
        if reached.len() == before {
            return reached;
        }
    }
}

pub fn distances(edges: &Edges, seed: &ElementRef, up: bool) -> BTreeMap<ElementRef, usize> {
    let mut dist = BTreeMap::from([(seed.clone(), 0)]);
    let mut q = VecDeque::from([seed.clone()]);
    while let Some(v) = q.pop_front() {
        let d = dist[&v];
        for (a, b) in edges {
            let (from, to) = if up { (b, a) } else { (a, b) };
            if *from == v && !dist.contains_key(to) {
                dist.insert(to.clone(), d + 1);
                q.push_back(to.clone());
            }
        }
    }
    dist
}

pub fn sinks(m: &Model, reached: &BTreeSet<ElementRef>) -> BTreeSet<ElementRef> {
    let mut out = BTreeSet::new();
    let endpoint = |n: &Ident| {
        if m.tools.iter().any(|t| t.name.name == n.name) {
            ElementRef::Tool(n.name.clone())
        } else if m.llms.iter().any(|l| l.name.name == n.name) {
            ElementRef::Llm(n.name.clone())
        } else {
            ElementRef::Actor(n.name.clone())
        }
    };
    for (i, f) in m.contexts.iter().flat_map(|c| c.flows.iter().enumerate()) {
        let hit = f.artifacts.iter().any(|a| reached.contains(&ElementRef::Artifact(a.name.clone())))
            || reached.contains(&endpoint(&f.from))
            || reached.contains(&endpoint(&f.to));
        if hit {
            out.insert(ElementRef::Flow { index: i, from: f.from.name.clone(), to: f.to.name.clone() });
        }
    }
    for d in &m.deployments {
        for (i, l) in d.links.iter().enumerate() {
            if l.artifacts.iter().any(|a| reached.contains(&ElementRef::Artifact(a.name.clone()))) {
                out.insert(ElementRef::Link { index: i, from: l.from.name.clone(), to: l.to.name.clone() });
            }
        }
        for n in &d.nodes {
            let hit = n.hosts.iter().any(|h| {
                reached.contains(&ElementRef::Agent(h.name.clone()))
                    || reached.contains(&ElementRef::Tool(h.name.clone()))
            });
            if hit {
                out.insert(ElementRef::DeploymentNode(n.name.name.clone()));
            }
        }
    }
    out
}

/// Elements affected by a change to `seed`: the closure in `direction`
/// plus flows, links and nodes that mention a reached element.
pub fn expected_impact(m: &Model, edges: &Edges, seed: &ElementRef, direction: Direction) -> BTreeSet<ElementRef> {
    let closure: BTreeSet<ElementRef> = match direction {
        Direction::Down => fixpoint(edges, seed, false),
        Direction::Up => fixpoint(edges, seed, true),
        Direction::Both => fixpoint(edges, seed, false)
            .union(&fixpoint(edges, seed, true))
            .cloned()
            .collect(),
    };
    let mut reached = closure.clone();
    reached.insert(seed.clone());
    let mut out = closure;
    out.extend(sinks(m, &reached));
    out.remove(seed);
    out
}

/// Every elementary cycle by trying each vertex subset in every order.
pub fn brute_cycles(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let has = |a: usize, b: usize| succ[a].contains(&b);
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << n) {
        let verts: Vec<usize> = (0..n).filter(|v| mask & (1 << v) != 0).collect();
        let first = verts[0];
        let mut rest = verts[1..].to_vec();
        permute(&mut rest, 0, &mut |order| {
            let cyc: Vec<usize> = std::iter::once(first).chain(order.iter().copied()).collect();
            let closed = (0..cyc.len()).all(|k| has(cyc[k], cyc[(k + 1) % cyc.len()]));
            if closed {
                out.insert(cyc);
            }
        });
    }
    out.into_iter().collect()
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}


/// Elementary cycles by plain backtracking: from each start vertex, extend
/// simple paths through larger vertices and record every return to the
/// start.
pub fn backtrack_cycles(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    fn extend(succ: &[Vec<usize>], start: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().expect("non-empty path");
        let mut next: Vec<usize> = succ[last].clone();
        next.sort_unstable();
        next.dedup();
        for w in next {
            if w == start {
                out.push(path.clone());
            } else if w > start && !path.contains(&w) {
                path.push(w);
                extend(succ, start, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for s in 0..succ.len() {
        extend(succ, s, &mut vec![s], &mut out);
    }
    out.sort();
    out
}

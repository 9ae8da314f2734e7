//! Control-flow view of activity bodies and generic graph algorithms.

use std::collections::BTreeSet;

use crate::model::*;

pub const START: usize = 0;
pub const END: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowNode {
    Start,
    End,
    /// Index into `ActivityGraph::nodes`.
    Declared(usize),
    Store(String),
}

/// Store access edge: `(store, node index, edge index)`.
pub type Access = (String, usize, usize);

/// Indexed control graph of one task body. Index 0 is the initial node,
/// 1 the final node, then declared nodes in order, then datastores in
/// order of first reference. Control successors only link start, end and
/// declared nodes; store accesses are kept separately.
#[derive(Debug, Clone)]
pub struct FlowGraph {
    nodes: Vec<FlowNode>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    /// `(from, to, edge index)` for every control edge.
    pub control: Vec<(usize, usize, usize)>,
    pub reads: Vec<Access>,
    pub writes: Vec<Access>,
}

impl FlowGraph {
    pub fn new(body: &ActivityGraph) -> Self {
        let mut nodes = vec![FlowNode::Start, FlowNode::End];
        nodes.extend((0..body.nodes.len()).map(FlowNode::Declared));
        let declared = nodes.len();
        let mut g = FlowGraph {
            succ: vec![Vec::new(); declared],
            pred: vec![Vec::new(); declared],
            nodes,
            control: Vec::new(),
            reads: Vec::new(),
            writes: Vec::new(),
        };
        for (ei, edge) in body.edges.iter().enumerate() {
            match (&edge.from, &edge.to) {
                (Endpoint::StoreRead(s), to) => {
                    g.store_index(&s.name);
                    if let Some(t) = g.endpoint(body, to) {
                        g.reads.push((s.name.clone(), t, ei));
                    }
                }
                (from, Endpoint::StoreWrite(s)) => {
                    g.store_index(&s.name);
                    if let Some(f) = g.endpoint(body, from) {
                        g.writes.push((s.name.clone(), f, ei));
                    }
                }
                (from, to) => {
                    if let (Some(f), Some(t)) = (g.endpoint(body, from), g.endpoint(body, to)) {
                        if !g.succ[f].contains(&t) {
                            g.succ[f].push(t);
                            g.pred[t].push(f);
                        }
                        g.control.push((f, t, ei));
                    }
                }
            }
        }
        g
    }

    fn store_index(&mut self, name: &str) -> usize {
        if let Some(i) = self
            .nodes
            .iter()
            .position(|n| matches!(n, FlowNode::Store(s) if s == name))
        {
            return i;
        }
        self.nodes.push(FlowNode::Store(name.to_string()));
        self.succ.push(Vec::new());
        self.pred.push(Vec::new());
        self.nodes.len() - 1
    }

    fn endpoint(&self, body: &ActivityGraph, e: &Endpoint) -> Option<usize> {
        match e {
            Endpoint::Start => Some(START),
            Endpoint::End => Some(END),
            Endpoint::Node(id) => body.nodes.iter().position(|n| n.id.name == id.name).map(|i| i + 2),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &FlowNode {
        &self.nodes[i]
    }

    /// Graph index of the declared node at `decl` in the body.
    pub fn declared_index(decl: usize) -> usize {
        decl + 2
    }

    pub fn declared<'b>(&self, body: &'b ActivityGraph, i: usize) -> Option<&'b ActivityNode> {
        match self.nodes[i] {
            FlowNode::Declared(d) => body.nodes.get(d),
            _ => None,
        }
    }

    pub fn index_of(&self, body: &ActivityGraph, id: &str) -> Option<usize> {
        body.nodes.iter().position(|n| n.id.name == id).map(|i| i + 2)
    }

    pub fn label(&self, body: &ActivityGraph, i: usize) -> String {
        match &self.nodes[i] {
            FlowNode::Start => "start".into(),
            FlowNode::End => "end".into(),
            FlowNode::Declared(d) => body.nodes[*d].id.name.clone(),
            FlowNode::Store(s) => s.clone(),
        }
    }

    pub fn succ(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub fn pred(&self, i: usize) -> &[usize] {
        &self.pred[i]
    }

    pub fn successors(&self) -> &[Vec<usize>] {
        &self.succ
    }

    /// Nodes reachable from `from` (including itself) over control edges.
    pub fn reachable_from(&self, from: usize) -> Vec<bool> {
        search(&self.succ, from)
    }

    /// Nodes from which `to` is reachable (including itself).
    pub fn reaching(&self, to: usize) -> Vec<bool> {
        search(&self.pred, to)
    }

    /// True iff a path with at least one edge leads from `a` to `b`.
    pub fn has_path(&self, a: usize, b: usize) -> bool {
        self.succ[a].iter().any(|&s| self.reachable_from(s)[b])
    }

    /// Edges closing a cycle in a depth-first traversal started at the
    /// initial node and then at each unvisited node in index order.
    pub fn back_edges(&self) -> BTreeSet<(usize, usize)> {
        let n = self.len();
        let mut state = vec![0u8; n];
        let mut back = BTreeSet::new();
        let roots = std::iter::once(START).chain(0..n);
        for root in roots {
            if state[root] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            state[root] = 1;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                if let Some(&w) = self.succ[v].get(*next) {
                    *next += 1;
                    match state[w] {
                        0 => {
                            state[w] = 1;
                            stack.push((w, 0));
                        }
                        1 => {
                            back.insert((v, w));
                        }
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                    stack.pop();
                }
            }
        }
        back
    }

    /// Elementary control-flow cycles, each rotated to start at its
    /// smallest index, sorted.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        elementary_cycles(&self.succ)
    }
}

fn search(adj: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Tarjan's strongly connected components. Components come out in
/// reverse topological order; members are unordered.
pub fn strongly_connected(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        succ: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }

    fn visit(s: &mut State<'_>, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for &w in &s.succ[v] {
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                Some(_) => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().expect("tarjan stack");
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            s.out.push(comp);
        }
    }

    let n = succ.len();
    let mut s = State {
        succ,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}

/// Johnson's algorithm. Each cycle starts at its smallest vertex; the
/// result is sorted. Self-loops are cycles of length one.
pub fn elementary_cycles(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut out = Vec::new();
    for s in 0..n {
        let sub: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                if v < s {
                    Vec::new()
                } else {
                    succ[v].iter().copied().filter(|&w| w >= s).collect()
                }
            })
            .collect();
        let comp = strongly_connected(&sub)
            .into_iter()
            .find(|c| c.contains(&s))
            .unwrap_or_default();
        let in_comp: Vec<bool> = (0..n).map(|v| comp.contains(&v)).collect();
        if !sub[s].iter().any(|&w| in_comp[w]) {
            continue;
        }
        let mut j = Johnson {
            succ: &sub,
            in_comp: &in_comp,
            blocked: vec![false; n],
            b: vec![BTreeSet::new(); n],
            path: Vec::new(),
            start: s,
            out: &mut out,
        };
        j.circuit(s);
    }
    out.sort();
    out
}

struct Johnson<'a> {
    succ: &'a [Vec<usize>],
    in_comp: &'a [bool],
    blocked: Vec<bool>,
    b: Vec<BTreeSet<usize>>,
    path: Vec<usize>,
    start: usize,
    out: &'a mut Vec<Vec<usize>>,
}

impl Johnson<'_> {
    fn circuit(&mut self, v: usize) -> bool {
        let mut found = false;
        self.path.push(v);
        self.blocked[v] = true;
        let mut seen = BTreeSet::new();
        for &w in self.succ[v].iter() {
            if !self.in_comp[w] || !seen.insert(w) {
                continue;
            }
            if w == self.start {
                self.out.push(self.path.clone());
                found = true;
            } else if !self.blocked[w] && self.circuit(w) {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in self.succ[v].iter() {
                if self.in_comp[w] {
                    self.b[w].insert(v);
                }
            }
        }
        self.path.pop();
        found
    }

    fn unblock(&mut self, u: usize) {
        self.blocked[u] = false;
        let waiting = std::mem::take(&mut self.b[u]);
        for w in waiting {
            if self.blocked[w] {
                self.unblock(w);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn johnson_small() {
        let succ = vec![vec![1], vec![2, 0], vec![0, 2]];
        assert_eq!(
            elementary_cycles(&succ),
            vec![vec![0, 1], vec![0, 1, 2], vec![2]]
        );
    }

    #[test]
    fn tarjan_components() {
        let succ = vec![vec![1], vec![0], vec![1, 3], vec![]];
        let mut comps: Vec<Vec<usize>> = strongly_connected(&succ)
            .into_iter()
            .map(|mut c| {
                c.sort();
                c
            })
            .collect();
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1], vec![2], vec![3]]);
    }

    #[test]
    fn back_edges_break_all_cycles() {
        let succ = vec![vec![2], vec![], vec![3], vec![2, 1]];
        let g = FlowGraph {
            nodes: vec![FlowNode::Start, FlowNode::End, FlowNode::Declared(0), FlowNode::Declared(1)],
            pred: vec![vec![]; 4],
            succ,
            control: vec![],
            reads: vec![],
            writes: vec![],
        };
        assert_eq!(g.back_edges().into_iter().collect::<Vec<_>>(), vec![(3, 2)]);
        assert!(g.has_path(2, 2));
        assert!(!g.has_path(1, 2));
    }
}

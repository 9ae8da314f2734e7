//! Random generators.
//!
//! Models are produced as source text so every test also exercises the
//! parser. Generated models always resolve; they are not necessarily free
//! of validation findings.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    /// Upper bound on declared elements, counting activity nodes.
    pub max_elements: usize,
    /// Sprinkle line comments between items.
    pub comments: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_elements: 50,
            comments: false,
        }
    }
}

struct TaskPlan {
    name: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    body: bool,
}

struct AgentPlan {
    name: String,
    llm: Option<String>,
    stores: Vec<(String, String)>,
    tasks: Vec<TaskPlan>,
}

struct Gen {
    rng: ChaCha8Rng,
    cfg: GenConfig,
    budget: usize,
    out: String,
}

impl Gen {
    fn take(&mut self, want: usize) -> usize {
        let n = want.min(self.budget);
        self.budget -= n;
        n
    }

    fn pick<'a>(&mut self, xs: &'a [String]) -> &'a str {
        xs.choose(&mut self.rng).expect("non-empty")
    }

    fn subset(&mut self, xs: &[String], max: usize) -> Vec<String> {
        let n = self.rng.gen_range(1..=max.min(xs.len()).max(1));
        let mut v: Vec<String> = xs.choose_multiple(&mut self.rng, n).cloned().collect();
        v.sort();
        v
    }

    /// Two distinct elements of `xs`, which has at least two.
    fn pair(&mut self, xs: &[String]) -> (String, String) {
        let v: Vec<&String> = xs.choose_multiple(&mut self.rng, 2).collect();
        (v[0].clone(), v[1].clone())
    }

    fn comment(&mut self, indent: usize) {
        if self.cfg.comments && self.rng.gen_bool(0.2) {
            let n: u16 = self.rng.gen();
            writeln!(self.out, "{}// note {n}", "    ".repeat(indent)).unwrap();
        }
    }

    fn line(&mut self, indent: usize, s: impl AsRef<str>) {
        self.comment(indent);
        writeln!(self.out, "{}{}", "    ".repeat(indent), s.as_ref()).unwrap();
    }
}

/// A random model that parses and resolves.
pub fn random_model(seed: u64, cfg: GenConfig) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        cfg,
        budget: cfg.max_elements.max(8),
        out: String::new(),
    };
    let r = &mut g;

    let n_art = r.rng.gen_range(2..=6);
    let n_art = r.take(n_art).max(1);
    let artifacts: Vec<String> = (0..n_art).map(|i| format!("A{i}")).collect();
    let n_llm = r.rng.gen_range(0..=2);
    let llms: Vec<String> = (0..r.take(n_llm)).map(|i| format!("L{i}")).collect();
    let n_tool = r.rng.gen_range(0..=3);
    let tools: Vec<String> = (0..r.take(n_tool)).map(|i| format!("T{i}")).collect();
    let mut actors = vec!["U0".to_string(), "S0".to_string()];
    if r.rng.gen_bool(0.5) {
        actors.push("X0".to_string());
    }
    r.take(actors.len());

    let n_agents = r.rng.gen_range(1..=4);
    let n_agents = r.take(n_agents).max(1);
    let mut agents: Vec<AgentPlan> = Vec::new();
    for a in 0..n_agents {
        let llm = (!llms.is_empty() && r.rng.gen_bool(0.4)).then(|| r.pick(&llms).to_string());
        let n_st = r.rng.gen_range(0..=2);
        let stores = (0..r.take(n_st))
            .map(|s| (format!("St{s}"), r.pick(&artifacts).to_string()))
            .collect();
        let n_tasks = r.rng.gen_range(1..=3);
        let tasks = (0..r.take(n_tasks).max(1))
            .map(|t| TaskPlan {
                name: format!("t{t}"),
                inputs: r.subset(&artifacts, 2),
                outputs: r.subset(&artifacts, 2),
                body: r.rng.gen_bool(0.6),
            })
            .collect();
        agents.push(AgentPlan {
            name: format!("G{a}"),
            llm,
            stores,
            tasks,
        });
    }

    writeln!(r.out, "model \"Random {seed}\" {{").unwrap();
    r.line(1, "context {");
    let kinds = ["user", "system", "external"];
    for (i, a) in actors.iter().enumerate() {
        r.line(2, format!("{} {a}", kinds[i]));
    }
    let endpoints: Vec<String> = actors.iter().chain(&tools).cloned().collect();
    let n_flows = r.rng.gen_range(0..=4);
    for _ in 0..r.take(n_flows) {
        let (from, to) = r.pair(&endpoints);
        let arts = r.subset(&artifacts, 2).join(", ");
        r.line(2, format!("flow {from} -> {to} : {arts}"));
    }
    r.line(1, "}");

    let mut plain: Vec<String> = Vec::new();
    for a in &artifacts {
        if !plain.is_empty() && r.rng.gen_bool(0.25) {
            let elem = r.pick(&plain).to_string();
            r.line(1, format!("artifact {a} collection of {elem}"));
        } else {
            plain.push(a.clone());
            r.line(1, format!("artifact {a}"));
        }
    }
    let default = (!llms.is_empty() && r.rng.gen_bool(0.7)).then(|| r.rng.gen_range(0..llms.len()));
    for (i, l) in llms.iter().enumerate() {
        let version = if r.rng.gen_bool(0.5) { format!(" version \"v{i}\"") } else { String::new() };
        let def = if default == Some(i) { " default" } else { "" };
        r.line(1, format!("llm {l}{version}{def}"));
    }
    for t in &tools {
        let ext = if r.rng.gen_bool(0.5) { " external" } else { "" };
        r.line(1, format!("tool {t}{ext}"));
    }

    if r.rng.gen_bool(0.6) {
        deployment(r, &agents, &tools, &artifacts);
    }

    let targets: Vec<(String, String)> = agents
        .iter()
        .flat_map(|a| a.tasks.iter().map(move |t| (a.name.clone(), t.name.clone())))
        .collect();
    for agent in &agents {
        let llm = agent.llm.as_ref().map(|l| format!(" llm {l}")).unwrap_or_default();
        r.line(1, format!("agent {}{llm} {{", agent.name));
        for (s, art) in &agent.stores {
            r.line(2, format!("store {s} : {art}"));
        }
        for task in &agent.tasks {
            r.line(2, format!("task {} {{", task.name));
            r.line(3, format!("in {}", task.inputs.join(", ")));
            r.line(3, format!("out {}", task.outputs.join(", ")));
            if task.body {
                body(r, agent, &targets, &tools, &artifacts);
            } else if r.rng.gen_bool(0.7) {
                r.line(3, "prompt {");
                r.line(4, "static role = \"You are a \\\"careful\\\" worker.\"");
                for (k, input) in task.inputs.iter().enumerate() {
                    r.line(4, format!("dynamic part{k} = \"Use {{{input}}}.\""));
                }
                r.line(3, "}");
            }
            r.line(2, "}");
        }
        r.line(1, "}");
    }
    r.comment(1);
    r.out.push_str("}\n");
    g.out
}

fn deployment(r: &mut Gen, agents: &[AgentPlan], tools: &[String], artifacts: &[String]) {
    let n = r.rng.gen_range(1..=3);
    let n = r.take(n).max(1);
    let nodes: Vec<String> = (0..n).map(|i| format!("N{i}")).collect();
    let mut hosted: Vec<Vec<String>> = vec![Vec::new(); n];
    for name in agents.iter().map(|a| &a.name).chain(tools) {
        if r.rng.gen_bool(0.8) {
            hosted[r.rng.gen_range(0..n)].push(name.clone());
        }
    }
    r.line(1, "deployment {");
    for (node, hosts) in nodes.iter().zip(&hosted) {
        let ext = if r.rng.gen_bool(0.3) { " external" } else { "" };
        if hosts.is_empty() {
            r.line(2, format!("node {node}{ext} {{}}"));
        } else {
            r.line(2, format!("node {node}{ext} {{"));
            r.line(3, format!("hosts {}", hosts.join(", ")));
            r.line(2, "}");
        }
    }
    let n_links = r.rng.gen_range(0..=3);
    let n_links = if n < 2 { 0 } else { n_links };
    for _ in 0..r.take(n_links) {
        let (from, to) = r.pair(&nodes);
        let arts = if r.rng.gen_bool(0.5) {
            format!(" : {}", r.subset(artifacts, 2).join(", "))
        } else {
            String::new()
        };
        r.line(2, format!("link {from} -> {to} : \"HTTP\"{arts}"));
    }
    r.line(1, "}");
}

fn body(r: &mut Gen, agent: &AgentPlan, targets: &[(String, String)], tools: &[String], artifacts: &[String]) {
    r.line(3, "body {");
    let want = r.rng.gen_range(1..=6);
    let n = r.take(want);
    let mut names = Vec::new();
    let mut decisions = Vec::new();
    for i in 0..n {
        let id = format!("n{i}");
        let roll = r.rng.gen_range(0..10);
        let io = format!(
            "{{ in {} out {} }}",
            r.subset(artifacts, 2).join(", "),
            r.subset(artifacts, 1).join(", ")
        );
        let stmt = match roll {
            0..=4 => {
                let (ta, tt) = targets.choose(&mut r.rng).expect("targets").clone();
                let on = if ta == agent.name && r.rng.gen_bool(0.7) { String::new() } else { format!(" on {ta}") };
                let each = if r.rng.gen_bool(0.15) { format!(" each {}", r.pick(artifacts)) } else { String::new() };
                format!("call {id} = {tt}{on}{each} {io}")
            }
            5 | 6 if !tools.is_empty() => format!("invoke {id} = {}.op{i} {io}", r.pick(tools)),
            5 | 6 => format!("call {id} = t0 {io}"),
            7 => {
                decisions.push(id.clone());
                format!("decision {id} on {}", r.pick(artifacts))
            }
            8 => format!("fork {id}"),
            _ => format!("{} {id}", ["join", "merge"][r.rng.gen_range(0..2)]),
        };
        r.line(4, stmt);
        names.push(id);
    }
    let mut edges = Vec::new();
    if let Some(first) = names.first() {
        edges.push(format!("start -> {first}"));
        for w in names.windows(2) {
            edges.push(format!("{} -> {}", w[0], w[1]));
        }
        edges.push(format!("{} -> end", names[names.len() - 1]));
        let extra = r.rng.gen_range(0..=names.len());
        let all: Vec<String> = names.iter().cloned().chain(["end".to_string()]).collect();
        for _ in 0..extra {
            let from = r.pick(&names).to_string();
            let to = r.pick(&all).to_string();
            edges.push(format!("{from} -> {to}"));
        }
        for (s, _) in &agent.stores {
            if r.rng.gen_bool(0.5) {
                edges.push(format!("{}.read -> {}", s, r.pick(&names)));
            }
            if r.rng.gen_bool(0.5) {
                edges.push(format!("{} -> {}.write", r.pick(&names), s));
            }
        }
    } else if r.rng.gen_bool(0.5) {
        edges.push("start -> end".to_string());
    }
    for e in edges {
        let guard = match e.split_once(" -> ") {
            Some((from, _)) if decisions.iter().any(|d| d == from) => {
                if r.rng.gen_bool(0.3) {
                    " [else]".to_string()
                } else {
                    format!(" [{} == V{}]", r.pick(artifacts), r.rng.gen_range(0..3))
                }
            }
            _ => String::new(),
        };
        r.line(4, format!("{e}{guard}"));
    }
    r.line(3, "}");
}

/// A random directed graph on `n` vertices as successor lists, with
/// self-loops allowed and no parallel edges.
pub fn random_digraph(seed: u64, n: usize, density: f64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..n).filter(|_| rng.gen_bool(density)).collect())
        .collect()
}

/// Up to `count` items of `xs`, chosen by `seed`.
pub fn sample<T: Clone>(xs: &[T], seed: u64, count: usize) -> Vec<T> {
    let mut v = xs.to_vec();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v.truncate(count);
    v
}

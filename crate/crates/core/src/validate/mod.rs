//! Semantic rule engine.
//!
//! Each well-formedness rule implements [`Rule`] and is registered by id
//! (`V1`..`V13`) in a [`RuleRegistry`]. [`check`] runs the standard set.

mod rules;

use std::fmt;

use crate::diag::{sort_diagnostics, Diagnostic, Severity};
use crate::graph::{FlowGraph, END, START};
use crate::model::{ActivityGraph, Agent, Task};
use crate::resolve::ResolvedModel;

pub use rules::standard_rules;

pub trait Rule: Send + Sync {
    /// Registry name, `V1`..`V13`.
    fn id(&self) -> &'static str;
    fn code(&self) -> &'static str;
    fn severity(&self) -> Severity;
    fn description(&self) -> &'static str;
    fn check(&self, cx: &Context<'_>, out: &mut Vec<Diagnostic>);
}

/// Precomputed per-body facts shared by the rules.
pub struct Body<'m> {
    pub agent: &'m Agent,
    pub task: &'m Task,
    pub graph: &'m ActivityGraph,
    pub flow: FlowGraph,
    pub from_start: Vec<bool>,
    pub to_end: Vec<bool>,
}

impl Body<'_> {
    pub fn end_reachable(&self) -> bool {
        self.from_start[END]
    }
}

pub struct Context<'m> {
    pub model: &'m ResolvedModel,
    pub bodies: Vec<Body<'m>>,
}

impl<'m> Context<'m> {
    pub fn new(model: &'m ResolvedModel) -> Self {
        let bodies = model
            .tasks()
            .filter_map(|(agent, task)| {
                let graph = task.body.as_ref()?;
                let flow = FlowGraph::new(graph);
                Some(Body {
                    agent,
                    task,
                    graph,
                    from_start: flow.reachable_from(START),
                    to_end: flow.reaching(END),
                    flow,
                })
            })
            .collect();
        Context { model, bodies }
    }

    pub fn error(&self, code: &str, message: String, span: crate::model::Span) -> Diagnostic {
        Diagnostic::error(code, message, self.model.file(), span)
    }

    pub fn warning(&self, code: &str, message: String, span: crate::model::Span) -> Diagnostic {
        Diagnostic::warning(code, message, self.model.file(), span)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownRule(pub String);

impl fmt::Display for UnknownRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown rule `{}`", self.0)
    }
}

impl std::error::Error for UnknownRule {}

pub struct RuleRegistry {
    rules: Vec<Box<dyn Rule>>,
}

impl Default for RuleRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl RuleRegistry {
    pub fn empty() -> Self {
        Self { rules: Vec::new() }
    }

    pub fn standard() -> Self {
        Self {
            rules: standard_rules(),
        }
    }

    pub fn register(&mut self, rule: Box<dyn Rule>) {
        self.rules.push(rule);
    }

    pub fn rules(&self) -> impl Iterator<Item = &dyn Rule> {
        self.rules.iter().map(|r| r.as_ref())
    }

    /// Looks a rule up by id (`V4`) or code (`E104`), case-insensitively.
    pub fn find(&self, key: &str) -> Option<&dyn Rule> {
        self.rules()
            .find(|r| r.id().eq_ignore_ascii_case(key) || r.code().eq_ignore_ascii_case(key))
    }

    /// Keeps only the rules named by `keys`.
    pub fn retain<S: AsRef<str>>(self, keys: &[S]) -> Result<Self, UnknownRule> {
        for k in keys {
            if self.find(k.as_ref()).is_none() {
                return Err(UnknownRule(k.as_ref().to_string()));
            }
        }
        let matches = |r: &dyn Rule| {
            keys.iter().any(|k| {
                let k = k.as_ref();
                r.id().eq_ignore_ascii_case(k) || r.code().eq_ignore_ascii_case(k)
            })
        };
        Ok(Self {
            rules: self.rules.into_iter().filter(|r| matches(r.as_ref())).collect(),
        })
    }

    pub fn check(&self, model: &ResolvedModel) -> Vec<Diagnostic> {
        let cx = Context::new(model);
        let mut out = Vec::new();
        for rule in &self.rules {
            rule.check(&cx, &mut out);
        }
        sort_diagnostics(&mut out);
        out.dedup();
        out
    }
}

/// Runs every standard rule.
pub fn check(model: &ResolvedModel) -> Vec<Diagnostic> {
    RuleRegistry::standard().check(model)
}

pub fn is_valid(model: &ResolvedModel) -> bool {
    !check(model).iter().any(Diagnostic::is_error)
}

//! Canonical printer.
//!
//! Output uses two-space indentation and one statement per line. Items keep
//! their source order; comments stay attached to the item that follows them,
//! or trail the line they were written on.

use std::path::Path;

use thiserror::Error;

use super::lexer::{quote, Comment};
use super::parser::parse;
use crate::diag::Diagnostic;
use crate::model::*;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("refusing to format unparseable input")]
    Unparseable(Vec<Diagnostic>),
}

impl FormatError {
    /// F001 followed by the parse diagnostics that caused it.
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            FormatError::Unparseable(d) => d,
        }
    }
}

pub fn format(text: &str) -> Result<String, FormatError> {
    format_named(text, "<input>")
}

/// Like [`format`], attributing diagnostics to `file`.
pub fn format_named(text: &str, file: impl AsRef<Path>) -> Result<String, FormatError> {
    let file = file.as_ref();
    let parsed = parse(text, file);
    match parsed.model {
        Some(model) => {
            let mut p = Printer::new(&parsed.comments);
            p.model(&model);
            Ok(p.finish())
        }
        None => {
            let first = parsed.diagnostics.first().map(|d| Span::new(d.span.start, d.span.end));
            let mut diags = vec![Diagnostic::error(
                "F001",
                "refusing to format input that does not parse",
                file,
                first.unwrap_or_default(),
            )];
            diags.extend(parsed.diagnostics);
            Err(FormatError::Unparseable(diags))
        }
    }
}

/// Emits source text for a model. The text parses back to a structurally
/// equal model.
pub fn parse_roundtrip(model: &Model) -> String {
    let mut p = Printer::new(&[]);
    p.model(model);
    p.finish()
}

struct Printer<'c> {
    out: String,
    indent: usize,
    comments: &'c [Comment],
    next: usize,
}

enum Top<'m> {
    Context(&'m ContextSection),
    Deployment(&'m DeploymentSection),
    Artifact(&'m ArtifactType),
    Llm(&'m LlmDecl),
    Tool(&'m ToolDecl),
    Agent(&'m Agent),
}

impl Top<'_> {
    fn span(&self) -> Span {
        match self {
            Top::Context(x) => x.span,
            Top::Deployment(x) => x.span,
            Top::Artifact(x) => x.span,
            Top::Llm(x) => x.span,
            Top::Tool(x) => x.span,
            Top::Agent(x) => x.span,
        }
    }

    /// Same-kind runs of these stay together without blank lines.
    fn line_kind(&self) -> Option<u8> {
        match self {
            Top::Artifact(_) => Some(0),
            Top::Llm(_) => Some(1),
            Top::Tool(_) => Some(2),
            _ => None,
        }
    }
}

fn sorted_by_span<T>(mut items: Vec<T>, span: impl Fn(&T) -> Span) -> Vec<T> {
    items.sort_by_key(|i| span(i).start);
    items
}

fn join(ids: &[Ident]) -> String {
    ids.iter()
        .map(|i| i.name.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

fn call_io(io: &Io) -> String {
    let mut parts = Vec::new();
    if !io.inputs.is_empty() {
        parts.push(format!("in {}", join(&io.inputs)));
    }
    if !io.outputs.is_empty() {
        parts.push(format!("out {}", join(&io.outputs)));
    }
    if parts.is_empty() {
        "{}".to_string()
    } else {
        format!("{{ {} }}", parts.join(" "))
    }
}

impl<'c> Printer<'c> {
    fn new(comments: &'c [Comment]) -> Self {
        Self {
            out: String::new(),
            indent: 0,
            comments,
            next: 0,
        }
    }

    fn finish(mut self) -> String {
        while self.next < self.comments.len() {
            self.comment_line();
        }
        self.out
    }

    fn pad(&mut self) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
    }

    fn comment_line(&mut self) {
        let text = self.comments[self.next].text.trim_end().to_string();
        self.next += 1;
        self.pad();
        self.out.push_str("//");
        self.out.push_str(&text);
        self.out.push('\n');
    }

    /// Flushes comments written on lines before `line`.
    fn flush_before(&mut self, line: u32) {
        while self
            .comments
            .get(self.next)
            .is_some_and(|c| c.span.start.line < line)
        {
            self.comment_line();
        }
    }

    fn trailing(&mut self, span: Span) {
        if span.is_synthetic() {
            return;
        }
        if let Some(c) = self.comments.get(self.next) {
            if c.span.start.line == span.end.line {
                let text = c.text.trim_end().to_string();
                self.next += 1;
                self.out.push_str(" //");
                self.out.push_str(&text);
            }
        }
    }

    fn line(&mut self, span: Span, text: &str) {
        if !span.is_synthetic() {
            self.flush_before(span.start.line);
        }
        self.pad();
        self.out.push_str(text);
        self.trailing(span);
        self.out.push('\n');
    }

    fn open(&mut self, span: Span, header: &str) {
        if !span.is_synthetic() {
            self.flush_before(span.start.line);
        }
        self.pad();
        self.out.push_str(header);
        self.out.push_str(" {\n");
        self.indent += 1;
    }

    fn close(&mut self, span: Span) {
        if !span.is_synthetic() {
            self.flush_before(span.end.line);
        }
        self.indent -= 1;
        self.pad();
        self.out.push('}');
        self.trailing(span);
        self.out.push('\n');
    }

    fn blank(&mut self) {
        self.out.push('\n');
    }

    fn model(&mut self, m: &Model) {
        self.open(m.span, &format!("model {}", quote(&m.name)));
        let mut items: Vec<Top<'_>> = Vec::new();
        items.extend(m.contexts.iter().map(Top::Context));
        items.extend(m.artifacts.iter().map(Top::Artifact));
        items.extend(m.llms.iter().map(Top::Llm));
        items.extend(m.tools.iter().map(Top::Tool));
        items.extend(m.deployments.iter().map(Top::Deployment));
        items.extend(m.agents.iter().map(Top::Agent));
        let items = sorted_by_span(items, Top::span);
        let mut prev: Option<Option<u8>> = None;
        for item in &items {
            if let Some(p) = prev {
                if p.is_none() || p != item.line_kind() {
                    self.blank();
                }
            }
            prev = Some(item.line_kind());
            match item {
                Top::Context(c) => self.context(c),
                Top::Deployment(d) => self.deployment(d),
                Top::Artifact(a) => {
                    let mut s = format!("artifact {}", a.name);
                    if let Some(e) = &a.element_type {
                        s.push_str(&format!(" collection of {e}"));
                    }
                    self.line(a.span, &s);
                }
                Top::Llm(l) => {
                    let mut s = format!("llm {}", l.name);
                    if let Some(v) = &l.version {
                        s.push_str(&format!(" version {}", quote(v)));
                    }
                    if l.default {
                        s.push_str(" default");
                    }
                    self.line(l.span, &s);
                }
                Top::Tool(t) => {
                    let s = if t.external {
                        format!("tool {} external", t.name)
                    } else {
                        format!("tool {}", t.name)
                    };
                    self.line(t.span, &s);
                }
                Top::Agent(a) => self.agent(a),
            }
        }
        self.close(m.span);
    }

    fn context(&mut self, c: &ContextSection) {
        enum Item<'m> {
            Actor(&'m Actor),
            Flow(&'m ContextFlow),
        }
        self.open(c.span, "context");
        let mut items: Vec<Item<'_>> = c.actors.iter().map(Item::Actor).collect();
        items.extend(c.flows.iter().map(Item::Flow));
        let items = sorted_by_span(items, |i| match i {
            Item::Actor(a) => a.span,
            Item::Flow(f) => f.span,
        });
        for item in items {
            match item {
                Item::Actor(a) => self.line(a.span, &format!("{} {}", a.kind.keyword(), a.name)),
                Item::Flow(f) => self.line(
                    f.span,
                    &format!("flow {} -> {} : {}", f.from, f.to, join(&f.artifacts)),
                ),
            }
        }
        self.close(c.span);
    }

    fn deployment(&mut self, d: &DeploymentSection) {
        enum Item<'m> {
            Node(&'m DeploymentNode),
            Link(&'m DeploymentLink),
        }
        self.open(d.span, "deployment");
        let mut items: Vec<Item<'_>> = d.nodes.iter().map(Item::Node).collect();
        items.extend(d.links.iter().map(Item::Link));
        let items = sorted_by_span(items, |i| match i {
            Item::Node(n) => n.span,
            Item::Link(l) => l.span,
        });
        for item in items {
            match item {
                Item::Node(n) => {
                    let header = if n.external {
                        format!("node {} external", n.name)
                    } else {
                        format!("node {}", n.name)
                    };
                    self.open(n.span, &header);
                    if !n.hosts.is_empty() {
                        self.line(Span::default(), &format!("hosts {}", join(&n.hosts)));
                    }
                    self.close(n.span);
                }
                Item::Link(l) => {
                    let mut s = format!("link {} -> {} : {}", l.from, l.to, quote(&l.protocol));
                    if !l.artifacts.is_empty() {
                        s.push_str(&format!(" : {}", join(&l.artifacts)));
                    }
                    self.line(l.span, &s);
                }
            }
        }
        self.close(d.span);
    }

    fn agent(&mut self, a: &Agent) {
        enum Item<'m> {
            Store(&'m Datastore),
            Task(&'m Task),
        }
        let header = match &a.llm {
            Some(l) => format!("agent {} llm {}", a.name, l),
            None => format!("agent {}", a.name),
        };
        self.open(a.span, &header);
        let mut items: Vec<Item<'_>> = a.stores.iter().map(Item::Store).collect();
        items.extend(a.tasks.iter().map(Item::Task));
        let items = sorted_by_span(items, |i| match i {
            Item::Store(s) => s.span,
            Item::Task(t) => t.span,
        });
        let mut after_task = false;
        for item in items {
            match item {
                Item::Store(s) => {
                    self.line(s.span, &format!("store {} : {}", s.name, s.artifact));
                    after_task = false;
                }
                Item::Task(t) => {
                    if after_task {
                        self.blank();
                    }
                    self.task(t);
                    after_task = true;
                }
            }
        }
        self.close(a.span);
    }

    fn task(&mut self, t: &Task) {
        self.open(t.span, &format!("task {}", t.name));
        if !t.io.inputs.is_empty() {
            self.line(t.io_spans.inputs, &format!("in {}", join(&t.io.inputs)));
        }
        if !t.io.outputs.is_empty() {
            self.line(t.io_spans.outputs, &format!("out {}", join(&t.io.outputs)));
        }
        if let Some(body) = &t.body {
            self.body(body);
        }
        if let Some(prompt) = &t.prompt {
            self.open(prompt.span, "prompt");
            for row in &prompt.rows {
                let part = match row.part {
                    PromptPart::Static => "static",
                    PromptPart::TaskSpecific => "dynamic",
                };
                self.line(
                    row.span,
                    &format!("{part} {} = {}", row.name, quote(&row.template)),
                );
            }
            self.close(prompt.span);
        }
        self.close(t.span);
    }

    fn body(&mut self, g: &ActivityGraph) {
        enum Item<'m> {
            Node(&'m ActivityNode),
            Edge(&'m ActivityEdge),
        }
        self.open(g.span, "body");
        let mut items: Vec<Item<'_>> = g.nodes.iter().map(Item::Node).collect();
        items.extend(g.edges.iter().map(Item::Edge));
        let items = sorted_by_span(items, |i| match i {
            Item::Node(n) => n.span,
            Item::Edge(e) => e.span,
        });
        for item in items {
            match item {
                Item::Node(n) => {
                    let text = match &n.kind {
                        NodeKind::Call(c) => {
                            let mut s = format!("call {} = {}", n.id, c.task);
                            if let Some(a) = &c.agent {
                                s.push_str(&format!(" on {a}"));
                            }
                            if let Some(e) = &c.each {
                                s.push_str(&format!(" each {e}"));
                            }
                            format!("{s} {}", call_io(&c.io))
                        }
                        NodeKind::Invoke(t) => format!(
                            "invoke {} = {}.{} {}",
                            n.id,
                            t.tool,
                            t.operation,
                            call_io(&t.io)
                        ),
                        NodeKind::Decision { subject } => {
                            format!("decision {} on {subject}", n.id)
                        }
                        NodeKind::Fork => format!("fork {}", n.id),
                        NodeKind::Join => format!("join {}", n.id),
                        NodeKind::Merge => format!("merge {}", n.id),
                    };
                    self.line(n.span, &text);
                }
                Item::Edge(e) => {
                    let mut s = format!("{} -> {}", e.from, e.to);
                    if let Some(g) = &e.guard {
                        s.push_str(&format!(" {g}"));
                    }
                    self.line(e.span, &s);
                }
            }
        }
        self.close(g.span);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_indentation() {
        let messy = "model \"m\" {\n\tcontext {   system S\n        user U }\n  tool T external\n}\n";
        let out = format(messy).unwrap();
        assert_eq!(
            out,
            "model \"m\" {\n  context {\n    system S\n    user U\n  }\n\n  tool T external\n}\n"
        );
        assert_eq!(format(&out).unwrap(), out);
    }

    #[test]
    fn keeps_comments() {
        let src = "// header\nmodel \"m\" {\n  // the system\n  context { system S } // trailing\n  artifact A\n  // dangling\n}\n";
        let out = format(src).unwrap();
        assert!(out.starts_with("// header\nmodel"));
        assert!(out.contains("  // the system\n  context {"));
        assert!(out.contains("    system S // trailing\n"));
        assert!(out.contains("  // dangling\n}"));
        assert_eq!(format(&out).unwrap(), out);
    }

    #[test]
    fn refuses_unparseable() {
        let err = format("model \"m\" { agent }").unwrap_err();
        assert_eq!(err.diagnostics()[0].code, "F001");
        assert!(err.diagnostics().iter().skip(1).all(|d| d.is_parse()));
    }

    #[test]
    fn agent_order_is_kept() {
        let src = "model \"m\" { agent B { } agent A { } }";
        let out = format(src).unwrap();
        assert!(out.find("agent B").unwrap() < out.find("agent A").unwrap());
    }
}

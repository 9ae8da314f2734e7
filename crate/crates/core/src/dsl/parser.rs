//! Recursive-descent parser for `.a4c` files.
//!
//! Errors are reported as P-class diagnostics. After an error the parser
//! skips to the next top-level section keyword so one run reports every
//! broken section.

use std::path::{Path, PathBuf};

use super::lexer::{lex, Comment, LexError, Token, TokenKind};
use crate::diag::{sort_diagnostics, Diagnostic};
use crate::model::*;

/// Words that open a top-level section.
pub const SECTION_KEYWORDS: &[&str] = &["context", "deployment", "artifact", "llm", "tool", "agent"];

/// Words with a fixed meaning in statement position; they cannot name
/// activity nodes.
pub const BODY_RESERVED: &[&str] = &[
    "call", "invoke", "decision", "fork", "join", "merge", "start", "end",
];

/// Every word the grammar gives meaning to somewhere.
pub const KEYWORDS: &[&str] = &[
    "model", "context", "system", "user", "external", "flow", "artifact", "collection", "of",
    "llm", "version", "default", "tool", "deployment", "node", "hosts", "link", "agent", "store",
    "task", "in", "out", "body", "call", "on", "each", "invoke", "decision", "fork", "join",
    "merge", "start", "end", "read", "write", "else", "prompt", "static", "dynamic",
];

#[derive(Debug, Clone)]
pub struct ParseResult {
    /// Present iff no P-class diagnostic was produced.
    pub model: Option<Model>,
    pub diagnostics: Vec<Diagnostic>,
    pub comments: Vec<Comment>,
}

impl ParseResult {
    pub fn has_parse_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_parse)
    }
}

pub fn parse(text: &str, file: impl AsRef<Path>) -> ParseResult {
    let file = file.as_ref().to_path_buf();
    let lexed = lex(text);
    let mut diags = Vec::new();
    for e in &lexed.errors {
        diags.push(match e {
            LexError::UnexpectedChar(c, span) => {
                Diagnostic::error("P001", format!("unexpected character `{c}`"), &file, *span)
            }
            LexError::UnterminatedString(span) => {
                Diagnostic::error("P002", "unterminated string", &file, *span)
            }
        });
    }
    let mut p = Parser {
        toks: &lexed.tokens,
        pos: 0,
        depth: 0,
        prev: Span::default(),
        file: file.clone(),
        diags,
    };
    let model = p.model();
    let mut diagnostics = p.diags;
    sort_diagnostics(&mut diagnostics);
    let model = if diagnostics.iter().any(Diagnostic::is_parse) {
        None
    } else {
        model
    };
    ParseResult {
        model,
        diagnostics,
        comments: lexed.comments,
    }
}

type PResult<T> = Result<T, ()>;

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    depth: i32,
    prev: Span,
    file: PathBuf,
    diags: Vec<Diagnostic>,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek().kind == kind
    }

    fn at_word(&self, word: &str) -> bool {
        self.peek().is_word(word)
    }

    fn bump(&mut self) -> &'t Token {
        let tok = self.peek();
        match tok.kind {
            TokenKind::LBrace => self.depth += 1,
            TokenKind::RBrace => self.depth -= 1,
            TokenKind::Eof => return tok,
            _ => {}
        }
        self.prev = tok.span;
        self.pos += 1;
        tok
    }

    fn eat(&mut self, kind: TokenKind) -> Option<&'t Token> {
        self.at(kind).then(|| self.bump())
    }

    fn eat_word(&mut self, word: &str) -> Option<&'t Token> {
        self.at_word(word).then(|| self.bump())
    }

    fn unexpected(&mut self, expected: &str) {
        let tok = self.peek();
        let found = if tok.kind == TokenKind::Eof {
            "unexpected end of file".to_string()
        } else {
            format!("unexpected {}", tok.describe())
        };
        self.diags.push(Diagnostic::error(
            "P001",
            format!("{found}, expected {expected}"),
            &self.file,
            tok.span,
        ));
    }

    fn error_at(&mut self, code: &str, message: String, span: Span) {
        self.diags
            .push(Diagnostic::error(code, message, &self.file, span));
    }

    /// Reports an identifier in keyword position: P003 if it is not a
    /// keyword at all, P001 if it is a keyword used out of place.
    fn bad_word(&mut self, expected: &str) {
        let tok = self.peek();
        if tok.kind == TokenKind::Ident && !KEYWORDS.contains(&tok.text.as_str()) {
            self.error_at(
                "P003",
                format!("unknown keyword `{}`, expected {expected}", tok.text),
                tok.span,
            );
        } else {
            self.unexpected(expected);
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<&'t Token> {
        match self.eat(kind) {
            Some(t) => Ok(t),
            None => {
                self.unexpected(kind.describe());
                Err(())
            }
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<&'t Token> {
        match self.eat_word(word) {
            Some(t) => Ok(t),
            None => {
                self.unexpected(&format!("`{word}`"));
                Err(())
            }
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        let t = self.expect(TokenKind::Ident)?;
        Ok(Ident::spanned(t.text.clone(), t.span))
    }

    fn string(&mut self) -> PResult<String> {
        Ok(self.expect(TokenKind::Str)?.text.clone())
    }

    fn ident_list(&mut self) -> PResult<Vec<Ident>> {
        let mut v = vec![self.ident()?];
        while self.eat(TokenKind::Comma).is_some() {
            v.push(self.ident()?);
        }
        Ok(v)
    }

    fn since(&self, start: Span) -> Span {
        start.to(self.prev)
    }

    fn recover(&mut self, model_depth: i32) {
        loop {
            let tok = self.peek();
            if tok.kind == TokenKind::Eof {
                return;
            }
            if self.depth == model_depth
                && (tok.kind == TokenKind::RBrace
                    || (tok.kind == TokenKind::Ident
                        && SECTION_KEYWORDS.contains(&tok.text.as_str())))
            {
                return;
            }
            self.bump();
        }
    }

    fn model(&mut self) -> Option<Model> {
        let start = self.peek().span;
        if !self.at_word("model") {
            self.bad_word("`model`");
            return None;
        }
        self.bump();
        let name = self.string().ok()?;
        self.expect(TokenKind::LBrace).ok()?;
        let mut model = Model {
            name,
            file: self.file.clone(),
            ..Model::default()
        };
        let model_depth = self.depth;
        loop {
            if self.eat(TokenKind::RBrace).is_some() {
                break;
            }
            if self.at(TokenKind::Eof) {
                self.unexpected("`}`");
                break;
            }
            if self.section(&mut model).is_err() {
                self.recover(model_depth);
            }
        }
        model.span = self.since(start);
        if !self.at(TokenKind::Eof) {
            self.unexpected("end of file");
        }
        Some(model)
    }

    fn section(&mut self, model: &mut Model) -> PResult<()> {
        let tok = self.peek();
        let word = if tok.kind == TokenKind::Ident {
            tok.text.as_str()
        } else {
            ""
        };
        match word {
            "context" => model.contexts.push(self.context()?),
            "deployment" => model.deployments.push(self.deployment()?),
            "artifact" => model.artifacts.push(self.artifact()?),
            "llm" => model.llms.push(self.llm()?),
            "tool" => model.tools.push(self.tool()?),
            "agent" => model.agents.push(self.agent()?),
            _ => {
                self.bad_word("a section (context, deployment, artifact, llm, tool, agent)");
                return Err(());
            }
        }
        Ok(())
    }

    fn context(&mut self) -> PResult<ContextSection> {
        let start = self.bump().span;
        self.expect(TokenKind::LBrace)?;
        let mut ctx = ContextSection::default();
        loop {
            if self.eat(TokenKind::RBrace).is_some() {
                break;
            }
            let tok = self.peek();
            let kind = match tok.text.as_str() {
                _ if tok.kind != TokenKind::Ident => None,
                "system" => Some(ActorKind::System),
                "user" => Some(ActorKind::User),
                "external" => Some(ActorKind::ExternalSystem),
                "flow" => {
                    ctx.flows.push(self.flow()?);
                    continue;
                }
                _ => None,
            };
            let Some(kind) = kind else {
                self.bad_word("`system`, `user`, `external`, `flow` or `}`");
                return Err(());
            };
            let s = self.bump().span;
            let name = self.ident()?;
            ctx.actors.push(Actor {
                kind,
                name,
                span: self.since(s),
            });
        }
        ctx.span = self.since(start);
        Ok(ctx)
    }

    fn flow(&mut self) -> PResult<ContextFlow> {
        let start = self.bump().span;
        let from = self.ident()?;
        self.expect(TokenKind::Arrow)?;
        let to = self.ident()?;
        self.expect(TokenKind::Colon)?;
        let artifacts = self.ident_list()?;
        Ok(ContextFlow {
            from,
            to,
            artifacts,
            span: self.since(start),
        })
    }

    fn artifact(&mut self) -> PResult<ArtifactType> {
        let start = self.bump().span;
        let name = self.ident()?;
        let element_type = if self.eat_word("collection").is_some() {
            self.expect_word("of")?;
            Some(self.ident()?)
        } else {
            None
        };
        Ok(ArtifactType {
            name,
            element_type,
            span: self.since(start),
        })
    }

    fn llm(&mut self) -> PResult<LlmDecl> {
        let start = self.bump().span;
        let name = self.ident()?;
        let version = if self.eat_word("version").is_some() {
            Some(self.string()?)
        } else {
            None
        };
        let default = self.eat_word("default").is_some();
        Ok(LlmDecl {
            name,
            version,
            default,
            span: self.since(start),
        })
    }

    fn tool(&mut self) -> PResult<ToolDecl> {
        let start = self.bump().span;
        let name = self.ident()?;
        let external = self.eat_word("external").is_some();
        Ok(ToolDecl {
            name,
            external,
            span: self.since(start),
        })
    }

    fn deployment(&mut self) -> PResult<DeploymentSection> {
        let start = self.bump().span;
        self.expect(TokenKind::LBrace)?;
        let mut dep = DeploymentSection::default();
        loop {
            if self.eat(TokenKind::RBrace).is_some() {
                break;
            }
            if self.at_word("node") {
                let s = self.bump().span;
                let name = self.ident()?;
                let external = self.eat_word("external").is_some();
                self.expect(TokenKind::LBrace)?;
                let hosts = if self.eat_word("hosts").is_some() {
                    self.ident_list()?
                } else {
                    Vec::new()
                };
                if self.eat(TokenKind::RBrace).is_none() {
                    self.bad_word("`hosts` or `}`");
                    return Err(());
                }
                dep.nodes.push(DeploymentNode {
                    name,
                    external,
                    hosts,
                    span: self.since(s),
                });
            } else if self.at_word("link") {
                let s = self.bump().span;
                let from = self.ident()?;
                self.expect(TokenKind::Arrow)?;
                let to = self.ident()?;
                self.expect(TokenKind::Colon)?;
                let protocol = self.string()?;
                let artifacts = if self.eat(TokenKind::Colon).is_some() {
                    self.ident_list()?
                } else {
                    Vec::new()
                };
                dep.links.push(DeploymentLink {
                    from,
                    to,
                    protocol,
                    artifacts,
                    span: self.since(s),
                });
            } else {
                self.bad_word("`node`, `link` or `}`");
                return Err(());
            }
        }
        dep.span = self.since(start);
        Ok(dep)
    }

    fn agent(&mut self) -> PResult<Agent> {
        let start = self.bump().span;
        let name = self.ident()?;
        let llm = if self.eat_word("llm").is_some() {
            Some(self.ident()?)
        } else {
            None
        };
        self.expect(TokenKind::LBrace)?;
        let mut agent = Agent {
            name,
            llm,
            stores: Vec::new(),
            tasks: Vec::new(),
            span: Span::default(),
        };
        loop {
            if self.eat(TokenKind::RBrace).is_some() {
                break;
            }
            if self.at_word("store") {
                let s = self.bump().span;
                let name = self.ident()?;
                self.expect(TokenKind::Colon)?;
                let artifact = self.ident()?;
                agent.stores.push(Datastore {
                    name,
                    artifact,
                    span: self.since(s),
                });
            } else if self.at_word("task") {
                agent.tasks.push(self.task()?);
            } else {
                self.bad_word("`store`, `task` or `}`");
                return Err(());
            }
        }
        agent.span = self.since(start);
        Ok(agent)
    }

    fn task(&mut self) -> PResult<Task> {
        const ORDER: [&str; 4] = ["in", "out", "body", "prompt"];
        let start = self.bump().span;
        let name = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut task = Task {
            name,
            io: Io::default(),
            io_spans: IoSpans::default(),
            body: None,
            prompt: None,
            span: Span::default(),
        };
        let mut stage = 0;
        loop {
            if self.eat(TokenKind::RBrace).is_some() {
                break;
            }
            let tok = self.peek();
            let idx = ORDER
                .iter()
                .position(|w| tok.is_word(w))
                .filter(|&i| i >= stage);
            let Some(idx) = idx else {
                if ORDER.iter().any(|w| tok.is_word(w)) {
                    self.unexpected("task members in the order `in`, `out`, `body`, `prompt`");
                } else {
                    self.bad_word("`in`, `out`, `body`, `prompt` or `}`");
                }
                return Err(());
            };
            stage = idx + 1;
            let s = self.bump().span;
            match idx {
                0 => {
                    task.io.inputs = self.ident_list()?;
                    task.io_spans.inputs = self.since(s);
                }
                1 => {
                    task.io.outputs = self.ident_list()?;
                    task.io_spans.outputs = self.since(s);
                }
                2 => task.body = Some(self.body(s)?),
                _ => task.prompt = Some(self.prompt(s)?),
            }
        }
        task.span = self.since(start);
        Ok(task)
    }

    /// `(in identlist)? (out identlist)? }` inside a call statement.
    fn call_io(&mut self) -> PResult<Io> {
        let mut io = Io::default();
        if self.eat_word("in").is_some() {
            io.inputs = self.ident_list()?;
        }
        if self.eat_word("out").is_some() {
            io.outputs = self.ident_list()?;
        }
        if self.eat(TokenKind::RBrace).is_none() {
            self.bad_word("`in`, `out` or `}`");
            return Err(());
        }
        Ok(io)
    }

    fn node_id(&mut self) -> PResult<Ident> {
        let id = self.ident()?;
        if BODY_RESERVED.contains(&id.name.as_str()) {
            self.error_at(
                "P001",
                format!("reserved word `{}` cannot name an activity node", id.name),
                id.span,
            );
            return Err(());
        }
        Ok(id)
    }

    fn body(&mut self, start: Span) -> PResult<ActivityGraph> {
        self.expect(TokenKind::LBrace)?;
        let mut graph = ActivityGraph::default();
        loop {
            if self.eat(TokenKind::RBrace).is_some() {
                break;
            }
            let tok = self.peek();
            if tok.kind != TokenKind::Ident {
                self.unexpected("a statement or `}`");
                return Err(());
            }
            let s = tok.span;
            let kind = match tok.text.as_str() {
                "call" => {
                    self.bump();
                    let id = self.node_id()?;
                    self.expect(TokenKind::Eq)?;
                    let task = self.ident()?;
                    let agent = match self.eat_word("on") {
                        Some(_) => Some(self.ident()?),
                        None => None,
                    };
                    let each = match self.eat_word("each") {
                        Some(_) => Some(self.ident()?),
                        None => None,
                    };
                    self.expect(TokenKind::LBrace)?;
                    let io = self.call_io()?;
                    Some((id, NodeKind::Call(TaskCall { task, agent, each, io })))
                }
                "invoke" => {
                    self.bump();
                    let id = self.node_id()?;
                    self.expect(TokenKind::Eq)?;
                    let tool = self.ident()?;
                    self.expect(TokenKind::Dot)?;
                    let operation = self.ident()?;
                    self.expect(TokenKind::LBrace)?;
                    let io = self.call_io()?;
                    Some((id, NodeKind::Invoke(ToolCall { tool, operation, io })))
                }
                "decision" => {
                    self.bump();
                    let id = self.node_id()?;
                    self.expect_word("on")?;
                    let subject = self.ident()?;
                    Some((id, NodeKind::Decision { subject }))
                }
                "fork" | "join" | "merge" => {
                    let word = self.bump().text.as_str();
                    let id = self.node_id()?;
                    let kind = match word {
                        "fork" => NodeKind::Fork,
                        "join" => NodeKind::Join,
                        _ => NodeKind::Merge,
                    };
                    Some((id, kind))
                }
                _ => None,
            };
            match kind {
                Some((id, kind)) => graph.nodes.push(ActivityNode {
                    id,
                    kind,
                    span: self.since(s),
                }),
                None => graph.edges.push(self.edge()?),
            }
        }
        graph.span = self.since(start);
        Ok(graph)
    }

    fn endpoint(&mut self) -> PResult<(Endpoint, Span)> {
        let id = self.ident()?;
        let span = id.span;
        let ep = match id.name.as_str() {
            "start" => Endpoint::Start,
            "end" => Endpoint::End,
            _ if self.eat(TokenKind::Dot).is_some() => {
                if self.eat_word("read").is_some() {
                    Endpoint::StoreRead(id)
                } else if self.eat_word("write").is_some() {
                    Endpoint::StoreWrite(id)
                } else {
                    self.unexpected("`read` or `write`");
                    return Err(());
                }
            }
            _ => Endpoint::Node(id),
        };
        Ok((ep, span.to(self.prev)))
    }

    fn edge(&mut self) -> PResult<ActivityEdge> {
        let (from, from_span) = self.endpoint()?;
        self.expect(TokenKind::Arrow)?;
        let (to, to_span) = self.endpoint()?;
        if matches!(from, Endpoint::StoreWrite(_)) {
            self.error_at(
                "P001",
                "a `.write` endpoint can only be the target of an edge".into(),
                from_span,
            );
            return Err(());
        }
        if matches!(to, Endpoint::StoreRead(_)) {
            self.error_at(
                "P001",
                "a `.read` endpoint can only be the source of an edge".into(),
                to_span,
            );
            return Err(());
        }
        if from.store().is_some() && to.store().is_some() {
            self.error_at(
                "P001",
                "an edge cannot connect two datastores".into(),
                from_span.to(to_span),
            );
            return Err(());
        }
        let guard = if self.at(TokenKind::LBracket) {
            let s = self.bump().span;
            let form = if self.eat_word("else").is_some() {
                GuardForm::Else
            } else {
                let artifact = self.ident()?;
                self.expect(TokenKind::EqEq)?;
                let literal = self.ident()?;
                GuardForm::Equals { artifact, literal }
            };
            self.expect(TokenKind::RBracket)?;
            Some(Guard {
                form,
                span: self.since(s),
            })
        } else {
            None
        };
        Ok(ActivityEdge {
            from,
            to,
            guard,
            span: from_span.to(self.prev),
        })
    }

    fn prompt(&mut self, start: Span) -> PResult<PromptSpec> {
        self.expect(TokenKind::LBrace)?;
        let mut spec = PromptSpec::default();
        loop {
            if self.eat(TokenKind::RBrace).is_some() {
                break;
            }
            let part = if self.at_word("static") {
                PromptPart::Static
            } else if self.at_word("dynamic") {
                PromptPart::TaskSpecific
            } else {
                self.bad_word("`static`, `dynamic` or `}`");
                return Err(());
            };
            let s = self.bump().span;
            let name = self.ident()?;
            self.expect(TokenKind::Eq)?;
            let template = self.string()?;
            spec.rows.push(PromptRow {
                part,
                name,
                template,
                span: self.since(s),
            });
        }
        spec.span = self.since(start);
        Ok(spec)
    }
}

//! Coded diagnostics with source spans.
//!
//! Codes are grouped by class: `P` parse, `F` format, `E0xx` resolution,
//! `E1xx`/`W1xx` semantic rules, `A` analysis and `R` rendering.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::model::{Pos, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub file: String,
    pub start: Pos,
    pub end: Pos,
}

impl SourceSpan {
    pub fn new(file: &Path, span: Span) -> Self {
        Self {
            file: file.display().to_string(),
            start: span.start,
            end: span.end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Related {
    pub message: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub span: SourceSpan,
    pub related: Vec<Related>,
}

impl Diagnostic {
    pub fn error(code: &str, message: impl Into<String>, file: &Path, span: Span) -> Self {
        Self::new(Severity::Error, code, message, file, span)
    }

    pub fn warning(code: &str, message: impl Into<String>, file: &Path, span: Span) -> Self {
        Self::new(Severity::Warning, code, message, file, span)
    }

    pub fn new(
        severity: Severity,
        code: &str,
        message: impl Into<String>,
        file: &Path,
        span: Span,
    ) -> Self {
        Self {
            severity,
            code: code.to_string(),
            message: message.into(),
            span: SourceSpan::new(file, span),
            related: Vec::new(),
        }
    }

    pub fn with_related(mut self, message: impl Into<String>, file: &Path, span: Span) -> Self {
        self.related.push(Related {
            message: message.into(),
            span: SourceSpan::new(file, span),
        });
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub fn is_parse(&self) -> bool {
        self.code.starts_with('P')
    }

    fn sort_key(&self) -> (&str, Pos, &str, &str) {
        (&self.span.file, self.span.start, &self.code, &self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {}[{}]: {}",
            self.span.file,
            self.span.start.line,
            self.span.start.column,
            self.severity,
            self.code,
            self.message
        )?;
        for r in &self.related {
            write!(
                f,
                "\n  note: {}:{}:{}: {}",
                r.span.file, r.span.start.line, r.span.start.column, r.message
            )?;
        }
        Ok(())
    }
}

/// Orders diagnostics by file, line, column, then code.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

#[derive(Serialize)]
struct WireRelated<'a> {
    message: &'a str,
    file: &'a str,
    start: [u32; 2],
    end: [u32; 2],
}

#[derive(Serialize)]
struct WireDiagnostic<'a> {
    code: &'a str,
    severity: Severity,
    message: &'a str,
    file: &'a str,
    start: [u32; 2],
    end: [u32; 2],
    related: Vec<WireRelated<'a>>,
}

fn pos(p: Pos) -> [u32; 2] {
    [p.line, p.column]
}

/// JSON array of diagnostics with the stable wire field names.
pub fn to_json(diags: &[Diagnostic]) -> serde_json::Value {
    let wire: Vec<WireDiagnostic<'_>> = diags
        .iter()
        .map(|d| WireDiagnostic {
            code: &d.code,
            severity: d.severity,
            message: &d.message,
            file: &d.span.file,
            start: pos(d.span.start),
            end: pos(d.span.end),
            related: d
                .related
                .iter()
                .map(|r| WireRelated {
                    message: &r.message,
                    file: &r.span.file,
                    start: pos(r.span.start),
                    end: pos(r.span.end),
                })
                .collect(),
        })
        .collect();
    serde_json::to_value(wire).expect("diagnostics serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_field_set() {
        let d = Diagnostic::error(
            "E104",
            "msg",
            Path::new("a.a4c"),
            Span::new(Pos::new(3, 5), Pos::new(3, 9)),
        );
        let v = to_json(&[d]);
        let obj = v[0].as_object().unwrap();
        let mut keys: Vec<_> = obj.keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["code", "end", "file", "message", "related", "severity", "start"]);
        assert_eq!(v[0]["start"], serde_json::json!([3, 5]));
        assert_eq!(v[0]["severity"], "error");
    }

    #[test]
    fn ordering_is_file_line_column_code() {
        let f = Path::new("x");
        let at = |l, c| Span::new(Pos::new(l, c), Pos::new(l, c + 1));
        let mut v = vec![
            Diagnostic::warning("W113", "", f, at(2, 1)),
            Diagnostic::error("E106", "", f, at(2, 1)),
            Diagnostic::error("E101", "", f, at(1, 9)),
        ];
        sort_diagnostics(&mut v);
        let codes: Vec<_> = v.iter().map(|d| d.code.as_str()).collect();
        assert_eq!(codes, ["E101", "E106", "W113"]);
    }
}

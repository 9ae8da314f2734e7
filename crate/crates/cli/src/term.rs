use std::io::{self, IsTerminal, Write};

use a4c_core::{Diagnostic, Severity};

/// Serialized terminal output with optional ANSI color.
pub struct Term {
    color: bool,
    out: io::Stdout,
    err: io::Stderr,
}

impl Term {
    /// Honors `A4C_COLOR=always|never|auto`; `auto` colors only a terminal.
    pub fn from_env() -> Self {
        let color = match std::env::var("A4C_COLOR").as_deref() {
            Ok("always") => true,
            Ok("never") => false,
            _ => io::stdout().is_terminal() && std::env::var_os("NO_COLOR").is_none(),
        };
        Term {
            color,
            out: io::stdout(),
            err: io::stderr(),
        }
    }

    pub fn out(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.out.lock(), "{}", s.as_ref());
    }

    pub fn out_raw(&mut self, s: &str) {
        let _ = self.out.lock().write_all(s.as_bytes());
    }

    pub fn err(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.err.lock(), "{}", s.as_ref());
    }

    fn paint(&self, d: &Diagnostic) -> String {
        let text = d.to_string();
        if !self.color {
            return text;
        }
        let tag = format!("{}[{}]", d.severity, d.code);
        let color = match d.severity {
            Severity::Error => "\x1b[1;31m",
            Severity::Warning => "\x1b[1;33m",
        };
        text.replacen(&tag, &format!("{color}{tag}\x1b[0m"), 1)
    }

    pub fn diagnostic_out(&mut self, d: &Diagnostic) {
        let s = self.paint(d);
        self.out(s);
    }

    pub fn diagnostic_err(&mut self, d: &Diagnostic) {
        let s = self.paint(d);
        self.err(s);
    }
}

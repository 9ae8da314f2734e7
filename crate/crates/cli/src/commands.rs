use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use a4c_core::analysis::{classify_all, impact as analyze_impact, Direction};
use a4c_core::diag::{has_errors, sort_diagnostics, to_json};
use a4c_core::dsl::{format_named, parse};
use a4c_core::render::{full_tree, OutputTree, RendererRegistry};
use a4c_core::validate::RuleRegistry;
use a4c_core::{resolve, Diagnostic, ResolvedModel, Severity};

use crate::term::Term;
use crate::Format;

pub const OK: u8 = 0;
pub const INVALID: u8 = 1;
pub const BROKEN: u8 = 2;
pub const USAGE: u8 = 3;

/// Outcome of loading one file.
enum Loaded {
    Model(Box<ResolvedModel>, Vec<Diagnostic>),
    /// Parse or resolution diagnostics with the exit code they map to.
    Failed(u8, Vec<Diagnostic>),
    Unreadable(String),
}

fn load(path: &Path) -> Loaded {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return Loaded::Unreadable(format!("a4c: cannot read {}: {e}", path.display())),
    };
    let parsed = parse(&text, path);
    let Some(model) = parsed.model else {
        return Loaded::Failed(BROKEN, parsed.diagnostics);
    };
    match resolve(model) {
        Ok(m) => Loaded::Model(Box::new(m), parsed.diagnostics),
        Err(mut d) => {
            d.extend(parsed.diagnostics);
            sort_diagnostics(&mut d);
            Loaded::Failed(INVALID, d)
        }
    }
}

/// Loads and validates `path`, reporting problems on stderr. Yields the
/// model only if it has no errors.
fn load_valid(t: &mut Term, path: &Path) -> Result<ResolvedModel, u8> {
    match load(path) {
        Loaded::Unreadable(msg) => {
            t.err(msg);
            Err(BROKEN)
        }
        Loaded::Failed(code, diags) => {
            diags.iter().for_each(|d| t.diagnostic_err(d));
            Err(code)
        }
        Loaded::Model(m, mut diags) => {
            diags.extend(a4c_core::validate::check(&m));
            sort_diagnostics(&mut diags);
            diags.iter().for_each(|d| t.diagnostic_err(d));
            if has_errors(&diags) {
                Err(INVALID)
            } else {
                Ok(*m)
            }
        }
    }
}

pub fn check(t: &mut Term, files: &[PathBuf], format: Format, fail_on_warning: bool, only: &[String]) -> u8 {
    let registry = if only.is_empty() {
        RuleRegistry::standard()
    } else {
        match RuleRegistry::standard().retain(only) {
            Ok(r) => r,
            Err(e) => {
                t.err(format!("a4c: {e}"));
                return USAGE;
            }
        }
    };
    let mut code = OK;
    let mut all = Vec::new();
    for path in files {
        let diags = match load(path) {
            Loaded::Unreadable(msg) => {
                t.err(msg);
                code = code.max(BROKEN);
                continue;
            }
            Loaded::Failed(c, diags) => {
                code = code.max(c);
                diags
            }
            Loaded::Model(m, mut diags) => {
                diags.extend(registry.check(&m));
                sort_diagnostics(&mut diags);
                diags
            }
        };
        let failing = diags
            .iter()
            .any(|d| d.severity == Severity::Error || (fail_on_warning && d.severity == Severity::Warning));
        if failing {
            code = code.max(INVALID);
        }
        if format == Format::Text {
            diags.iter().for_each(|d| t.diagnostic_out(d));
        }
        all.extend(diags);
    }
    if format == Format::Json {
        t.out(pretty(&to_json(&all)));
    }
    code
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes")
}

/// Output directory of one input: `out` itself for a single input, or a
/// subdirectory named after the file stem.
fn target_dir(out: &Path, files: &[PathBuf], path: &Path) -> PathBuf {
    if files.len() == 1 {
        out.to_path_buf()
    } else {
        out.join(path.file_stem().unwrap_or_default())
    }
}

fn write(t: &mut Term, tree: &OutputTree, dir: &Path) -> u8 {
    match tree.write_to(dir) {
        Ok(()) => OK,
        Err(e) => {
            t.err(format!("a4c: cannot write {}: {e}", dir.display()));
            BROKEN
        }
    }
}

pub fn render(t: &mut Term, files: &[PathBuf], level: &str, out: &Path) -> u8 {
    let registry = RendererRegistry::standard();
    if !level.eq_ignore_ascii_case("all") && registry.get(level).is_none() {
        t.err(format!(
            "a4c: unknown render level `{level}`, expected all or {}",
            registry.names().join(", ")
        ));
        return USAGE;
    }
    let mut code = OK;
    for path in files {
        let m = match load_valid(t, path) {
            Ok(m) => m,
            Err(c) => {
                code = code.max(c);
                continue;
            }
        };
        let mut tree = OutputTree::default();
        if let Err(d) = registry.render(&m, level, &mut tree) {
            t.diagnostic_err(&d);
            code = code.max(INVALID);
            continue;
        }
        code = code.max(write(t, &tree.with_manifest(), &target_dir(out, files, path)));
    }
    code
}

pub fn docs(t: &mut Term, files: &[PathBuf], out: &Path) -> u8 {
    let mut code = OK;
    for path in files {
        let m = match load_valid(t, path) {
            Ok(m) => m,
            Err(c) => {
                code = code.max(c);
                continue;
            }
        };
        match full_tree(&m) {
            Ok(tree) => code = code.max(write(t, &tree, &target_dir(out, files, path))),
            Err(d) => {
                t.diagnostic_err(&d);
                code = code.max(INVALID);
            }
        }
    }
    code
}

pub fn impact(t: &mut Term, path: &Path, seed: &str, direction: Direction, format: Format) -> u8 {
    let m = match load_valid(t, path) {
        Ok(m) => m,
        Err(c) => return c,
    };
    match analyze_impact(&m, seed, direction) {
        Ok(report) => {
            match format {
                Format::Text => t.out(report.to_string()),
                Format::Json => t.out(pretty(&report.to_json())),
            }
            OK
        }
        Err(d) => {
            t.diagnostic_err(&d);
            USAGE
        }
    }
}

pub fn classify(t: &mut Term, files: &[PathBuf], format: Format) -> u8 {
    let mut code = OK;
    let mut rows = Vec::new();
    for path in files {
        let m = match load_valid(t, path) {
            Ok(m) => m,
            Err(c) => {
                code = code.max(c);
                continue;
            }
        };
        for (key, class) in classify_all(&m) {
            match format {
                Format::Text => t.out(format!("{key}: {}", class.value)),
                Format::Json => {
                    let mut v = class.to_json();
                    v["task"] = json!(key.to_string());
                    v["file"] = json!(path.display().to_string());
                    rows.push(v);
                }
            }
        }
    }
    if format == Format::Json {
        t.out(pretty(&Value::Array(rows)));
    }
    code
}

pub fn fmt(t: &mut Term, files: &[PathBuf], stdout: bool, check: bool) -> u8 {
    let mut code = OK;
    for path in files {
        let text = match std::fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) => {
                t.err(format!("a4c: cannot read {}: {e}", path.display()));
                code = code.max(BROKEN);
                continue;
            }
        };
        let formatted = match format_named(&text, path) {
            Ok(f) => f,
            Err(e) => {
                e.diagnostics().iter().for_each(|d| t.diagnostic_err(d));
                code = code.max(BROKEN);
                continue;
            }
        };
        if stdout {
            t.out_raw(&formatted);
        } else if check {
            if formatted != text {
                t.out(format!("{}: not formatted", path.display()));
                code = code.max(INVALID);
            }
        } else if formatted != text {
            if let Err(e) = std::fs::write(path, formatted) {
                t.err(format!("a4c: cannot write {}: {e}", path.display()));
                code = code.max(BROKEN);
            }
        }
    }
    code
}

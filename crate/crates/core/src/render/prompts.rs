use std::fmt::Write;

use super::render_error;
use crate::diag::Diagnostic;
use crate::model::{PromptPart, PromptRow, Span};
use crate::resolve::{ResolvedModel, TaskKey};

/// Markdown table of a task's prompt, static rows first. Placeholders
/// are shown verbatim.
pub fn render_prompts(model: &ResolvedModel, key: &TaskKey) -> Result<String, Diagnostic> {
    let (_, task) = model.task(key).ok_or_else(|| {
        render_error(model, "R003", format!("unknown task `{key}`"), Span::default())
    })?;
    let prompt = task.prompt.as_ref().ok_or_else(|| {
        render_error(model, "R003", format!("task `{key}` has no prompt"), task.name.span)
    })?;
    let mut s = String::new();
    writeln!(s, "# Prompt of {key}\n").unwrap();
    s.push_str(&prompt_table(&prompt.rows));
    Ok(s)
}

pub(crate) fn prompt_table(rows: &[PromptRow]) -> String {
    let mut s = String::from("| Part | Content |\n| --- | --- |\n");
    let ordered = rows
        .iter()
        .filter(|r| r.part == PromptPart::Static)
        .chain(rows.iter().filter(|r| r.part == PromptPart::TaskSpecific));
    for row in ordered {
        let part = match row.part {
            PromptPart::Static => "Static",
            PromptPart::TaskSpecific => "Task-specific",
        };
        writeln!(s, "| {part} | **{}**: {} |", row.name, cell(&row.template)).unwrap();
    }
    s
}

fn cell(text: &str) -> String {
    text.replace('\\', "\\\\")
        .replace('|', "\\|")
        .replace('\n', "<br>")
}

use std::fmt::Write;

use serde_json::{json, Value};

use super::{ChecklistItem, ItemKind, JudgmentLog, Verdict};
use crate::rationale::Rationale;

pub const CHECKLIST_VERSION: &str = "avc-checklist v1";

pub const EMPTY_BANNER: &str = "Checklist empty — root established pending no items.";

fn verdict_and_note<'a>(log: Option<&'a JudgmentLog>, id: &str) -> (Verdict, &'a str) {
    match log.and_then(|l| l.latest(id)) {
        Some(j) => (j.verdict, j.note.as_str()),
        None => (Verdict::Pending, ""),
    }
}

/// Markdown review sheet: one section per item.
pub fn checklist_markdown(r: &Rationale, items: &[ChecklistItem], log: Option<&JudgmentLog>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "<!-- {CHECKLIST_VERSION} -->");
    let _ = writeln!(out, "# Checklist: {}", r.name);
    let _ = writeln!(out);
    if items.is_empty() {
        let _ = writeln!(out, "{EMPTY_BANNER}");
        return out;
    }
    let _ = writeln!(out, "{} item(s). Accepting every item establishes {}.", items.len(), r.root);
    for (i, item) in items.iter().enumerate() {
        let kind = match item.kind {
            ItemKind::Conjecture => "conjecture",
            ItemKind::Inference => "inference",
        };
        let _ = writeln!(out);
        let _ = writeln!(out, "## {}. {} ({kind})", i + 1, item.id);
        let _ = writeln!(out);
        let _ = writeln!(out, "{}", item.rendered_text);
        let _ = writeln!(out);
        if item.kind == ItemKind::Inference {
            let _ = writeln!(out, "- Claim: {}", r.claims[&item.target].statement);
            let _ = writeln!(out, "- Premises:");
            for c in r.children(&item.target) {
                let _ = writeln!(out, "  - {c}: {}", r.claims[c].statement);
            }
        }
        if let Some(note) = &r.claims[&item.target].note {
            let _ = writeln!(out, "- Rationale note: {note}");
        }
        let _ = writeln!(out, "- Machine status: {}", item.machine_status);
        if item.counterexample {
            let _ = writeln!(out, "- Machine counterexample attached");
        }
        let (verdict, note) = verdict_and_note(log, &item.id);
        let _ = writeln!(out, "- Verdict: {verdict}");
        if note.is_empty() {
            let _ = writeln!(out, "- Note:");
        } else {
            let _ = writeln!(out, "- Note: {note}");
        }
    }
    out
}

/// JSON review sheet: an array of items with their current verdicts.
pub fn checklist_json(items: &[ChecklistItem], log: Option<&JudgmentLog>) -> Value {
    let items: Vec<Value> = items
        .iter()
        .map(|item| {
            let mut v = serde_json::to_value(item).expect("checklist item serializes");
            let (verdict, note) = verdict_and_note(log, &item.id);
            v["verdict"] = json!(verdict);
            v["note"] = json!(note);
            v
        })
        .collect();
    Value::Array(items)
}

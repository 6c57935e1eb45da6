use std::fmt::Write;

use super::{ConfigValue, Rationale, Statement, VerifyHint, DSL_VERSION};
use crate::logic::Sort;
use crate::text::quote;

fn sorts(xs: &[Sort]) -> String {
    xs.iter().map(Sort::to_string).collect::<Vec<_>>().join(", ")
}

fn strings(xs: &[String]) -> String {
    xs.iter().map(|s| quote(s)).collect::<Vec<_>>().join(", ")
}

fn value(v: &ConfigValue) -> String {
    match v {
        ConfigValue::Ident(s) => s.clone(),
        ConfigValue::Str(s) => quote(s),
        ConfigValue::Number(n) => n.to_string(),
        ConfigValue::Set(xs) => format!("{{{}}}", strings(xs)),
        ConfigValue::List(xs) => format!("[{}]", strings(xs)),
    }
}

fn hint(h: &VerifyHint) -> String {
    let args: Vec<String> = h.config.iter().map(|(k, v)| format!("{k}={}", value(v))).collect();
    format!("{}({})", h.verifier, args.join(", "))
}

/// Canonical DSL text. Claims appear in id order, decompositions in
/// stored order.
pub fn print_rationale(r: &Rationale) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {DSL_VERSION}");
    let _ = writeln!(out, "rationale {}", r.name);
    let sig = &r.signature;
    if !sig.sorts.is_empty() || !sig.functions.is_empty() || !sig.predicates.is_empty() {
        out.push('\n');
    }
    for s in &sig.sorts {
        let _ = writeln!(out, "sort {s}");
    }
    for (name, f) in &sig.functions {
        if f.args.is_empty() {
            let _ = writeln!(out, "fn {name} : {}", f.result);
        } else {
            let _ = writeln!(out, "fn {name} : {} -> {}", sorts(&f.args), f.result);
        }
    }
    for (name, args) in &sig.predicates {
        if args.is_empty() {
            let _ = writeln!(out, "pred {name}");
        } else {
            let _ = writeln!(out, "pred {name} : {}", sorts(args));
        }
    }
    for c in r.claims.values() {
        let _ = writeln!(out, "\nclaim {} {} {{", c.id, quote(&c.title));
        match &c.statement {
            Statement::Formal(phi) => {
                let _ = writeln!(out, "  formal: {phi};");
            }
            Statement::Informal(t) => {
                let _ = writeln!(out, "  informal: {};", quote(t));
            }
        }
        if let Some(h) = &c.verify {
            let _ = writeln!(out, "  verify: {};", hint(h));
        }
        if let Some(n) = &c.note {
            let _ = writeln!(out, "  note: {};", quote(n));
        }
        out.push_str("}\n");
    }
    if !r.decompositions.is_empty() {
        out.push('\n');
    }
    for d in &r.decompositions {
        let _ = writeln!(out, "decompose {} -> [{}]", d.parent, d.children.join(", "));
    }
    let _ = writeln!(out, "\nroot {}", r.root);
    if let Some(s) = &r.subject {
        let _ = writeln!(out, "subject {} sha256:{}", quote(&s.path), s.sha256);
    }
    out
}

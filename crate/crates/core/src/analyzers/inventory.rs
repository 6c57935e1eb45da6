use std::collections::BTreeSet;

use super::{function, Evidence, EvidenceDetails, EvidenceStatus, SourceSite, VerifierError};
use crate::subject::{print_expr, AssignOp, ExprKind, Literal, Span, Stmt, StmtKind, SubjectProgram};

fn site(span: Span, text: String) -> SourceSite {
    SourceSite { line: span.line, col: span.col, text }
}

fn str_lit(e: &crate::subject::Expr) -> Option<&str> {
    match &e.kind {
        ExprKind::Lit(Literal::Str(s)) => Some(s),
        _ => None,
    }
}

struct Scan {
    found: bool,
    literals: Vec<(String, Span)>,
    non_literal: Vec<SourceSite>,
}

fn scan(s: &Stmt, sink: &str, out: &mut Scan) {
    match &s.kind {
        StmtKind::Assign { target, op, value, .. } if target == sink => {
            out.found = true;
            let lits: Option<Vec<&str>> = match (&value.kind, op) {
                (ExprKind::List(xs), AssignOp::Set) => xs.iter().map(str_lit).collect(),
                _ => None,
            };
            match lits {
                Some(lits) => out.literals.extend(lits.into_iter().map(|l| (l.to_string(), value.span))),
                None => out.non_literal.push(site(s.span, format!("{target} {} {}", op.symbol(), print_expr(value)))),
            }
        }
        StmtKind::For { var, iter, .. } if var == sink => {
            out.found = true;
            out.non_literal.push(site(s.span, format!("for {var} in {}", print_expr(iter))));
        }
        StmtKind::Expr(e) => {
            if let ExprKind::Method(recv, name, args) = &e.kind {
                if matches!(&recv.kind, ExprKind::Var(v) if v == sink) && name == "append" {
                    match args.as_slice() {
                        [a] if str_lit(a).is_some() => out.literals.push((str_lit(a).unwrap().to_string(), a.span)),
                        _ => out.non_literal.push(site(e.span, print_expr(e))),
                    }
                }
            }
        }
        _ => {}
    }
}

/// Compares the string literals that can ever reach `sink` in `fname`
/// against `claimed`. Value semantics of the subject language mean only
/// direct assignments and appends to `sink` matter.
pub fn verify_string_inventory(
    prog: &SubjectProgram,
    fname: &str,
    sink: &str,
    claimed: &[String],
) -> Result<Evidence, VerifierError> {
    let f = function(prog, fname)?;
    let mut out = Scan { found: false, literals: Vec::new(), non_literal: Vec::new() };
    if f.params.iter().any(|p| p == sink) {
        out.found = true;
        out.non_literal.push(site(f.span, format!("parameter {sink}")));
    }
    f.visit_stmts(&mut |s| scan(s, sink, &mut out));
    if !out.found {
        return Err(VerifierError::SinkNotFound { function: fname.to_string(), sink: sink.to_string() });
    }
    let claimed_set: BTreeSet<&str> = claimed.iter().map(String::as_str).collect();
    let inventory: BTreeSet<String> = out.literals.iter().map(|(l, _)| l.clone()).collect();
    let witness =
        out.literals.iter().find(|(l, _)| !claimed_set.contains(l.as_str())).map(|(l, span)| site(*span, l.clone()));
    let status = match (&witness, out.non_literal.is_empty()) {
        (Some(_), _) => EvidenceStatus::Refuted,
        (None, false) => EvidenceStatus::Unknown,
        (None, true) => EvidenceStatus::Verified,
    };
    let summary = match (&witness, status) {
        (Some(w), _) => {
            format!("{sink} may receive {} (line {}), which is not claimed", crate::text::quote(&w.text), w.line)
        }
        (None, EvidenceStatus::Unknown) => {
            format!(
                "{} non-literal write(s) to {sink}, first at line {}",
                out.non_literal.len(),
                out.non_literal[0].line
            )
        }
        _ => format!("{sink} only ever holds {} claimed literal(s)", inventory.len()),
    };
    Ok(Evidence {
        claim_id: String::new(),
        verifier: "string-inventory".into(),
        status,
        summary,
        details: EvidenceDetails::StringInventory {
            function: fname.to_string(),
            sink: sink.to_string(),
            inventory: inventory.into_iter().collect(),
            claimed: claimed.to_vec(),
            non_literal: out.non_literal,
            witness,
        },
        subject_hash: prog.source_hash.clone(),
    })
}

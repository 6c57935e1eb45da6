use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Formula, Signature, Sort, Term};
use crate::text::normalize_ws;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    UndeclaredSymbol,
    UndeclaredSort,
    SortMismatch,
    ArityMismatch,
    FreeVariable,
    EmptySet,
    DuplicateMember,
    UnnormalizedText,
    DegenerateConnective,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    pub(crate) fn new(kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Diagnostic { kind, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Sort of a term as far as checking is concerned. Numerals fit either
/// numeric sort.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum TermSort {
    Known(Sort),
    Numeral,
}

impl TermSort {
    pub(crate) fn is_numeric(&self) -> bool {
        match self {
            TermSort::Numeral => true,
            TermSort::Known(s) => s.is_numeric(),
        }
    }

    pub(crate) fn fits(&self, expected: &Sort) -> bool {
        match self {
            TermSort::Numeral => expected.is_numeric(),
            TermSort::Known(s) => s == expected,
        }
    }

    pub(crate) fn compatible(&self, other: &TermSort) -> bool {
        match (self, other) {
            (TermSort::Known(a), TermSort::Known(b)) => a == b,
            (a, b) => a.is_numeric() && b.is_numeric(),
        }
    }
}

impl fmt::Display for TermSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermSort::Known(s) => write!(f, "{s}"),
            TermSort::Numeral => f.write_str("numeral"),
        }
    }
}

/// Checks an application of `name` to arguments of the given sorts.
pub(crate) fn check_apply(sig: &Signature, name: &str, args: &[TermSort]) -> Result<TermSort, Diagnostic> {
    let Some(fsig) = sig.functions.get(name) else {
        let kind = DiagnosticKind::UndeclaredSymbol;
        return Err(if sig.predicates.contains_key(name) {
            Diagnostic::new(kind, format!("predicate `{name}` used as a term"))
        } else {
            Diagnostic::new(kind, format!("undeclared function `{name}`"))
        });
    };
    check_args(name, &fsig.args, args)?;
    Ok(TermSort::Known(fsig.result.clone()))
}

pub(crate) fn check_pred(sig: &Signature, name: &str, args: &[TermSort]) -> Result<(), Diagnostic> {
    let Some(expected) = sig.predicates.get(name) else {
        let kind = DiagnosticKind::UndeclaredSymbol;
        return Err(if sig.functions.contains_key(name) {
            Diagnostic::new(kind, format!("function `{name}` used as a predicate"))
        } else {
            Diagnostic::new(kind, format!("undeclared predicate `{name}`"))
        });
    };
    check_args(name, expected, args)
}

fn check_args(name: &str, expected: &[Sort], got: &[TermSort]) -> Result<(), Diagnostic> {
    if expected.len() != got.len() {
        return Err(Diagnostic::new(
            DiagnosticKind::ArityMismatch,
            format!("`{name}` expects {} argument(s), got {}", expected.len(), got.len()),
        ));
    }
    for (i, (e, g)) in expected.iter().zip(got).enumerate() {
        if !g.fits(e) {
            return Err(Diagnostic::new(
                DiagnosticKind::SortMismatch,
                format!("argument {} of `{name}` has sort {g}, expected {e}", i + 1),
            ));
        }
    }
    Ok(())
}

pub(crate) fn check_arith(a: &TermSort, b: &TermSort, op: &str) -> Result<TermSort, Diagnostic> {
    if !a.is_numeric() || !b.is_numeric() {
        return Err(Diagnostic::new(
            DiagnosticKind::SortMismatch,
            format!("operands of `{op}` must be numeric, got {a} and {b}"),
        ));
    }
    Ok(match (a, b) {
        (TermSort::Numeral, TermSort::Numeral) => TermSort::Numeral,
        (TermSort::Known(Sort::Real), _) | (_, TermSort::Known(Sort::Real)) => TermSort::Known(Sort::Real),
        _ => TermSort::Known(Sort::Int),
    })
}

pub(crate) fn check_relation(a: &TermSort, b: &TermSort, op: &str) -> Result<(), Diagnostic> {
    let ok = if op == "==" { a.compatible(b) } else { a.is_numeric() && b.is_numeric() };
    if ok {
        Ok(())
    } else {
        Err(Diagnostic::new(DiagnosticKind::SortMismatch, format!("cannot compare {a} with {b} using `{op}`")))
    }
}

pub(crate) fn check_member_set(set: &[String]) -> Result<(), Diagnostic> {
    if set.is_empty() {
        return Err(Diagnostic::new(DiagnosticKind::EmptySet, "membership set is empty"));
    }
    let mut seen = BTreeSet::new();
    for s in set {
        if !seen.insert(s) {
            return Err(Diagnostic::new(
                DiagnosticKind::DuplicateMember,
                format!("membership set lists {} twice", crate::text::quote(s)),
            ));
        }
    }
    Ok(())
}

struct Checker<'a> {
    sig: &'a Signature,
    bound: Vec<(String, Sort)>,
    out: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn term(&mut self, t: &Term) -> Option<TermSort> {
        match t {
            Term::Var(name, sort) => {
                match self.bound.iter().rev().find(|(n, _)| n == name) {
                    None => {
                        self.out.push(Diagnostic::new(DiagnosticKind::FreeVariable, format!("free variable `{name}`")))
                    }
                    Some((_, s)) if s != sort => self.out.push(Diagnostic::new(
                        DiagnosticKind::SortMismatch,
                        format!("variable `{name}` is bound with sort {s} but used as {sort}"),
                    )),
                    Some(_) => {}
                }
                Some(TermSort::Known(sort.clone()))
            }
            Term::Num(_) => Some(TermSort::Numeral),
            Term::Str(_) => Some(TermSort::Known(Sort::Str)),
            Term::Apply(name, args) => {
                let sorts: Option<Vec<_>> = args.iter().map(|a| self.term(a)).collect();
                self.report(check_apply(self.sig, name, &sorts?))
            }
            Term::Arith(op, a, b) => {
                let (a, b) = (self.term(a), self.term(b));
                self.report(check_arith(&a?, &b?, op.symbol()))
            }
        }
    }

    fn report<T>(&mut self, r: Result<T, Diagnostic>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(d) => {
                self.out.push(d);
                None
            }
        }
    }

    fn formula(&mut self, phi: &Formula) {
        match phi {
            Formula::Pred(name, args) => {
                let sorts: Vec<_> = args.iter().map(|a| self.term(a)).collect();
                if let Some(sorts) = sorts.into_iter().collect::<Option<Vec<_>>>() {
                    self.report(check_pred(self.sig, name, &sorts));
                }
            }
            Formula::Equals(a, b) | Formula::Compare(_, a, b) => {
                let op = match phi {
                    Formula::Compare(op, ..) => op.symbol(),
                    _ => "==",
                };
                if let (Some(x), Some(y)) = (self.term(a), self.term(b)) {
                    self.report(check_relation(&x, &y, op));
                }
            }
            Formula::MemberOf(t, set) => {
                if let Some(s) = self.term(t) {
                    if !s.fits(&Sort::Str) {
                        self.out.push(Diagnostic::new(
                            DiagnosticKind::SortMismatch,
                            format!("membership test on a term of sort {s}, expected Str"),
                        ));
                    }
                }
                self.report(check_member_set(set));
            }
            Formula::Informal(text) => {
                if *text != normalize_ws(text) || text.is_empty() {
                    self.out.push(Diagnostic::new(
                        DiagnosticKind::UnnormalizedText,
                        format!("informal atom {} is not whitespace-normalized", crate::text::quote(text)),
                    ));
                }
            }
            Formula::And(xs) | Formula::Or(xs) => {
                if xs.len() < 2 {
                    self.out.push(Diagnostic::new(
                        DiagnosticKind::DegenerateConnective,
                        format!("connective with {} operand(s)", xs.len()),
                    ));
                }
                xs.iter().for_each(|x| self.formula(x));
            }
            Formula::Not(a) => self.formula(a),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                self.formula(a);
                self.formula(b);
            }
            Formula::Forall(v, s, body) | Formula::Exists(v, s, body) => {
                if let Sort::Named(n) = s {
                    if !self.sig.sorts.contains(n) {
                        self.out.push(Diagnostic::new(
                            DiagnosticKind::UndeclaredSort,
                            format!("undeclared sort `{n}` for variable `{v}`"),
                        ));
                    }
                }
                self.bound.push((v.clone(), s.clone()));
                self.formula(body);
                self.bound.pop();
            }
            Formula::True | Formula::False => {}
        }
    }
}

/// All problems with `phi` over `sig`; empty means well-formed and closed.
pub fn well_formed(sig: &Signature, phi: &Formula) -> Vec<Diagnostic> {
    let mut c = Checker { sig, bound: Vec::new(), out: Vec::new() };
    c.formula(phi);
    c.out
}

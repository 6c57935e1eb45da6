//! SMT-LIB 2 emission for decomposition inferences.
//!
//! User symbols are prefixed by kind (`S_` sorts, `f_` functions, `p_`
//! predicates, `v_` variables) so they never collide with SMT-LIB reserved
//! words. `Str` is an uninterpreted sort whose literals are pairwise
//! distinct constants `lit_i`; informal atoms are Boolean constants
//! `inf_i`. Both are numbered in lexicographic order of their text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::logic::{ArithOp, Formula, Signature, Sort, Term};
use crate::rational::Rational;

pub const SMT_HEADER: &str = "; avc-smt v1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmtError {
    #[error("unsupported construct: {0}")]
    Unsupported(String),
}

fn sort_name(s: &Sort) -> String {
    match s {
        Sort::Bool => "Bool".into(),
        Sort::Int => "Int".into(),
        Sort::Real => "Real".into(),
        Sort::Str => "Str".into(),
        Sort::Named(n) => format!("S_{n}"),
    }
}

/// Arithmetic context for numeral emission.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Num {
    Int,
    Real,
}

struct Emitter<'a> {
    sig: &'a Signature,
    literals: BTreeMap<String, usize>,
    informal: BTreeMap<String, usize>,
}

impl Emitter<'_> {
    /// `None` for numerals, which adapt to their context.
    fn sort_of(&self, t: &Term) -> Result<Option<Sort>, SmtError> {
        Ok(match t {
            Term::Var(_, s) => Some(s.clone()),
            Term::Num(_) => None,
            Term::Str(_) => Some(Sort::Str),
            Term::Apply(name, _) => Some(
                self.sig
                    .functions
                    .get(name)
                    .ok_or_else(|| SmtError::Unsupported(format!("undeclared function `{name}`")))?
                    .result
                    .clone(),
            ),
            Term::Arith(_, a, b) => match (self.sort_of(a)?, self.sort_of(b)?) {
                (Some(Sort::Real), _) | (_, Some(Sort::Real)) => Some(Sort::Real),
                (Some(s), _) | (_, Some(s)) => Some(s),
                (None, None) => None,
            },
        })
    }

    fn has_fraction(t: &Term) -> bool {
        match t {
            Term::Num(n) => !n.is_integer(),
            Term::Arith(_, a, b) => Self::has_fraction(a) || Self::has_fraction(b),
            _ => false,
        }
    }

    /// Context for a relation or application slot mixing `terms`.
    fn context(&self, terms: &[&Term]) -> Result<Num, SmtError> {
        let mut real = false;
        for t in terms {
            real |= matches!(self.sort_of(t)?, Some(Sort::Real)) || Self::has_fraction(t);
        }
        Ok(if real { Num::Real } else { Num::Int })
    }

    fn numeral(n: &Rational, ctx: Num) -> String {
        let neg = n.is_negative();
        let abs = if neg { -n } else { n.clone() };
        let body = match ctx {
            Num::Int => abs.to_string(),
            Num::Real if abs.is_integer() => format!("{abs}.0"),
            Num::Real if abs.is_decimal() => abs.to_string(),
            Num::Real => format!("(/ {}.0 {}.0)", abs.numer(), abs.denom()),
        };
        if neg {
            format!("(- {body})")
        } else {
            body
        }
    }

    fn term(&self, t: &Term, ctx: Option<Num>) -> Result<String, SmtError> {
        let coerce = |s: String, sort: Option<Sort>| match (ctx, sort) {
            (Some(Num::Real), Some(Sort::Int)) => format!("(to_real {s})"),
            _ => s,
        };
        Ok(match t {
            Term::Var(name, sort) => coerce(format!("v_{name}"), Some(sort.clone())),
            Term::Num(n) => Self::numeral(n, ctx.unwrap_or(Num::Int)),
            Term::Str(s) => format!("lit_{}", self.literals[s]),
            Term::Apply(name, args) => {
                let fsig = &self.sig.functions[name];
                let s = if args.is_empty() {
                    format!("f_{name}")
                } else {
                    format!("(f_{name} {})", self.args(args, &fsig.args)?)
                };
                coerce(s, Some(fsig.result.clone()))
            }
            Term::Arith(op, a, b) => {
                let inner = match ctx {
                    Some(c) => c,
                    None => self.context(&[a, b])?,
                };
                let sym = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                };
                format!("({sym} {} {})", self.term(a, Some(inner))?, self.term(b, Some(inner))?)
            }
        })
    }

    fn args(&self, args: &[Term], sorts: &[Sort]) -> Result<String, SmtError> {
        let mut parts = Vec::with_capacity(args.len());
        for (a, s) in args.iter().zip(sorts) {
            let ctx = match s {
                Sort::Int => Some(Num::Int),
                Sort::Real => Some(Num::Real),
                _ => None,
            };
            parts.push(self.term(a, ctx)?);
        }
        Ok(parts.join(" "))
    }

    fn formula(&self, phi: &Formula) -> Result<String, SmtError> {
        Ok(match phi {
            Formula::True => "true".into(),
            Formula::False => "false".into(),
            Formula::Informal(text) => format!("inf_{}", self.informal[text]),
            Formula::Pred(name, args) => {
                let sorts = self
                    .sig
                    .predicates
                    .get(name)
                    .ok_or_else(|| SmtError::Unsupported(format!("undeclared predicate `{name}`")))?;
                if args.is_empty() {
                    format!("p_{name}")
                } else {
                    format!("(p_{name} {})", self.args(args, sorts)?)
                }
            }
            Formula::Equals(a, b) => {
                let numeric =
                    self.sort_of(a)?.is_none_or(|s| s.is_numeric()) && self.sort_of(b)?.is_none_or(|s| s.is_numeric());
                let ctx = if numeric { Some(self.context(&[a, b])?) } else { None };
                format!("(= {} {})", self.term(a, ctx)?, self.term(b, ctx)?)
            }
            Formula::Compare(op, a, b) => {
                let ctx = Some(self.context(&[a, b])?);
                format!("({} {} {})", op.symbol(), self.term(a, ctx)?, self.term(b, ctx)?)
            }
            Formula::MemberOf(t, set) => {
                let t = self.term(t, None)?;
                let eqs: Vec<String> = set.iter().map(|s| format!("(= {t} lit_{})", self.literals[s])).collect();
                if eqs.len() == 1 {
                    eqs.into_iter().next().unwrap()
                } else {
                    format!("(or {})", eqs.join(" "))
                }
            }
            Formula::Not(a) => format!("(not {})", self.formula(a)?),
            Formula::And(xs) | Formula::Or(xs) => {
                let (op, unit) = if matches!(phi, Formula::And(_)) { ("and", "true") } else { ("or", "false") };
                match xs.len() {
                    0 => unit.into(),
                    1 => self.formula(&xs[0])?,
                    _ => {
                        let parts: Result<Vec<_>, _> = xs.iter().map(|x| self.formula(x)).collect();
                        format!("({op} {})", parts?.join(" "))
                    }
                }
            }
            Formula::Implies(a, b) => format!("(=> {} {})", self.formula(a)?, self.formula(b)?),
            Formula::Iff(a, b) => format!("(= {} {})", self.formula(a)?, self.formula(b)?),
            Formula::Forall(v, s, body) | Formula::Exists(v, s, body) => {
                let q = if matches!(phi, Formula::Forall(..)) { "forall" } else { "exists" };
                format!("({q} ((v_{v} {})) {})", sort_name(s), self.formula(body)?)
            }
        })
    }
}

fn comment_text(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\n', "\\n").replace('\r', "\\r")
}

/// Script whose `check-sat` answers `unsat` exactly when the premises
/// entail the conclusion.
pub fn emit_smt(sig: &Signature, premises: &[Formula], conclusion: &Formula) -> Result<String, SmtError> {
    let all = premises.iter().chain(std::iter::once(conclusion));
    let mut literal_set: BTreeSet<String> = sig.string_literals.clone();
    let mut informal_set = BTreeSet::new();
    for phi in all {
        literal_set.extend(phi.string_literals());
        informal_set.extend(phi.informal_atoms());
    }
    let em = Emitter {
        sig,
        literals: literal_set.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect(),
        informal: informal_set.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect(),
    };

    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "{SMT_HEADER}").unwrap();
    writeln!(w, "(set-logic ALL)").unwrap();
    for s in &sig.sorts {
        writeln!(w, "(declare-sort S_{s} 0)").unwrap();
    }
    writeln!(w, "(declare-sort Str 0)").unwrap();
    for (name, f) in &sig.functions {
        let args: Vec<String> = f.args.iter().map(sort_name).collect();
        writeln!(w, "(declare-fun f_{name} ({}) {})", args.join(" "), sort_name(&f.result)).unwrap();
    }
    for (name, args) in &sig.predicates {
        let args: Vec<String> = args.iter().map(sort_name).collect();
        writeln!(w, "(declare-fun p_{name} ({}) Bool)", args.join(" ")).unwrap();
    }
    for (text, i) in &em.literals {
        writeln!(w, "(declare-const lit_{i} Str) ; \"{}\"", comment_text(text)).unwrap();
    }
    if em.literals.len() >= 2 {
        let names: Vec<String> = (0..em.literals.len()).map(|i| format!("lit_{i}")).collect();
        writeln!(w, "(assert (distinct {}))", names.join(" ")).unwrap();
    }
    for (text, i) in &em.informal {
        writeln!(w, "(declare-const inf_{i} Bool) ; \"{}\"", comment_text(text)).unwrap();
    }
    for (i, p) in premises.iter().enumerate() {
        writeln!(w, "; premise {}", i + 1).unwrap();
        writeln!(w, "(assert {})", em.formula(p)?).unwrap();
    }
    writeln!(w, "; negated conclusion").unwrap();
    writeln!(w, "(assert (not {}))", em.formula(conclusion)?).unwrap();
    writeln!(w, "(check-sat)").unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn sig() -> Signature {
        let mut sig = Signature::new();
        sig.declare_function("low", vec![], Sort::Real).unwrap();
        sig.declare_function("n", vec![], Sort::Int).unwrap();
        sig.declare_function("c", vec![], Sort::Str).unwrap();
        sig.declare_predicate("P", vec![Sort::Str]).unwrap();
        sig
    }

    #[test]
    fn trivial_conclusion_script() {
        let script = emit_smt(&Signature::new(), &[], &Formula::True).unwrap();
        assert_eq!(
            script,
            "; avc-smt v1\n(set-logic ALL)\n(declare-sort Str 0)\n; negated conclusion\n(assert (not true))\n(check-sat)\n"
        );
    }

    #[test]
    fn numerals_follow_context() {
        let sig = sig();
        let phi = parse_formula("low == 3 * 1.5 && n <= -2 && n * 2 <= low", &sig).unwrap();
        let script = emit_smt(&sig, &[], &phi).unwrap();
        assert!(script.contains("(= f_low (* 3.0 1.5))"), "{script}");
        assert!(script.contains("(<= f_n (- 2))"), "{script}");
        assert!(script.contains("(<= (* (to_real f_n) 2.0) f_low)"), "{script}");
    }

    #[test]
    fn literals_are_distinct_constants() {
        let sig = sig();
        let prem = parse_formula(r#"c in {"b", "a"}"#, &sig).unwrap();
        let concl = parse_formula(r#"P(c) || c == "a""#, &sig).unwrap();
        let script = emit_smt(&sig, &[prem], &concl).unwrap();
        assert!(script.contains("(declare-const lit_0 Str) ; \"a\""));
        assert!(script.contains("(assert (distinct lit_0 lit_1))"));
        assert!(script.contains("(assert (or (= f_c lit_1) (= f_c lit_0)))"), "{script}");
        assert!(script.contains("(assert (not (or (p_P f_c) (= f_c lit_0))))"), "{script}");
    }

    #[test]
    fn emission_is_deterministic() {
        let sig = sig();
        let phi = parse_formula(r#""x" && P("q") && "y""#, &sig).unwrap();
        let a = emit_smt(&sig, std::slice::from_ref(&phi), &Formula::False).unwrap();
        let b = emit_smt(&sig, &[phi], &Formula::False).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("(declare-const inf_1 Bool) ; \"y\""));
    }
}

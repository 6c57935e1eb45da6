//! Canonical pretty-printer; `parse_formula` inverts it.

use std::fmt::{self, Write};

use super::{ArithOp, Formula, Term};
use crate::text::quote;

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Arith(ArithOp::Add | ArithOp::Sub, ..) => 1,
        Term::Arith(ArithOp::Mul, ..) => 2,
        _ => 3,
    }
}

fn write_term(out: &mut impl Write, t: &Term) -> fmt::Result {
    match t {
        Term::Var(name, _) => out.write_str(name),
        Term::Num(n) => write!(out, "{n}"),
        Term::Str(s) => out.write_str(&quote(s)),
        Term::Apply(name, args) if args.is_empty() => out.write_str(name),
        Term::Apply(name, args) => {
            write!(out, "{name}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.write_str(", ")?;
                }
                write_term(out, a)?;
            }
            out.write_str(")")
        }
        Term::Arith(op, a, b) => {
            let p = term_prec(t);
            write_term_paren(out, a, term_prec(a) < p)?;
            write!(out, " {} ", op.symbol())?;
            write_term_paren(out, b, term_prec(b) <= p)
        }
    }
}

fn write_term_paren(out: &mut impl Write, t: &Term, paren: bool) -> fmt::Result {
    if paren {
        out.write_str("(")?;
        write_term(out, t)?;
        out.write_str(")")
    } else {
        write_term(out, t)
    }
}

// Binding strength; quantifiers bind loosest of all.
fn prec(phi: &Formula) -> u8 {
    match phi {
        Formula::Forall(..) | Formula::Exists(..) => 0,
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(xs) if xs.len() >= 2 => 3,
        Formula::And(xs) if xs.len() >= 2 => 4,
        Formula::Not(_) => 5,
        _ => 6,
    }
}

fn write_formula(out: &mut impl Write, phi: &Formula) -> fmt::Result {
    match phi {
        Formula::True => out.write_str("true"),
        Formula::False => out.write_str("false"),
        Formula::Informal(text) => out.write_str(&quote(text)),
        Formula::Pred(name, args) if args.is_empty() => out.write_str(name),
        Formula::Pred(name, args) => write_term(out, &Term::Apply(name.clone(), args.clone())),
        Formula::Equals(a, b) => {
            write_term(out, a)?;
            out.write_str(" == ")?;
            write_term(out, b)
        }
        Formula::Compare(op, a, b) => {
            write_term(out, a)?;
            write!(out, " {} ", op.symbol())?;
            write_term(out, b)
        }
        Formula::MemberOf(t, set) => {
            write_term(out, t)?;
            out.write_str(" in {")?;
            for (i, s) in set.iter().enumerate() {
                if i > 0 {
                    out.write_str(", ")?;
                }
                out.write_str(&quote(s))?;
            }
            out.write_str("}")
        }
        Formula::Not(a) => {
            out.write_str("!")?;
            paren(out, a, prec(a) < 5)
        }
        Formula::And(xs) | Formula::Or(xs) => {
            let (unit, sep) = match phi {
                Formula::And(_) => ("true", " && "),
                _ => ("false", " || "),
            };
            match xs.len() {
                0 => out.write_str(unit),
                1 => paren(out, &xs[0], true),
                _ => {
                    let p = prec(phi);
                    for (i, x) in xs.iter().enumerate() {
                        if i > 0 {
                            out.write_str(sep)?;
                        }
                        paren(out, x, prec(x) <= p)?;
                    }
                    Ok(())
                }
            }
        }
        Formula::Implies(a, b) => {
            paren(out, a, prec(a) <= 2)?;
            out.write_str(" -> ")?;
            paren(out, b, prec(b) < 2)
        }
        Formula::Iff(a, b) => {
            paren(out, a, prec(a) < 1)?;
            out.write_str(" <-> ")?;
            paren(out, b, prec(b) <= 1)
        }
        Formula::Forall(v, s, body) | Formula::Exists(v, s, body) => {
            let q = if matches!(phi, Formula::Forall(..)) { "forall" } else { "exists" };
            write!(out, "{q} {v}:{s}. ")?;
            write_formula(out, body)
        }
    }
}

fn paren(out: &mut impl Write, phi: &Formula, needed: bool) -> fmt::Result {
    if needed {
        out.write_str("(")?;
        write_formula(out, phi)?;
        out.write_str(")")
    } else {
        write_formula(out, phi)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self)
    }
}

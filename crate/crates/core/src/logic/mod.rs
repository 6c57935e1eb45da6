//! Many-sorted first-order statements with uninterpreted symbols and
//! informal atoms.
//!
//! Concrete syntax is documented in `docs/formula-grammar.md`
//! (`formula-grammar v1`).

mod atomize;
mod normalize;
mod parse;
mod print;
mod wf;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

pub use atomize::{atomize, AtomId, AtomTable, Prop};
pub use normalize::normalize;
pub(crate) use parse::FormulaParser;
pub use parse::{parse_formula, parse_term, FormulaError, FormulaErrorKind};
pub use wf::{well_formed, Diagnostic, DiagnosticKind};

pub const GRAMMAR_VERSION: &str = "formula-grammar v1";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum Sort {
    Bool,
    Int,
    Real,
    Str,
    Named(String),
}

impl Sort {
    /// Resolves a sort name; builtin names win over declared ones.
    pub fn from_name(name: &str) -> Sort {
        match name {
            "Bool" => Sort::Bool,
            "Int" => Sort::Int,
            "Real" => Sort::Real,
            "Str" => Sort::Str,
            other => Sort::Named(other.to_string()),
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Sort::Int | Sort::Real)
    }

    pub fn is_builtin_name(name: &str) -> bool {
        matches!(name, "Bool" | "Int" | "Real" | "Str")
    }
}

impl From<Sort> for String {
    fn from(s: Sort) -> String {
        s.to_string()
    }
}

impl From<String> for Sort {
    fn from(s: String) -> Sort {
        Sort::from_name(&s)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => f.write_str("Bool"),
            Sort::Int => f.write_str("Int"),
            Sort::Real => f.write_str("Real"),
            Sort::Str => f.write_str("Str"),
            Sort::Named(n) => f.write_str(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionSig {
    pub args: Vec<Sort>,
    pub result: Sort,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("symbol `{0}` is already declared")]
    Duplicate(String),
    #[error("sort `{0}` is not declared")]
    UndeclaredSort(String),
    #[error("`{0}` is a builtin sort")]
    BuiltinSort(String),
}

/// Declared vocabulary for claim statements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub sorts: BTreeSet<String>,
    pub functions: BTreeMap<String, FunctionSig>,
    pub predicates: BTreeMap<String, Vec<Sort>>,
    #[serde(rename = "stringLiterals")]
    pub string_literals: BTreeSet<String>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_sort(&mut self, name: &str) -> Result<(), SignatureError> {
        if Sort::is_builtin_name(name) {
            return Err(SignatureError::BuiltinSort(name.to_string()));
        }
        if !self.sorts.insert(name.to_string()) {
            return Err(SignatureError::Duplicate(name.to_string()));
        }
        Ok(())
    }

    pub fn declare_function(&mut self, name: &str, args: Vec<Sort>, result: Sort) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        for s in args.iter().chain(std::iter::once(&result)) {
            self.check_sort(s)?;
        }
        self.functions.insert(name.to_string(), FunctionSig { args, result });
        Ok(())
    }

    pub fn declare_predicate(&mut self, name: &str, args: Vec<Sort>) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        for s in &args {
            self.check_sort(s)?;
        }
        self.predicates.insert(name.to_string(), args);
        Ok(())
    }

    fn check_fresh(&self, name: &str) -> Result<(), SignatureError> {
        if self.functions.contains_key(name) || self.predicates.contains_key(name) {
            return Err(SignatureError::Duplicate(name.to_string()));
        }
        Ok(())
    }

    pub fn check_sort(&self, sort: &Sort) -> Result<(), SignatureError> {
        match sort {
            Sort::Named(n) if !self.sorts.contains(n) => Err(SignatureError::UndeclaredSort(n.clone())),
            _ => Ok(()),
        }
    }

    /// Adds every string literal mentioned by `phi`.
    pub fn absorb_literals(&mut self, phi: &Formula) {
        self.string_literals.extend(phi.string_literals());
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String, Sort),
    Num(Rational),
    Str(String),
    Apply(String, Vec<Term>),
    Arith(ArithOp, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: &str, sort: Sort) -> Term {
        Term::Var(name.to_string(), sort)
    }

    pub fn apply(name: &str, args: Vec<Term>) -> Term {
        Term::Apply(name.to_string(), args)
    }

    pub fn constant(name: &str) -> Term {
        Term::Apply(name.to_string(), Vec::new())
    }

    pub fn num(n: i64) -> Term {
        Term::Num(Rational::from_integer(n))
    }

    fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::Apply(_, args) => args.iter().for_each(|a| a.visit(f)),
            Term::Arith(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Le,
    Lt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    Pred(String, Vec<Term>),
    Equals(Term, Term),
    Compare(CmpOp, Term, Term),
    MemberOf(Term, Vec<String>),
    Informal(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Sort, Box<Formula>),
    Exists(String, Sort, Box<Formula>),
    True,
    False,
}

impl Formula {
    pub fn pred(name: &str, args: Vec<Term>) -> Formula {
        Formula::Pred(name.to_string(), args)
    }

    /// Informal atom with normalized text.
    pub fn informal(text: &str) -> Formula {
        Formula::Informal(crate::text::normalize_ws(text))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(var: &str, sort: Sort, body: Formula) -> Formula {
        Formula::Forall(var.to_string(), sort, Box::new(body))
    }

    pub fn exists(var: &str, sort: Sort, body: Formula) -> Formula {
        Formula::Exists(var.to_string(), sort, Box::new(body))
    }

    /// True for connectives that the propositional skeleton keeps.
    pub fn is_connective(&self) -> bool {
        matches!(
            self,
            Formula::Not(_)
                | Formula::And(_)
                | Formula::Or(_)
                | Formula::Implies(..)
                | Formula::Iff(..)
                | Formula::True
                | Formula::False
        )
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Not(a) | Formula::Forall(_, _, a) | Formula::Exists(_, _, a) => vec![a],
            Formula::And(xs) | Formula::Or(xs) => xs.iter().collect(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => vec![a, b],
            _ => Vec::new(),
        }
    }

    fn terms(&self) -> Vec<&Term> {
        match self {
            Formula::Pred(_, ts) => ts.iter().collect(),
            Formula::Equals(a, b) | Formula::Compare(_, a, b) => vec![a, b],
            Formula::MemberOf(t, _) => vec![t],
            _ => Vec::new(),
        }
    }

    /// Pre-order walk over subformulas.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn string_literals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |phi| {
            if let Formula::MemberOf(_, set) = phi {
                out.extend(set.iter().cloned());
            }
            for t in phi.terms() {
                t.visit(&mut |t| {
                    if let Term::Str(s) = t {
                        out.insert(s.clone());
                    }
                });
            }
        });
        out
    }

    pub fn informal_atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |phi| {
            if let Formula::Informal(t) = phi {
                out.insert(t.clone());
            }
        });
        out
    }

    pub fn has_informal(&self) -> bool {
        let mut found = false;
        self.visit(&mut |phi| found |= matches!(phi, Formula::Informal(_)));
        found
    }

    /// The literal set of the first membership atom, if any.
    pub fn member_set(&self) -> Option<&[String]> {
        let mut found = None;
        self.visit(&mut |phi| {
            if let (None, Formula::MemberOf(_, set)) = (&found, phi) {
                found = Some(set.as_slice());
            }
        });
        found
    }

    /// Names of 0-ary function symbols applied anywhere in the formula.
    pub fn constants_used(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |phi| {
            for t in phi.terms() {
                t.visit(&mut |t| {
                    if let Term::Apply(name, args) = t {
                        if args.is_empty() {
                            out.insert(name.clone());
                        }
                    }
                });
            }
        });
        out
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

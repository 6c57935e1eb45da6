//! The subject language (`sl v1`): a small indentation-structured
//! imperative language hosting the programs under review.

mod interp;
mod lex;
mod parse;
mod print;
mod value;

use std::collections::BTreeMap;
use std::fmt;

pub use interp::{interpret, Extern, ExternTable, RuntimeError, RuntimeErrorKind};
pub use parse::{parse_program, SlError, SlErrorKind};
pub use print::{print_expr, print_program};
pub use value::SlValue;

use crate::rational::Rational;

pub const SL_VERSION: &str = "sl v1";

/// Source position. Positions never take part in structural equality.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Literal {
    Num(Rational),
    Str(String),
    Bool(bool),
}

impl Literal {
    pub fn to_value(&self) -> SlValue {
        match self {
            Literal::Num(n) => SlValue::Num(n.clone()),
            Literal::Str(s) => SlValue::Str(s.clone()),
            Literal::Bool(b) => SlValue::Bool(*b),
        }
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Literal::Num(n) => Some(n),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    NotIn,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::In => "in",
            BinOp::NotIn => "not in",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::In | BinOp::NotIn => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Lit(Literal),
    Var(String),
    List(Vec<Expr>),
    Record(Vec<(String, Expr)>),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Builtin, extern or function call.
    Call(String, Vec<Expr>),
    Method(Box<Expr>, String, Vec<Expr>),
    /// Only as the predicate argument of `count_if`.
    Lambda(String, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn as_literal(&self) -> Option<Literal> {
        match &self.kind {
            ExprKind::Lit(l) => Some(l.clone()),
            ExprKind::Neg(e) => match e.as_literal()? {
                Literal::Num(n) => Some(Literal::Num(-&n)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Pre-order walk over subexpressions.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Lit(_) | ExprKind::Var(_) => {}
            ExprKind::List(xs) | ExprKind::Call(_, xs) => xs.iter().for_each(|x| x.visit(f)),
            ExprKind::Record(fs) => fs.iter().for_each(|(_, x)| x.visit(f)),
            ExprKind::Neg(e) | ExprKind::Not(e) | ExprKind::Lambda(_, e) => e.visit(f),
            ExprKind::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            ExprKind::Method(recv, _, args) => {
                recv.visit(f);
                args.iter().for_each(|x| x.visit(f));
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Set => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Assign { target: String, op: AssignOp, value: Expr, is_let: bool },
    If { branches: Vec<(Expr, Vec<Stmt>)>, otherwise: Option<Vec<Stmt>> },
    For { var: String, iter: Expr, body: Vec<Stmt> },
    Return(Expr),
    Expr(Expr),
    Pass,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

impl Stmt {
    /// Pre-order walk over this statement and nested ones.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::If { branches, otherwise } => {
                for (_, body) in branches {
                    body.iter().for_each(|s| s.visit(f));
                }
                if let Some(body) = otherwise {
                    body.iter().for_each(|s| s.visit(f));
                }
            }
            StmtKind::For { body, .. } => body.iter().for_each(|s| s.visit(f)),
            _ => {}
        }
    }

    /// Expressions owned directly by this statement.
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Assign { value, .. } => vec![value],
            StmtKind::If { branches, .. } => branches.iter().map(|(c, _)| c).collect(),
            StmtKind::For { iter, .. } => vec![iter],
            StmtKind::Return(e) | StmtKind::Expr(e) => vec![e],
            StmtKind::Pass => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstDecl {
    pub name: String,
    pub value: Literal,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternDecl {
    pub name: String,
    pub params: Vec<String>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

impl FunctionDef {
    pub fn visit_stmts<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        self.body.iter().for_each(|s| s.visit(f));
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubjectProgram {
    pub consts: Vec<ConstDecl>,
    pub externs: Vec<ExternDecl>,
    pub functions: Vec<FunctionDef>,
    /// SHA-256 of the source bytes.
    pub source_hash: String,
}

impl SubjectProgram {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn extern_decl(&self, name: &str) -> Option<&ExternDecl> {
        self.externs.iter().find(|e| e.name == name)
    }

    pub fn const_decl(&self, name: &str) -> Option<&ConstDecl> {
        self.consts.iter().find(|c| c.name == name)
    }

    /// Equality ignoring the source hash and positions.
    pub fn same_structure(&self, other: &SubjectProgram) -> bool {
        self.consts == other.consts && self.externs == other.externs && self.functions == other.functions
    }
}

/// Every binding, top-level or function-local, whose name is bound
/// exactly once in the whole program and always to a literal.
pub fn extract_constants(prog: &SubjectProgram) -> BTreeMap<String, Literal> {
    let mut bindings: BTreeMap<&str, Vec<Option<Literal>>> = BTreeMap::new();
    for c in &prog.consts {
        bindings.entry(&c.name).or_default().push(Some(c.value.clone()));
    }
    for f in &prog.functions {
        for p in &f.params {
            bindings.entry(p).or_default().push(None);
        }
        f.visit_stmts(&mut |s| match &s.kind {
            StmtKind::Assign { target, op, value, .. } => {
                let lit = if *op == AssignOp::Set { value.as_literal() } else { None };
                bindings.entry(target).or_default().push(lit);
            }
            StmtKind::For { var, .. } => bindings.entry(var).or_default().push(None),
            _ => {}
        });
    }
    bindings
        .into_iter()
        .filter_map(|(name, bs)| match bs.as_slice() {
            [Some(lit)] => Some((name.to_string(), lit.clone())),
            _ => None,
        })
        .collect()
}

/// True when every path through `body` ends in a `return`. Loop bodies
/// may run zero times, so they never count.
pub fn always_returns(body: &[Stmt]) -> bool {
    body.iter().any(|s| match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::If { branches, otherwise: Some(other) } => {
            branches.iter().all(|(_, b)| always_returns(b)) && always_returns(other)
        }
        _ => false,
    })
}

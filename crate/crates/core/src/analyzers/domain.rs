//! Abstract values and a flow-sensitive abstract evaluator for one
//! function body.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::rational::Rational;
use crate::subject::{AssignOp, BinOp, Expr, ExprKind, FunctionDef, Literal, Span, Stmt, StmtKind, SubjectProgram};
use crate::text::quote;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbstractValue {
    ExactNum(Rational),
    AnyNum,
    /// Value of a string literal expression.
    StrLits(BTreeSet<String>),
    AnyStr,
    ListOfStrLits(BTreeSet<String>, bool),
    RecordShape(BTreeMap<String, AbstractValue>),
    /// One of several literals, from joining branches.
    EnumStr(BTreeSet<String>),
    Top,
}

use AbstractValue::*;

impl AbstractValue {
    pub fn lit(s: &str) -> Self {
        StrLits(BTreeSet::from([s.to_string()]))
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, ExactNum(_) | AnyNum)
    }

    pub fn is_string(&self) -> bool {
        matches!(self, StrLits(_) | EnumStr(_) | AnyStr)
    }

    /// The finite set of strings this value may be, if known.
    pub fn str_set(&self) -> Option<&BTreeSet<String>> {
        match self {
            StrLits(s) | EnumStr(s) => Some(s),
            _ => None,
        }
    }

    pub fn join(&self, other: &AbstractValue) -> AbstractValue {
        match (self, other) {
            (Top, _) | (_, Top) => Top,
            (ExactNum(a), ExactNum(b)) if a == b => ExactNum(a.clone()),
            (a, b) if a.is_numeric() && b.is_numeric() => AnyNum,
            (StrLits(a), StrLits(b)) if a == b => StrLits(a.clone()),
            (StrLits(a) | EnumStr(a), StrLits(b) | EnumStr(b)) => EnumStr(a.union(b).cloned().collect()),
            (a, b) if a.is_string() && b.is_string() => AnyStr,
            (ListOfStrLits(a, u), ListOfStrLits(b, v)) => ListOfStrLits(a.union(b).cloned().collect(), *u || *v),
            (RecordShape(a), RecordShape(b)) if a.keys().eq(b.keys()) => {
                RecordShape(a.iter().map(|(k, v)| (k.clone(), v.join(&b[k]))).collect())
            }
            _ => Top,
        }
    }

    /// Abstract order: `a.leq(b)` when every value described by `a` is
    /// described by `b`.
    pub fn leq(&self, other: &AbstractValue) -> bool {
        match (self, other) {
            (_, Top) => true,
            (Top, _) => false,
            (ExactNum(a), ExactNum(b)) => a == b,
            (ExactNum(_) | AnyNum, AnyNum) => true,
            (StrLits(a) | EnumStr(a), StrLits(b) | EnumStr(b)) => a.is_subset(b),
            (StrLits(_) | EnumStr(_) | AnyStr, AnyStr) => true,
            (ListOfStrLits(a, u), ListOfStrLits(b, v)) => a.is_subset(b) && (!*u || *v),
            (RecordShape(a), RecordShape(b)) => a.keys().eq(b.keys()) && a.iter().all(|(k, x)| x.leq(&b[k])),
            _ => false,
        }
    }
}

fn set_text(s: &BTreeSet<String>) -> String {
    s.iter().map(|x| quote(x)).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for AbstractValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactNum(n) => write!(f, "{n}"),
            AnyNum => f.write_str("number"),
            StrLits(s) => write!(f, "{}", set_text(s)),
            AnyStr => f.write_str("string"),
            ListOfStrLits(s, unknown) => {
                write!(f, "list of {{{}}}", set_text(s))?;
                if *unknown {
                    f.write_str(" and unknown elements")?;
                }
                Ok(())
            }
            RecordShape(fields) => {
                f.write_str("{")?;
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}: {v}", quote(k))?;
                }
                f.write_str("}")
            }
            EnumStr(s) => write!(f, "one of {{{}}}", set_text(s)),
            Top => f.write_str("unknown"),
        }
    }
}

type Env = BTreeMap<String, AbstractValue>;

fn join_env(a: &Env, b: &Env) -> Env {
    let mut out = Env::new();
    for k in a.keys().chain(b.keys()) {
        let v = match (a.get(k), b.get(k)) {
            (Some(x), Some(y)) => x.join(y),
            _ => Top,
        };
        out.insert(k.clone(), v);
    }
    out
}

fn join_opt(a: Option<Env>, b: Option<Env>) -> Option<Env> {
    match (a, b) {
        (Some(a), Some(b)) => Some(join_env(&a, &b)),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Abstract value reaching each `return` of a function.
#[derive(Clone, Debug)]
pub struct ReturnSite {
    pub span: Span,
    pub value: AbstractValue,
}

const MAX_LOOP_ROUNDS: usize = 64;

pub struct Evaluator<'a> {
    prog: &'a SubjectProgram,
    returns: Vec<ReturnSite>,
}

impl<'a> Evaluator<'a> {
    pub fn returns_of(prog: &'a SubjectProgram, f: &FunctionDef) -> Vec<ReturnSite> {
        let mut ev = Evaluator { prog, returns: Vec::new() };
        let env: Env = f.params.iter().map(|p| (p.clone(), Top)).collect();
        ev.block(&f.body, Some(env));
        let mut out: Vec<ReturnSite> = Vec::new();
        // Loop iterations revisit return sites; keep the join per site.
        for r in ev.returns {
            match out.iter_mut().find(|s| (s.span.line, s.span.col) == (r.span.line, r.span.col)) {
                Some(s) => s.value = s.value.join(&r.value),
                None => out.push(r),
            }
        }
        out
    }

    fn block(&mut self, body: &[Stmt], mut env: Option<Env>) -> Option<Env> {
        for s in body {
            let e = env?;
            env = self.stmt(s, e);
        }
        env
    }

    fn stmt(&mut self, s: &Stmt, mut env: Env) -> Option<Env> {
        match &s.kind {
            StmtKind::Assign { target, op, value, .. } => {
                let v = self.eval(value, &env);
                let v = match op {
                    AssignOp::Set => v,
                    _ => {
                        let cur = env.get(target).cloned().unwrap_or(Top);
                        arith(if *op == AssignOp::Add { BinOp::Add } else { BinOp::Sub }, &cur, &v)
                    }
                };
                env.insert(target.clone(), v);
                Some(env)
            }
            StmtKind::If { branches, otherwise } => {
                let mut out = None;
                for (_, body) in branches {
                    out = join_opt(out, self.block(body, Some(env.clone())));
                }
                let rest = match otherwise {
                    Some(body) => self.block(body, Some(env)),
                    None => Some(env),
                };
                join_opt(out, rest)
            }
            StmtKind::For { var, iter, body } => {
                let elem = match self.eval(iter, &env) {
                    ListOfStrLits(s, false) if !s.is_empty() => EnumStr(s),
                    _ => Top,
                };
                let mut head = env;
                for round in 0.. {
                    let mut entry = head.clone();
                    entry.insert(var.clone(), elem.clone());
                    let Some(after) = self.block(body, Some(entry)) else { break };
                    let next = join_env(&head, &after);
                    if next == head {
                        break;
                    }
                    head = if round >= MAX_LOOP_ROUNDS { widen(&head, next) } else { next };
                }
                Some(head)
            }
            StmtKind::Return(e) => {
                let value = self.eval(e, &env);
                self.returns.push(ReturnSite { span: s.span, value });
                None
            }
            StmtKind::Expr(e) => {
                if let ExprKind::Method(recv, name, args) = &e.kind {
                    if let (ExprKind::Var(v), "append", [arg]) = (&recv.kind, name.as_str(), args.as_slice()) {
                        let item = self.eval(arg, &env);
                        let list = match env.get(v) {
                            Some(ListOfStrLits(set, unknown)) => match item.str_set() {
                                Some(lits) => ListOfStrLits(set.union(lits).cloned().collect(), *unknown),
                                None => ListOfStrLits(set.clone(), true),
                            },
                            _ => Top,
                        };
                        env.insert(v.clone(), list);
                    }
                }
                Some(env)
            }
            StmtKind::Pass => Some(env),
        }
    }

    pub fn eval(&self, e: &Expr, env: &Env) -> AbstractValue {
        match &e.kind {
            ExprKind::Lit(Literal::Num(n)) => ExactNum(n.clone()),
            ExprKind::Lit(Literal::Str(s)) => AbstractValue::lit(s),
            ExprKind::Lit(Literal::Bool(_)) => Top,
            ExprKind::Var(v) => match (env.get(v), self.prog.const_decl(v)) {
                (Some(x), _) => x.clone(),
                (None, Some(c)) => match &c.value {
                    Literal::Num(n) => ExactNum(n.clone()),
                    Literal::Str(s) => AbstractValue::lit(s),
                    Literal::Bool(_) => Top,
                },
                _ => Top,
            },
            ExprKind::List(xs) => {
                let mut set = BTreeSet::new();
                let mut unknown = false;
                for x in xs {
                    match self.eval(x, env).str_set() {
                        Some(s) => set.extend(s.iter().cloned()),
                        None => unknown = true,
                    }
                }
                ListOfStrLits(set, unknown)
            }
            ExprKind::Record(fs) => RecordShape(fs.iter().map(|(k, x)| (k.clone(), self.eval(x, env))).collect()),
            ExprKind::Neg(x) => match self.eval(x, env) {
                ExactNum(n) => ExactNum(-&n),
                _ => AnyNum,
            },
            ExprKind::Bin(op @ (BinOp::Add | BinOp::Sub | BinOp::Mul), a, b) => {
                arith(*op, &self.eval(a, env), &self.eval(b, env))
            }
            ExprKind::Bin(..) | ExprKind::Not(_) | ExprKind::Lambda(..) => Top,
            ExprKind::Call(name, args) => {
                let vals: Vec<AbstractValue> = args.iter().map(|a| self.eval(a, env)).collect();
                match name.as_str() {
                    "len" | "count_if" => AnyNum,
                    "min" | "max" => {
                        let exact: Option<Vec<Rational>> = vals
                            .iter()
                            .map(|v| match v {
                                ExactNum(n) => Some(n.clone()),
                                _ => None,
                            })
                            .collect();
                        match exact {
                            Some(ns) if !ns.is_empty() => ExactNum(
                                ns.into_iter().reduce(|a, b| if name == "min" { a.min(b) } else { a.max(b) }).unwrap(),
                            ),
                            _ => AnyNum,
                        }
                    }
                    "round" => match (vals.first(), vals.get(1)) {
                        (Some(ExactNum(n)), Some(ExactNum(d))) if d.is_integer() && !d.is_negative() => {
                            match d.to_i64().filter(|d| *d <= 30) {
                                Some(d) => ExactNum(n.round_to(d as u32)),
                                None => AnyNum,
                            }
                        }
                        (Some(ExactNum(n)), None) => ExactNum(n.round_to(0)),
                        _ => AnyNum,
                    },
                    _ => Top,
                }
            }
            ExprKind::Method(recv, name, args) => match (self.eval(recv, env), name.as_str(), args.as_slice()) {
                (RecordShape(fields), "get", [key, rest @ ..]) => {
                    let field = match &key.kind {
                        ExprKind::Lit(Literal::Str(k)) => fields.get(k).cloned(),
                        _ => None,
                    };
                    match (field, rest) {
                        (Some(v), _) => v,
                        _ => Top,
                    }
                }
                _ => Top,
            },
        }
    }
}

fn widen(old: &Env, new: Env) -> Env {
    new.into_iter().map(|(k, v)| if old.get(&k) == Some(&v) { (k, v) } else { (k, Top) }).collect()
}

fn arith(op: BinOp, a: &AbstractValue, b: &AbstractValue) -> AbstractValue {
    match (a, b) {
        (ExactNum(x), ExactNum(y)) => ExactNum(match op {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            _ => x * y,
        }),
        _ => AnyNum,
    }
}

//! Big-step reference interpreter.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::value::SlValue;
use super::{AssignOp, BinOp, Expr, ExprKind, FunctionDef, Span, Stmt, StmtKind, SubjectProgram};
use crate::rational::Rational;

/// Host implementation of an `extern` declaration.
pub type Extern = Box<dyn Fn(&[SlValue]) -> Result<SlValue, String> + Send + Sync>;
pub type ExternTable = BTreeMap<String, Extern>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuntimeErrorKind {
    Type,
    MissingField,
    UndefinedVariable,
    UnknownFunction,
    Arity,
    MissingExtern,
    Extern,
    Depth,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub span: Span,
    pub message: String,
}

type RResult<T> = Result<T, RuntimeError>;

const MAX_DEPTH: usize = 200;

fn err<T>(kind: RuntimeErrorKind, span: Span, message: impl Into<String>) -> RResult<T> {
    Err(RuntimeError { kind, span, message: message.into() })
}

fn type_err<T>(span: Span, message: impl Into<String>) -> RResult<T> {
    err(RuntimeErrorKind::Type, span, message)
}

/// Calls `function` with `args`. Extern calls go to `externs`, which must
/// cover every extern the program declares.
pub fn interpret(prog: &SubjectProgram, function: &str, args: Vec<SlValue>, externs: &ExternTable) -> RResult<SlValue> {
    for e in &prog.externs {
        if !externs.contains_key(&e.name) {
            return err(RuntimeErrorKind::MissingExtern, e.span, format!("no host callback for extern `{}`", e.name));
        }
    }
    let Some(f) = prog.function(function) else {
        return err(RuntimeErrorKind::UnknownFunction, Span::default(), format!("no function `{function}`"));
    };
    let m = Machine { prog, externs, depth: 0 };
    m.call(f, args, Span::default())
}

struct Machine<'a> {
    prog: &'a SubjectProgram,
    externs: &'a ExternTable,
    depth: usize,
}

type Env = HashMap<String, SlValue>;

impl Machine<'_> {
    fn call(&self, f: &FunctionDef, args: Vec<SlValue>, span: Span) -> RResult<SlValue> {
        if args.len() != f.params.len() {
            return err(
                RuntimeErrorKind::Arity,
                span,
                format!("`{}` takes {} arguments, got {}", f.name, f.params.len(), args.len()),
            );
        }
        if self.depth >= MAX_DEPTH {
            return err(RuntimeErrorKind::Depth, span, "call depth limit exceeded");
        }
        let inner = Machine { prog: self.prog, externs: self.externs, depth: self.depth + 1 };
        let mut env: Env = f.params.iter().cloned().zip(args).collect();
        match inner.block(&f.body, &mut env)? {
            Some(v) => Ok(v),
            None => err(RuntimeErrorKind::Type, f.span, format!("`{}` finished without returning", f.name)),
        }
    }

    fn block(&self, body: &[Stmt], env: &mut Env) -> RResult<Option<SlValue>> {
        for s in body {
            if let Some(v) = self.stmt(s, env)? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    fn truth(&self, e: &Expr, env: &Env) -> RResult<bool> {
        match self.eval(e, env)? {
            SlValue::Bool(b) => Ok(b),
            other => type_err(e.span, format!("condition is a {}, not a bool", other.type_name())),
        }
    }

    fn stmt(&self, s: &Stmt, env: &mut Env) -> RResult<Option<SlValue>> {
        match &s.kind {
            StmtKind::Assign { target, op, value, .. } => {
                let v = self.eval(value, env)?;
                let v = match op {
                    AssignOp::Set => v,
                    AssignOp::Add | AssignOp::Sub => {
                        let cur = self.lookup(target, env, s.span)?;
                        let bop = if *op == AssignOp::Add { BinOp::Add } else { BinOp::Sub };
                        arith(bop, &cur, &v, s.span)?
                    }
                };
                env.insert(target.clone(), v);
                Ok(None)
            }
            StmtKind::If { branches, otherwise } => {
                for (cond, body) in branches {
                    if self.truth(cond, env)? {
                        return self.block(body, env);
                    }
                }
                match otherwise {
                    Some(body) => self.block(body, env),
                    None => Ok(None),
                }
            }
            StmtKind::For { var, iter, body } => {
                let items: Vec<SlValue> = match self.eval(iter, env)? {
                    SlValue::List(xs) => xs,
                    SlValue::Set(xs) => xs.into_iter().collect(),
                    other => return type_err(iter.span, format!("cannot iterate over a {}", other.type_name())),
                };
                for item in items {
                    env.insert(var.clone(), item);
                    if let Some(v) = self.block(body, env)? {
                        return Ok(Some(v));
                    }
                }
                Ok(None)
            }
            StmtKind::Return(e) => Ok(Some(self.eval(e, env)?)),
            StmtKind::Expr(e) => {
                if let ExprKind::Method(recv, name, args) = &e.kind {
                    if name == "append" {
                        return self.append(recv, args, env, e.span).map(|_| None);
                    }
                }
                self.eval(e, env)?;
                Ok(None)
            }
            StmtKind::Pass => Ok(None),
        }
    }

    fn append(&self, recv: &Expr, args: &[Expr], env: &mut Env, span: Span) -> RResult<()> {
        let ExprKind::Var(name) = &recv.kind else {
            return type_err(span, "`append` needs a list variable as receiver");
        };
        let [arg] = args else {
            return err(RuntimeErrorKind::Arity, span, "`append` takes 1 argument");
        };
        let v = self.eval(arg, env)?;
        match env.get_mut(name) {
            Some(SlValue::List(xs)) => {
                xs.push(v);
                Ok(())
            }
            Some(other) => type_err(span, format!("cannot append to a {}", other.type_name())),
            None => err(RuntimeErrorKind::UndefinedVariable, recv.span, format!("undefined variable `{name}`")),
        }
    }

    fn lookup(&self, name: &str, env: &Env, span: Span) -> RResult<SlValue> {
        if let Some(v) = env.get(name) {
            return Ok(v.clone());
        }
        if let Some(c) = self.prog.const_decl(name) {
            return Ok(c.value.to_value());
        }
        err(RuntimeErrorKind::UndefinedVariable, span, format!("undefined variable `{name}`"))
    }

    fn eval(&self, e: &Expr, env: &Env) -> RResult<SlValue> {
        match &e.kind {
            ExprKind::Lit(l) => Ok(l.to_value()),
            ExprKind::Var(v) => self.lookup(v, env, e.span),
            ExprKind::List(xs) => Ok(SlValue::List(xs.iter().map(|x| self.eval(x, env)).collect::<RResult<_>>()?)),
            ExprKind::Record(fs) => {
                let mut out = BTreeMap::new();
                for (k, x) in fs {
                    out.insert(k.clone(), self.eval(x, env)?);
                }
                Ok(SlValue::Record(out))
            }
            ExprKind::Neg(x) => match self.eval(x, env)? {
                SlValue::Num(n) => Ok(SlValue::Num(-&n)),
                other => type_err(e.span, format!("cannot negate a {}", other.type_name())),
            },
            ExprKind::Not(x) => Ok(SlValue::Bool(!self.truth(x, env)?)),
            ExprKind::Bin(BinOp::And, a, b) => Ok(SlValue::Bool(self.truth(a, env)? && self.truth(b, env)?)),
            ExprKind::Bin(BinOp::Or, a, b) => Ok(SlValue::Bool(self.truth(a, env)? || self.truth(b, env)?)),
            ExprKind::Bin(op, a, b) => {
                let (a, b) = (self.eval(a, env)?, self.eval(b, env)?);
                binary(*op, &a, &b, e.span)
            }
            ExprKind::Call(name, args) => self.call_named(name, args, env, e.span),
            ExprKind::Method(recv, name, args) => {
                let r = self.eval(recv, env)?;
                match (name.as_str(), &r) {
                    ("get", SlValue::Record(fields)) => {
                        let (key, default) = match args.as_slice() {
                            [k] => (k, None),
                            [k, d] => (k, Some(d)),
                            _ => return err(RuntimeErrorKind::Arity, e.span, "`get` takes 1 or 2 arguments"),
                        };
                        let SlValue::Str(key) = self.eval(key, env)? else {
                            return type_err(e.span, "record keys are strings");
                        };
                        match (fields.get(&key), default) {
                            (Some(v), _) => Ok(v.clone()),
                            (None, Some(d)) => self.eval(d, env),
                            (None, None) => {
                                err(RuntimeErrorKind::MissingField, e.span, format!("missing field \"{key}\""))
                            }
                        }
                    }
                    ("append", _) => type_err(e.span, "`append` is a statement, not an expression"),
                    _ => type_err(e.span, format!("a {} has no method `{name}`", r.type_name())),
                }
            }
            ExprKind::Lambda(..) => type_err(e.span, "lambda outside `count_if`"),
        }
    }

    fn nums(&self, args: &[Expr], env: &Env, span: Span, name: &str) -> RResult<Vec<Rational>> {
        let vals: Vec<SlValue> = args.iter().map(|a| self.eval(a, env)).collect::<RResult<_>>()?;
        let vals = match vals.as_slice() {
            [SlValue::List(xs)] => xs.clone(),
            _ => vals,
        };
        if vals.is_empty() {
            return err(RuntimeErrorKind::Arity, span, format!("`{name}` needs at least one value"));
        }
        vals.into_iter()
            .map(|v| match v {
                SlValue::Num(n) => Ok(n),
                other => type_err(span, format!("`{name}` expects numbers, got a {}", other.type_name())),
            })
            .collect()
    }

    fn call_named(&self, name: &str, args: &[Expr], env: &Env, span: Span) -> RResult<SlValue> {
        let arity = |n: usize| -> RResult<()> {
            if args.len() == n {
                Ok(())
            } else {
                err(RuntimeErrorKind::Arity, span, format!("`{name}` takes {n} argument(s)"))
            }
        };
        match name {
            "len" => {
                arity(1)?;
                let n = match self.eval(&args[0], env)? {
                    SlValue::List(xs) => xs.len(),
                    SlValue::Set(xs) => xs.len(),
                    SlValue::Record(fs) => fs.len(),
                    SlValue::Str(s) => s.chars().count(),
                    other => return type_err(span, format!("a {} has no length", other.type_name())),
                };
                Ok(SlValue::num(n as i64))
            }
            "min" | "max" => {
                let ns = self.nums(args, env, span, name)?;
                let pick = ns.into_iter().reduce(|a, b| if name == "min" { a.min(b) } else { a.max(b) });
                Ok(SlValue::Num(pick.expect("nonempty")))
            }
            "round" => {
                let (x, digits) = match args {
                    [x] => (x, 0),
                    [x, d] => match self.eval(d, env)? {
                        SlValue::Num(n)
                            if n.is_integer() && !n.is_negative() && n.to_i64().is_some_and(|d| d <= 30) =>
                        {
                            (x, n.to_i64().unwrap() as u32)
                        }
                        _ => return type_err(span, "`round` digits must be a small non-negative integer"),
                    },
                    _ => return err(RuntimeErrorKind::Arity, span, "`round` takes 1 or 2 arguments"),
                };
                match self.eval(x, env)? {
                    SlValue::Num(n) => Ok(SlValue::Num(n.round_to(digits))),
                    other => type_err(span, format!("cannot round a {}", other.type_name())),
                }
            }
            "count_if" => {
                arity(2)?;
                let ExprKind::Lambda(var, body) = &args[1].kind else {
                    return type_err(args[1].span, "`count_if` expects `lambda v: ...` as second argument");
                };
                let items = match self.eval(&args[0], env)? {
                    SlValue::List(xs) => xs,
                    SlValue::Set(xs) => xs.into_iter().collect(),
                    other => return type_err(span, format!("cannot count over a {}", other.type_name())),
                };
                let mut scope = env.clone();
                let mut n = 0;
                for item in items {
                    scope.insert(var.clone(), item);
                    if self.truth(body, &scope)? {
                        n += 1;
                    }
                }
                Ok(SlValue::num(n))
            }
            "set" => {
                arity(1)?;
                let items = match self.eval(&args[0], env)? {
                    SlValue::List(xs) => xs,
                    SlValue::Set(xs) => return Ok(SlValue::Set(xs)),
                    other => return type_err(span, format!("cannot make a set from a {}", other.type_name())),
                };
                let mut out = BTreeSet::new();
                for x in items {
                    if !x.is_hashable() {
                        return type_err(span, format!("a {} cannot be a set element", x.type_name()));
                    }
                    out.insert(x);
                }
                Ok(SlValue::Set(out))
            }
            _ => {
                let vals: Vec<SlValue> = args.iter().map(|a| self.eval(a, env)).collect::<RResult<_>>()?;
                if let Some(decl) = self.prog.extern_decl(name) {
                    if vals.len() != decl.params.len() {
                        return err(
                            RuntimeErrorKind::Arity,
                            span,
                            format!("extern `{name}` takes {} arguments", decl.params.len()),
                        );
                    }
                    let host = self.externs.get(name).expect("checked on entry");
                    return host(&vals).map_err(|m| RuntimeError {
                        kind: RuntimeErrorKind::Extern,
                        span,
                        message: format!("extern `{name}` failed: {m}"),
                    });
                }
                match self.prog.function(name) {
                    Some(f) => self.call(f, vals, span),
                    None => err(RuntimeErrorKind::UnknownFunction, span, format!("unknown function `{name}`")),
                }
            }
        }
    }
}

fn arith(op: BinOp, a: &SlValue, b: &SlValue, span: Span) -> RResult<SlValue> {
    match (a, b) {
        (SlValue::Num(x), SlValue::Num(y)) => Ok(SlValue::Num(match op {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            _ => x * y,
        })),
        _ => type_err(span, format!("`{}` needs numbers, got {} and {}", op.symbol(), a.type_name(), b.type_name())),
    }
}

fn contains(container: &SlValue, needle: &SlValue, span: Span) -> RResult<bool> {
    match (container, needle) {
        (SlValue::List(xs), _) => Ok(xs.contains(needle)),
        (SlValue::Set(xs), _) => Ok(xs.contains(needle)),
        (SlValue::Record(fs), SlValue::Str(k)) => Ok(fs.contains_key(k)),
        (SlValue::Str(s), SlValue::Str(sub)) => Ok(s.contains(sub.as_str())),
        _ => {
            type_err(span, format!("cannot test membership of a {} in a {}", needle.type_name(), container.type_name()))
        }
    }
}

fn binary(op: BinOp, a: &SlValue, b: &SlValue, span: Span) -> RResult<SlValue> {
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul => arith(op, a, b, span),
        BinOp::Eq => Ok(SlValue::Bool(a == b)),
        BinOp::Ne => Ok(SlValue::Bool(a != b)),
        BinOp::In => Ok(SlValue::Bool(contains(b, a, span)?)),
        BinOp::NotIn => Ok(SlValue::Bool(!contains(b, a, span)?)),
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => match (a, b) {
            (SlValue::Num(x), SlValue::Num(y)) => Ok(SlValue::Bool(match op {
                BinOp::Lt => x < y,
                BinOp::Le => x <= y,
                BinOp::Gt => x > y,
                _ => x >= y,
            })),
            _ => type_err(span, format!("cannot order a {} and a {}", a.type_name(), b.type_name())),
        },
        BinOp::And | BinOp::Or => unreachable!("short-circuited by the caller"),
    }
}

use std::fmt::Write;

use super::{Expr, ExprKind, Literal, Stmt, StmtKind, SubjectProgram};
use crate::text::quote;

const NOT_PREC: u8 = 3;
const UNARY_PREC: u8 = 7;
const ATOM_PREC: u8 = 8;

fn literal(l: &Literal) -> String {
    match l {
        Literal::Num(n) => n.to_string(),
        Literal::Str(s) => quote(s),
        Literal::Bool(b) => b.to_string(),
    }
}

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Bin(op, ..) => op.precedence(),
        ExprKind::Not(_) => NOT_PREC,
        ExprKind::Neg(_) => UNARY_PREC,
        ExprKind::Lambda(..) => 0,
        _ => ATOM_PREC,
    }
}

fn wrap(e: &Expr, paren: bool) -> String {
    if paren {
        format!("({})", print_expr(e))
    } else {
        print_expr(e)
    }
}

fn list(xs: &[Expr]) -> String {
    xs.iter().map(print_expr).collect::<Vec<_>>().join(", ")
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Lit(l) => literal(l),
        ExprKind::Var(v) => v.clone(),
        ExprKind::List(xs) => format!("[{}]", list(xs)),
        ExprKind::Record(fs) => {
            let fields: Vec<String> = fs.iter().map(|(k, v)| format!("{}: {}", quote(k), print_expr(v))).collect();
            format!("{{{}}}", fields.join(", "))
        }
        ExprKind::Neg(x) => format!("-{}", wrap(x, prec(x) < UNARY_PREC)),
        ExprKind::Not(x) => format!("not {}", wrap(x, prec(x) < NOT_PREC)),
        ExprKind::Bin(op, a, b) => {
            let p = op.precedence();
            // Comparisons never chain, so an equal-precedence left operand
            // needs parentheses too.
            let left_paren = prec(a) < p || (p == 4 && prec(a) == 4);
            format!("{} {} {}", wrap(a, left_paren), op.symbol(), wrap(b, prec(b) <= p))
        }
        ExprKind::Call(name, args) => format!("{name}({})", list(args)),
        ExprKind::Method(recv, name, args) => {
            format!("{}.{name}({})", wrap(recv, prec(recv) < ATOM_PREC), list(args))
        }
        ExprKind::Lambda(v, body) => format!("lambda {v}: {}", print_expr(body)),
    }
}

fn block(out: &mut String, body: &[Stmt], depth: usize) {
    for s in body {
        stmt(out, s, depth);
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = "    ".repeat(depth);
    match &s.kind {
        StmtKind::Assign { target, op, value, is_let } => {
            let kw = if *is_let { "let " } else { "" };
            let _ = writeln!(out, "{pad}{kw}{target} {} {}", op.symbol(), print_expr(value));
        }
        StmtKind::If { branches, otherwise } => {
            for (i, (cond, body)) in branches.iter().enumerate() {
                let kw = if i == 0 { "if" } else { "elif" };
                let _ = writeln!(out, "{pad}{kw} {}:", print_expr(cond));
                block(out, body, depth + 1);
            }
            if let Some(body) = otherwise {
                let _ = writeln!(out, "{pad}else:");
                block(out, body, depth + 1);
            }
        }
        StmtKind::For { var, iter, body } => {
            let _ = writeln!(out, "{pad}for {var} in {}:", print_expr(iter));
            block(out, body, depth + 1);
        }
        StmtKind::Return(e) => {
            let _ = writeln!(out, "{pad}return {}", print_expr(e));
        }
        StmtKind::Expr(e) => {
            let _ = writeln!(out, "{pad}{}", print_expr(e));
        }
        StmtKind::Pass => {
            let _ = writeln!(out, "{pad}pass");
        }
    }
}

/// Canonical source text: constants, externs, then functions.
pub fn print_program(prog: &SubjectProgram) -> String {
    let mut sections = Vec::new();
    if !prog.consts.is_empty() {
        let mut s = String::new();
        for c in &prog.consts {
            let _ = writeln!(s, "const {} = {}", c.name, literal(&c.value));
        }
        sections.push(s);
    }
    if !prog.externs.is_empty() {
        let mut s = String::new();
        for e in &prog.externs {
            let _ = writeln!(s, "extern {}({})", e.name, e.params.join(", "));
        }
        sections.push(s);
    }
    for f in &prog.functions {
        let mut s = String::new();
        let _ = writeln!(s, "def {}({}):", f.name, f.params.join(", "));
        block(&mut s, &f.body, 1);
        sections.push(s);
    }
    sections.join("\n")
}

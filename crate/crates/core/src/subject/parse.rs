use std::collections::BTreeSet;

use super::lex::{lex, Lexeme, T};
use super::{
    always_returns, AssignOp, BinOp, ConstDecl, Expr, ExprKind, ExternDecl, FunctionDef, Literal, Span, Stmt, StmtKind,
    SubjectProgram,
};
use crate::rational::Rational;
use crate::sha256_hex;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlErrorKind {
    Syntax,
    DuplicateName,
    MissingReturn,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct SlError {
    pub kind: SlErrorKind,
    pub span: Span,
    pub message: String,
}

type PResult<T> = Result<T, SlError>;

const KEYWORDS: &[&str] = &[
    "def", "extern", "const", "let", "if", "elif", "else", "for", "in", "return", "pass", "and", "or", "not", "true",
    "false", "lambda",
];

pub fn parse_program(text: &str) -> PResult<SubjectProgram> {
    let toks = lex(text).map_err(|(span, message)| SlError { kind: SlErrorKind::Syntax, span, message })?;
    let mut p = Parser { toks: &toks, idx: 0 };
    let mut prog = SubjectProgram {
        consts: Vec::new(),
        externs: Vec::new(),
        functions: Vec::new(),
        source_hash: sha256_hex(text.as_bytes()),
    };
    let mut names = BTreeSet::new();
    loop {
        let span = p.span();
        let name = match p.peek() {
            T::Eof => break,
            T::Newline => {
                p.idx += 1;
                continue;
            }
            T::Ident(w) if w == "const" => {
                p.idx += 1;
                let name = p.ident()?;
                p.expect_sym("=")?;
                let e = p.expr()?;
                let value = e.as_literal().ok_or_else(|| p.error_at(e.span, "constant must be a literal"))?;
                p.expect(T::Newline, "end of line")?;
                prog.consts.push(ConstDecl { name: name.clone(), value, span });
                name
            }
            T::Ident(w) if w == "extern" => {
                p.idx += 1;
                let name = p.ident()?;
                let params = p.params()?;
                p.expect(T::Newline, "end of line")?;
                prog.externs.push(ExternDecl { name: name.clone(), params, span });
                name
            }
            T::Ident(w) if w == "def" => {
                p.idx += 1;
                let name = p.ident()?;
                let params = p.params()?;
                p.expect_sym(":")?;
                let body = p.suite()?;
                if !always_returns(&body) {
                    return Err(SlError {
                        kind: SlErrorKind::MissingReturn,
                        span,
                        message: format!("function `{name}` has a path without `return`"),
                    });
                }
                prog.functions.push(FunctionDef { name: name.clone(), params, body, span });
                name
            }
            _ => return Err(p.unexpected("`const`, `extern` or `def`")),
        };
        if !names.insert(name.clone()) {
            return Err(SlError {
                kind: SlErrorKind::DuplicateName,
                span,
                message: format!("`{name}` is defined twice"),
            });
        }
    }
    Ok(prog)
}

struct Parser<'a> {
    toks: &'a [Lexeme],
    idx: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &T {
        &self.toks[self.idx.min(self.toks.len() - 1)].t
    }

    fn span(&self) -> Span {
        self.toks[self.idx.min(self.toks.len() - 1)].span
    }

    fn error_at(&self, span: Span, message: impl Into<String>) -> SlError {
        SlError { kind: SlErrorKind::Syntax, span, message: message.into() }
    }

    fn unexpected(&self, wanted: &str) -> SlError {
        let found = match self.peek() {
            T::Ident(s) => format!("`{s}`"),
            T::Num(n) => format!("number `{n}`"),
            T::Str(_) => "string literal".into(),
            T::Sym(s) => format!("`{s}`"),
            T::Newline => "end of line".into(),
            T::Indent => "indent".into(),
            T::Dedent => "dedent".into(),
            T::Eof => "end of input".into(),
        };
        self.error_at(self.span(), format!("expected {wanted}, found {found}"))
    }

    fn expect(&mut self, t: T, wanted: &str) -> PResult<()> {
        if *self.peek() == t {
            self.idx += 1;
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), T::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.idx += 1;
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn is_kw(&self, w: &str) -> bool {
        matches!(self.peek(), T::Ident(x) if x == w)
    }

    fn eat_kw(&mut self, w: &str) -> bool {
        let hit = self.is_kw(w);
        if hit {
            self.idx += 1;
        }
        hit
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            T::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.idx += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn params(&mut self) -> PResult<Vec<String>> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        if !self.is_sym(")") {
            loop {
                let span = self.span();
                let p = self.ident()?;
                if out.contains(&p) {
                    return Err(self.error_at(span, format!("duplicate parameter `{p}`")));
                }
                out.push(p);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    fn suite(&mut self) -> PResult<Vec<Stmt>> {
        if *self.peek() != T::Newline {
            let s = self.simple()?;
            self.expect(T::Newline, "end of line")?;
            return Ok(vec![s]);
        }
        self.idx += 1;
        self.expect(T::Indent, "indented block")?;
        let mut body = Vec::new();
        while !matches!(self.peek(), T::Dedent | T::Eof) {
            body.push(self.stmt()?);
        }
        self.expect(T::Dedent, "dedent")?;
        Ok(body)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        if self.eat_kw("if") {
            let mut branches = vec![(self.expr()?, self.colon_suite()?)];
            let mut otherwise = None;
            loop {
                if self.eat_kw("elif") {
                    branches.push((self.expr()?, self.colon_suite()?));
                } else if self.eat_kw("else") {
                    otherwise = Some(self.colon_suite()?);
                    break;
                } else {
                    break;
                }
            }
            return Ok(Stmt { kind: StmtKind::If { branches, otherwise }, span });
        }
        if self.eat_kw("for") {
            let var = self.ident()?;
            if !self.eat_kw("in") {
                return Err(self.unexpected("`in`"));
            }
            let iter = self.expr()?;
            let body = self.colon_suite()?;
            return Ok(Stmt { kind: StmtKind::For { var, iter, body }, span });
        }
        let s = self.simple()?;
        self.expect(T::Newline, "end of line")?;
        Ok(s)
    }

    fn colon_suite(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_sym(":")?;
        self.suite()
    }

    fn simple(&mut self) -> PResult<Stmt> {
        let span = self.span();
        if self.eat_kw("return") {
            return Ok(Stmt { kind: StmtKind::Return(self.expr()?), span });
        }
        if self.eat_kw("pass") {
            return Ok(Stmt { kind: StmtKind::Pass, span });
        }
        if self.eat_kw("let") {
            let target = self.ident()?;
            self.expect_sym("=")?;
            let value = self.expr()?;
            return Ok(Stmt { kind: StmtKind::Assign { target, op: AssignOp::Set, value, is_let: true }, span });
        }
        if let T::Ident(_) = self.peek() {
            if let Some(T::Sym(s @ ("=" | "+=" | "-="))) = self.toks.get(self.idx + 1).map(|l| &l.t) {
                let op = match *s {
                    "=" => AssignOp::Set,
                    "+=" => AssignOp::Add,
                    _ => AssignOp::Sub,
                };
                let target = self.ident()?;
                self.idx += 1;
                let value = self.expr()?;
                return Ok(Stmt { kind: StmtKind::Assign { target, op, value, is_let: false }, span });
            }
        }
        let e = self.expr()?;
        if !matches!(e.kind, ExprKind::Call(..) | ExprKind::Method(..)) {
            return Err(self.error_at(span, "expression statement must be a call"));
        }
        Ok(Stmt { kind: StmtKind::Expr(e), span })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binop(&self) -> Option<(BinOp, usize)> {
        let op = match self.peek() {
            T::Ident(w) if w == "or" => BinOp::Or,
            T::Ident(w) if w == "and" => BinOp::And,
            T::Ident(w) if w == "in" => BinOp::In,
            T::Ident(w) if w == "not" => {
                return matches!(self.toks.get(self.idx + 1).map(|l| &l.t), Some(T::Ident(x)) if x == "in")
                    .then_some((BinOp::NotIn, 2))
            }
            T::Sym("==") => BinOp::Eq,
            T::Sym("!=") => BinOp::Ne,
            T::Sym("<") => BinOp::Lt,
            T::Sym("<=") => BinOp::Le,
            T::Sym(">") => BinOp::Gt,
            T::Sym(">=") => BinOp::Ge,
            T::Sym("+") => BinOp::Add,
            T::Sym("-") => BinOp::Sub,
            T::Sym("*") => BinOp::Mul,
            _ => return None,
        };
        Some((op, 1))
    }

    /// Precedence climbing. Comparisons do not chain; `not` sits between
    /// `and` and the comparisons.
    fn binary(&mut self, min: u8) -> PResult<Expr> {
        let mut lhs = if min <= 3 && self.is_kw("not") {
            let span = self.span();
            self.idx += 1;
            let inner = self.binary(3)?;
            Expr::new(ExprKind::Not(Box::new(inner)), span)
        } else {
            self.unary()?
        };
        let mut compared = false;
        while let Some((op, width)) = self.binop() {
            let prec = op.precedence();
            if prec < min {
                break;
            }
            if prec == 4 {
                if compared {
                    return Err(self.error_at(self.span(), "comparisons do not chain"));
                }
                compared = true;
            }
            self.idx += width;
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span;
            lhs = Expr::new(ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat_sym("-") {
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        while self.is_sym(".") {
            self.idx += 1;
            let span = self.span();
            let method = self.ident()?;
            let args = self.args()?;
            e = Expr::new(ExprKind::Method(Box::new(e), method, args), span);
        }
        Ok(e)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        if !self.is_sym(")") {
            loop {
                if self.is_kw("lambda") {
                    let span = self.span();
                    self.idx += 1;
                    let v = self.ident()?;
                    self.expect_sym(":")?;
                    let body = self.expr()?;
                    out.push(Expr::new(ExprKind::Lambda(v, Box::new(body)), span));
                } else {
                    out.push(self.expr()?);
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        let t = self.peek().clone();
        let kind = match t {
            T::Num(n) => {
                self.idx += 1;
                let v: Rational = n.parse().map_err(|_| self.error_at(span, format!("bad number `{n}`")))?;
                ExprKind::Lit(Literal::Num(v))
            }
            T::Str(s) => {
                self.idx += 1;
                ExprKind::Lit(Literal::Str(s))
            }
            T::Ident(w) if w == "true" || w == "false" => {
                self.idx += 1;
                ExprKind::Lit(Literal::Bool(w == "true"))
            }
            T::Ident(_) => {
                let name = self.ident()?;
                if self.is_sym("(") {
                    ExprKind::Call(name, self.args()?)
                } else {
                    ExprKind::Var(name)
                }
            }
            T::Sym("(") => {
                self.idx += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                return Ok(e);
            }
            T::Sym("[") => {
                self.idx += 1;
                let mut xs = Vec::new();
                if !self.is_sym("]") {
                    loop {
                        xs.push(self.expr()?);
                        if !self.eat_sym(",") || self.is_sym("]") {
                            break;
                        }
                    }
                }
                self.expect_sym("]")?;
                ExprKind::List(xs)
            }
            T::Sym("{") => {
                self.idx += 1;
                let mut fields: Vec<(String, Expr)> = Vec::new();
                if !self.is_sym("}") {
                    loop {
                        let key_span = self.span();
                        let T::Str(key) = self.peek().clone() else {
                            return Err(self.unexpected("string field name"));
                        };
                        self.idx += 1;
                        self.expect_sym(":")?;
                        if fields.iter().any(|(k, _)| *k == key) {
                            return Err(self.error_at(key_span, format!("duplicate field \"{key}\"")));
                        }
                        fields.push((key, self.expr()?));
                        if !self.eat_sym(",") || self.is_sym("}") {
                            break;
                        }
                    }
                }
                self.expect_sym("}")?;
                ExprKind::Record(fields)
            }
            _ => return Err(self.unexpected("expression")),
        };
        Ok(Expr::new(kind, span))
    }
}

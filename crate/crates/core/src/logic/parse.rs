//! Recursive-descent parser for `formula-grammar v1`.
//!
//! Precedence, loosest first: quantifier bodies (extend as far right as
//! possible), `<->` (left), `->` (right), `||`, `&&`, `!`.

use super::wf::{check_apply, check_arith, check_member_set, check_pred, check_relation, TermSort};
use super::{ArithOp, CmpOp, Formula, Signature, Sort, Term};
use crate::rational::Rational;
use crate::text::{tokenize, LexError, Pos, Tok, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulaErrorKind {
    Syntax,
    Sort,
    Undeclared,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct FormulaError {
    pub kind: FormulaErrorKind,
    pub pos: Pos,
    pub message: String,
}

impl From<LexError> for FormulaError {
    fn from(e: LexError) -> Self {
        FormulaError { kind: FormulaErrorKind::Syntax, pos: e.pos, message: e.message }
    }
}

type PResult<T> = Result<T, FormulaError>;

/// Parses a closed formula over `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> PResult<Formula> {
    let tokens = tokenize(text)?;
    let mut p = FormulaParser::new(&tokens, sig);
    let phi = p.formula()?;
    p.expect_end()?;
    Ok(phi)
}

/// Parses a closed term over `sig`.
pub fn parse_term(text: &str, sig: &Signature) -> PResult<Term> {
    let tokens = tokenize(text)?;
    let mut p = FormulaParser::new(&tokens, sig);
    let (t, _) = p.term()?;
    p.expect_end()?;
    Ok(t)
}

pub(crate) struct FormulaParser<'a> {
    toks: &'a [Token],
    idx: usize,
    sig: &'a Signature,
    bound: Vec<(String, Sort)>,
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "forall" | "exists" | "in" | "true" | "false")
}

impl<'a> FormulaParser<'a> {
    /// `toks` must end with an `Eof` token or be a slice of a larger
    /// stream; running past the end behaves like `Eof`.
    pub(crate) fn new(toks: &'a [Token], sig: &'a Signature) -> Self {
        FormulaParser { toks, idx: 0, sig, bound: Vec::new() }
    }

    fn peek(&self) -> &Tok {
        self.toks.get(self.idx).map(|t| &t.tok).unwrap_or(&Tok::Eof)
    }

    fn peek_at(&self, n: usize) -> &Tok {
        self.toks.get(self.idx + n).map(|t| &t.tok).unwrap_or(&Tok::Eof)
    }

    fn pos(&self) -> Pos {
        match self.toks.get(self.idx).or(self.toks.last()) {
            Some(t) => t.pos,
            None => Pos { line: 1, col: 1 },
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == w)
    }

    fn err(&self, kind: FormulaErrorKind, message: impl Into<String>) -> FormulaError {
        FormulaError { kind, pos: self.pos(), message: message.into() }
    }

    fn err_at(&self, at: usize, kind: FormulaErrorKind, message: impl Into<String>) -> FormulaError {
        let pos = self.toks.get(at).map(|t| t.pos).unwrap_or_else(|| self.pos());
        FormulaError { kind, pos, message: message.into() }
    }

    fn unexpected(&self, wanted: &str) -> FormulaError {
        self.err(FormulaErrorKind::Syntax, format!("expected {wanted}, found {}", self.peek()))
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.idx += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub(crate) fn expect_end(&self) -> PResult<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of formula")),
        }
    }

    fn diag_error(&self, at: usize, d: super::Diagnostic) -> FormulaError {
        use super::DiagnosticKind as K;
        let kind = match d.kind {
            K::UndeclaredSymbol | K::UndeclaredSort => FormulaErrorKind::Undeclared,
            _ => FormulaErrorKind::Sort,
        };
        self.err_at(at, kind, d.message)
    }

    pub(crate) fn formula(&mut self) -> PResult<Formula> {
        if self.is_word("forall") || self.is_word("exists") {
            return self.quantified();
        }
        let mut lhs = self.implication()?;
        while self.eat_sym("<->") {
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn quantified(&mut self) -> PResult<Formula> {
        let universal = self.is_word("forall");
        self.idx += 1;
        let var = self.ident()?;
        self.expect_sym(":")?;
        let at = self.idx;
        let sort_name = self.ident()?;
        let sort = Sort::from_name(&sort_name);
        if let Sort::Named(n) = &sort {
            if !self.sig.sorts.contains(n) {
                return Err(self.err_at(at, FormulaErrorKind::Undeclared, format!("undeclared sort `{n}`")));
            }
        }
        self.expect_sym(".")?;
        self.bound.push((var.clone(), sort.clone()));
        let body = self.formula();
        self.bound.pop();
        let body = Box::new(body?);
        Ok(if universal { Formula::Forall(var, sort, body) } else { Formula::Exists(var, sort, body) })
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat_sym("->") {
            let rhs =
                if self.is_word("forall") || self.is_word("exists") { self.quantified()? } else { self.implication()? };
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let first = self.conjunction()?;
        if !self.is_sym("||") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_sym("||") {
            items.push(self.conjunction()?);
        }
        Ok(Formula::Or(items))
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let first = self.unary()?;
        if !self.is_sym("&&") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_sym("&&") {
            items.push(self.unary()?);
        }
        Ok(Formula::And(items))
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat_sym("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_word("forall") || self.is_word("exists") {
            return self.quantified();
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Formula> {
        let start = self.idx;
        match self.peek().clone() {
            Tok::Ident(w) if w == "true" => {
                self.idx += 1;
                Ok(Formula::True)
            }
            Tok::Ident(w) if w == "false" => {
                self.idx += 1;
                Ok(Formula::False)
            }
            Tok::Sym("(") => {
                // `(a + b) <= c` is a relation, `(p && q)` a grouped formula.
                match self.relation() {
                    Ok(phi) => Ok(phi),
                    Err(e1) => {
                        self.idx = start + 1;
                        let res = self.formula().and_then(|phi| {
                            self.expect_sym(")")?;
                            Ok(phi)
                        });
                        res.map_err(|e2| if self.idx_of(&e1) > self.idx_of(&e2) { e1 } else { e2 })
                    }
                }
            }
            Tok::Str(s) => {
                let next = self.peek_at(1).clone();
                let term_follows = matches!(next, Tok::Sym("==" | "<=" | "<" | "+" | "-" | "*"))
                    || matches!(&next, Tok::Ident(w) if w == "in");
                if term_follows {
                    self.relation()
                } else {
                    self.idx += 1;
                    Ok(Formula::informal(&s))
                }
            }
            Tok::Ident(name) if !is_keyword(&name) => {
                let shadowed = self.bound.iter().any(|(n, _)| *n == name);
                if !shadowed && self.sig.predicates.contains_key(&name) {
                    self.predicate(name)
                } else {
                    self.relation()
                }
            }
            Tok::Number(_) | Tok::Sym("-") => self.relation(),
            _ => Err(self.unexpected("formula")),
        }
    }

    fn idx_of(&self, e: &FormulaError) -> usize {
        self.toks.iter().position(|t| t.pos == e.pos).unwrap_or(0)
    }

    fn predicate(&mut self, name: String) -> PResult<Formula> {
        let at = self.idx;
        self.idx += 1;
        let mut args = Vec::new();
        let mut sorts = Vec::new();
        if self.eat_sym("(") && !self.eat_sym(")") {
            loop {
                let (t, s) = self.term()?;
                args.push(t);
                sorts.push(s);
                if self.eat_sym(")") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        check_pred(self.sig, &name, &sorts).map_err(|d| self.diag_error(at, d))?;
        Ok(Formula::Pred(name, args))
    }

    fn relation(&mut self) -> PResult<Formula> {
        let (lhs, ls) = self.term()?;
        let at = self.idx;
        if self.is_word("in") {
            self.idx += 1;
            self.expect_sym("{")?;
            let mut set = Vec::new();
            loop {
                match self.peek().clone() {
                    Tok::Str(s) => {
                        self.idx += 1;
                        set.push(s);
                    }
                    _ => return Err(self.unexpected("string literal")),
                }
                if self.eat_sym("}") {
                    break;
                }
                self.expect_sym(",")?;
            }
            if !ls.fits(&Sort::Str) {
                return Err(self.err_at(
                    at,
                    FormulaErrorKind::Sort,
                    format!("membership test on a term of sort {ls}, expected Str"),
                ));
            }
            check_member_set(&set).map_err(|d| self.diag_error(at, d))?;
            return Ok(Formula::MemberOf(lhs, set));
        }
        let op = match self.peek() {
            Tok::Sym(s @ ("==" | "<=" | "<")) => *s,
            _ => return Err(self.unexpected("`==`, `<=`, `<` or `in`")),
        };
        self.idx += 1;
        let (rhs, rs) = self.term()?;
        check_relation(&ls, &rs, op).map_err(|d| self.diag_error(at, d))?;
        Ok(match op {
            "==" => Formula::Equals(lhs, rhs),
            "<=" => Formula::Compare(CmpOp::Le, lhs, rhs),
            _ => Formula::Compare(CmpOp::Lt, lhs, rhs),
        })
    }

    pub(crate) fn term(&mut self) -> PResult<(Term, TermSort)> {
        let (mut lhs, mut ls) = self.product()?;
        loop {
            let op = if self.is_sym("+") {
                ArithOp::Add
            } else if self.is_sym("-") {
                ArithOp::Sub
            } else {
                break;
            };
            let at = self.idx;
            self.idx += 1;
            let (rhs, rs) = self.product()?;
            ls = check_arith(&ls, &rs, op.symbol()).map_err(|d| self.diag_error(at, d))?;
            lhs = Term::Arith(op, Box::new(lhs), Box::new(rhs));
        }
        Ok((lhs, ls))
    }

    fn product(&mut self) -> PResult<(Term, TermSort)> {
        let (mut lhs, mut ls) = self.primary()?;
        while self.is_sym("*") {
            let at = self.idx;
            self.idx += 1;
            let (rhs, rs) = self.primary()?;
            ls = check_arith(&ls, &rs, "*").map_err(|d| self.diag_error(at, d))?;
            lhs = Term::Arith(ArithOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok((lhs, ls))
    }

    fn number(&mut self, negative: bool) -> PResult<Term> {
        let Tok::Number(text) = self.peek().clone() else {
            return Err(self.unexpected("number"));
        };
        let mut value: Rational = text
            .parse()
            .map_err(|e: crate::rational::ParseRationalError| self.err(FormulaErrorKind::Syntax, e.to_string()))?;
        if negative {
            value = -&value;
        }
        self.idx += 1;
        Ok(Term::Num(value))
    }

    fn primary(&mut self) -> PResult<(Term, TermSort)> {
        match self.peek().clone() {
            Tok::Number(_) => Ok((self.number(false)?, TermSort::Numeral)),
            Tok::Sym("-") => {
                self.idx += 1;
                Ok((self.number(true)?, TermSort::Numeral))
            }
            Tok::Str(s) => {
                self.idx += 1;
                Ok((Term::Str(s), TermSort::Known(Sort::Str)))
            }
            Tok::Sym("(") => {
                self.idx += 1;
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(name) if !is_keyword(&name) => {
                let at = self.idx;
                self.idx += 1;
                if let Some((_, sort)) = self.bound.iter().rev().find(|(n, _)| *n == name) {
                    let sort = sort.clone();
                    return Ok((Term::Var(name, sort.clone()), TermSort::Known(sort)));
                }
                let mut args = Vec::new();
                let mut sorts = Vec::new();
                if self.eat_sym("(") && !self.eat_sym(")") {
                    loop {
                        let (t, s) = self.term()?;
                        args.push(t);
                        sorts.push(s);
                        if self.eat_sym(")") {
                            break;
                        }
                        self.expect_sym(",")?;
                    }
                }
                let sort = check_apply(self.sig, &name, &sorts).map_err(|d| self.diag_error(at, d))?;
                Ok((Term::Apply(name, args), sort))
            }
            _ => Err(self.unexpected("term")),
        }
    }
}

//! `rationale v1` reader.
//!
//! Declarations are gathered first so that claims may mention symbols
//! declared anywhere in the document; formulas are parsed afterwards
//! against the finished signature.

use std::collections::BTreeMap;

use super::{
    validate_structure, Claim, ConfigValue, Decomposition, Rationale, Statement, StructureDiagnostic, SubjectRef,
    VerifyHint,
};
use crate::logic::{FormulaError, FormulaErrorKind, FormulaParser, Signature, Sort};
use crate::rational::Rational;
use crate::text::{normalize_ws, tokenize, Pos, Tok, Token};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RationaleError {
    #[error("{pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: {message}")]
    Declaration { pos: Pos, message: String },
    #[error("{pos}: duplicate claim id `{id}`")]
    DuplicateClaim { id: String, pos: Pos },
    #[error("claim {claim}: {error}")]
    Formula { claim: String, error: FormulaError },
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<StructureDiagnostic>),
}

impl RationaleError {
    /// Lexical or grammatical failure, as opposed to a well-formed
    /// document that violates a rule.
    pub fn is_syntax(&self) -> bool {
        match self {
            RationaleError::Syntax { .. } => true,
            RationaleError::Formula { error, .. } => error.kind == FormulaErrorKind::Syntax,
            _ => false,
        }
    }
}

type PResult<T> = Result<T, RationaleError>;

/// Parses and validates.
pub fn parse_rationale(text: &str) -> PResult<Rationale> {
    let r = parse_rationale_unchecked(text)?;
    let diags = validate_structure(&r);
    if diags.is_empty() {
        Ok(r)
    } else {
        Err(RationaleError::Invalid(diags))
    }
}

/// Parses without the tree checks of [`validate_structure`].
pub fn parse_rationale_unchecked(text: &str) -> PResult<Rationale> {
    let toks = tokenize(text).map_err(|e| RationaleError::Syntax { pos: e.pos, message: e.message })?;
    let mut p = Parser { src: text, toks: &toks, idx: 0 };
    let doc = p.document()?;
    doc.resolve(&toks)
}

struct RawClaim {
    id: String,
    title: String,
    formal: Option<(usize, usize)>,
    informal: Option<String>,
    verify: Option<VerifyHint>,
    note: Option<String>,
    pos: Pos,
}

struct SymbolDecl {
    name: String,
    args: Vec<String>,
    result: Option<String>,
    pos: Pos,
}

#[derive(Default)]
struct Document {
    name: Option<String>,
    sorts: Vec<(String, Pos)>,
    functions: Vec<SymbolDecl>,
    predicates: Vec<SymbolDecl>,
    claims: Vec<RawClaim>,
    decompositions: Vec<Decomposition>,
    root: Option<String>,
    subject: Option<SubjectRef>,
}

impl Document {
    fn resolve(self, toks: &[Token]) -> PResult<Rationale> {
        let decl_err =
            |pos: Pos, e: crate::logic::SignatureError| RationaleError::Declaration { pos, message: e.to_string() };
        let mut sig = Signature::new();
        for (s, pos) in &self.sorts {
            sig.declare_sort(s).map_err(|e| decl_err(*pos, e))?;
        }
        for f in &self.functions {
            let args = f.args.iter().map(|a| Sort::from_name(a)).collect();
            let result = Sort::from_name(f.result.as_deref().unwrap_or_default());
            sig.declare_function(&f.name, args, result).map_err(|e| decl_err(f.pos, e))?;
        }
        for p in &self.predicates {
            let args = p.args.iter().map(|a| Sort::from_name(a)).collect();
            sig.declare_predicate(&p.name, args).map_err(|e| decl_err(p.pos, e))?;
        }

        let mut claims = BTreeMap::new();
        for c in self.claims {
            let statement = match (c.formal, c.informal) {
                (Some((a, b)), None) => {
                    let mut fp = FormulaParser::new(&toks[a..b], &sig);
                    let phi = fp
                        .formula()
                        .and_then(|phi| fp.expect_end().map(|_| phi))
                        .map_err(|error| RationaleError::Formula { claim: c.id.clone(), error })?;
                    Statement::Formal(phi)
                }
                (None, Some(t)) => Statement::Informal(t),
                _ => {
                    return Err(RationaleError::Syntax {
                        pos: c.pos,
                        message: format!("claim `{}` needs exactly one of `formal` or `informal`", c.id),
                    })
                }
            };
            if claims.contains_key(&c.id) {
                return Err(RationaleError::DuplicateClaim { id: c.id, pos: c.pos });
            }
            claims.insert(c.id.clone(), Claim { id: c.id, title: c.title, statement, verify: c.verify, note: c.note });
        }
        for c in claims.values() {
            if let Statement::Formal(phi) = &c.statement {
                sig.absorb_literals(phi);
            }
        }
        let eof = toks.last().map(|t| t.pos).unwrap_or_default();
        let missing =
            |what: &str| RationaleError::Syntax { pos: eof, message: format!("missing `{what}` declaration") };
        Ok(Rationale {
            name: self.name.ok_or_else(|| missing("rationale"))?,
            signature: sig,
            root: self.root.ok_or_else(|| missing("root"))?,
            claims,
            decompositions: self.decompositions,
            subject: self.subject,
        })
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: &'a [Token],
    idx: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx.min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.idx.min(self.toks.len() - 1)].pos
    }

    fn bump(&mut self) -> &Token {
        let t = &self.toks[self.idx.min(self.toks.len() - 1)];
        self.idx += 1;
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(RationaleError::Syntax { pos: self.pos(), message: message.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(format!("expected {wanted}, found {}", self.peek()))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
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
            self.unexpected(&format!("`{s}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.idx += 1;
                Ok(s)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.idx += 1;
                Ok(s)
            }
            _ => self.unexpected("string literal"),
        }
    }

    fn document(&mut self) -> PResult<Document> {
        let mut doc = Document::default();
        loop {
            let pos = self.pos();
            let word = match self.peek() {
                Tok::Eof => return Ok(doc),
                Tok::Ident(w) => w.clone(),
                _ => return self.unexpected("declaration"),
            };
            self.idx += 1;
            match word.as_str() {
                "rationale" => {
                    if doc.name.is_some() {
                        return Err(RationaleError::Syntax { pos, message: "second `rationale` header".into() });
                    }
                    doc.name = Some(self.ident()?);
                }
                "sort" => doc.sorts.push((self.ident()?, pos)),
                "fn" => {
                    let name = self.ident()?;
                    self.expect_sym(":")?;
                    let mut sorts = vec![self.ident()?];
                    while self.eat_sym(",") {
                        sorts.push(self.ident()?);
                    }
                    let result = if self.eat_sym("->") {
                        self.ident()?
                    } else if sorts.len() == 1 {
                        sorts.pop().unwrap()
                    } else {
                        return self.unexpected("`->`");
                    };
                    doc.functions.push(SymbolDecl { name, args: sorts, result: Some(result), pos });
                }
                "pred" => {
                    let name = self.ident()?;
                    let mut args = Vec::new();
                    if self.eat_sym(":") {
                        args.push(self.ident()?);
                        while self.eat_sym(",") {
                            args.push(self.ident()?);
                        }
                    }
                    doc.predicates.push(SymbolDecl { name, args, result: None, pos });
                }
                "claim" => doc.claims.push(self.claim(pos)?),
                "decompose" => {
                    let parent = self.ident()?;
                    self.expect_sym("->")?;
                    self.expect_sym("[")?;
                    let mut children = Vec::new();
                    if !self.is_sym("]") {
                        children.push(self.ident()?);
                        while self.eat_sym(",") {
                            children.push(self.ident()?);
                        }
                    }
                    self.expect_sym("]")?;
                    doc.decompositions.push(Decomposition { parent, children });
                }
                "root" => {
                    if doc.root.is_some() {
                        return Err(RationaleError::Syntax { pos, message: "second `root` declaration".into() });
                    }
                    doc.root = Some(self.ident()?);
                }
                "subject" => {
                    let path = self.string()?;
                    doc.subject = Some(SubjectRef { path, sha256: self.hash()? });
                }
                other => return Err(RationaleError::Syntax { pos, message: format!("unknown declaration `{other}`") }),
            }
        }
    }

    /// `sha256:<64 hex digits>`, read from the raw source because the
    /// digest is not a single token.
    fn hash(&mut self) -> PResult<String> {
        if !matches!(self.peek(), Tok::Ident(w) if w == "sha256") {
            return self.unexpected("`sha256:`");
        }
        self.idx += 1;
        let pos = self.pos();
        let colon_end = self.bump().end;
        if !matches!(self.toks[self.idx - 1].tok, Tok::Sym(":")) {
            return Err(RationaleError::Syntax { pos, message: "expected `:` after `sha256`".into() });
        }
        let hex: String = self.src[colon_end..].chars().take_while(|c| c.is_ascii_hexdigit()).collect();
        if hex.len() != 64 || hex.chars().any(|c| c.is_ascii_uppercase()) {
            return Err(RationaleError::Syntax { pos, message: "expected 64 lowercase hex digits".into() });
        }
        let end = colon_end + hex.len();
        while self.idx < self.toks.len() && self.toks[self.idx].start < end {
            if self.toks[self.idx].end > end {
                return Err(RationaleError::Syntax { pos, message: "malformed digest".into() });
            }
            self.idx += 1;
        }
        Ok(hex)
    }

    fn claim(&mut self, pos: Pos) -> PResult<RawClaim> {
        let id = self.ident()?;
        let title = self.string()?;
        self.expect_sym("{")?;
        let mut c = RawClaim { id, title, formal: None, informal: None, verify: None, note: None, pos };
        while !self.eat_sym("}") {
            let field_pos = self.pos();
            let field = self.ident()?;
            self.expect_sym(":")?;
            let dup = match field.as_str() {
                "formal" => c.formal.replace(self.formula_range()?).is_some(),
                "informal" => c.informal.replace(normalize_ws(&self.string()?)).is_some(),
                "verify" => c.verify.replace(self.hint()?).is_some(),
                "note" => c.note.replace(self.string()?).is_some(),
                other => {
                    return Err(RationaleError::Syntax {
                        pos: field_pos,
                        message: format!("unknown claim field `{other}`"),
                    })
                }
            };
            if dup {
                return Err(RationaleError::Syntax { pos: field_pos, message: format!("field `{field}` given twice") });
            }
            if !self.eat_sym(";") && !self.is_sym("}") {
                return self.unexpected("`;` or `}`");
            }
        }
        Ok(c)
    }

    /// Token range of a formula ending at the next top-level `;` or `}`.
    fn formula_range(&mut self) -> PResult<(usize, usize)> {
        let start = self.idx;
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return self.unexpected("`;` or `}`"),
                Tok::Sym("(" | "[" | "{") => depth += 1,
                Tok::Sym(";" | "}") if depth == 0 => break,
                Tok::Sym(")" | "]" | "}") => depth = depth.saturating_sub(1),
                _ => {}
            }
            self.idx += 1;
        }
        if start == self.idx {
            return self.unexpected("formula");
        }
        Ok((start, self.idx))
    }

    /// Hyphenated name such as `output-shape`, with no spaces around the
    /// hyphens.
    fn verifier_name(&mut self) -> PResult<String> {
        let mut name = self.ident()?;
        while self.is_sym("-") {
            let dash = &self.toks[self.idx];
            let next = &self.toks[self.idx + 1];
            let prev_end = self.toks[self.idx - 1].end;
            match &next.tok {
                Tok::Ident(w) if dash.start == prev_end && next.start == dash.end => {
                    name.push('-');
                    name.push_str(w);
                    self.idx += 2;
                }
                _ => return self.err("malformed verifier name"),
            }
        }
        Ok(name)
    }

    fn hint(&mut self) -> PResult<VerifyHint> {
        let verifier = self.verifier_name()?;
        self.expect_sym("(")?;
        let mut config: Vec<(String, ConfigValue)> = Vec::new();
        if !self.is_sym(")") {
            loop {
                let pos = self.pos();
                let key = self.ident()?;
                self.expect_sym("=")?;
                let value = self.config_value()?;
                if config.iter().any(|(k, _)| *k == key) {
                    return Err(RationaleError::Syntax { pos, message: format!("duplicate key `{key}`") });
                }
                config.push((key, value));
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(VerifyHint { verifier, config })
    }

    fn config_value(&mut self) -> PResult<ConfigValue> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.idx += 1;
                Ok(ConfigValue::Ident(s))
            }
            Tok::Str(s) => {
                self.idx += 1;
                Ok(ConfigValue::Str(s))
            }
            Tok::Number(n) => {
                let pos = self.pos();
                self.idx += 1;
                n.parse::<Rational>()
                    .map(ConfigValue::Number)
                    .map_err(|_| RationaleError::Syntax { pos, message: format!("bad number `{n}`") })
            }
            Tok::Sym("-") if matches!(self.toks.get(self.idx + 1).map(|t| &t.tok), Some(Tok::Number(_))) => {
                self.idx += 1;
                match self.config_value()? {
                    ConfigValue::Number(n) => Ok(ConfigValue::Number(-&n)),
                    _ => unreachable!(),
                }
            }
            Tok::Sym(open @ ("{" | "[")) => {
                self.idx += 1;
                let close = if open == "{" { "}" } else { "]" };
                let mut items = Vec::new();
                if !self.is_sym(close) {
                    items.push(self.string()?);
                    while self.eat_sym(",") {
                        items.push(self.string()?);
                    }
                }
                self.expect_sym(close)?;
                Ok(if open == "{" { ConfigValue::Set(items) } else { ConfigValue::List(items) })
            }
            _ => self.unexpected("configuration value"),
        }
    }
}

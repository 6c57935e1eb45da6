use avc_core::subject::{
    always_returns, parse_program, print_program, AssignOp, BinOp, ConstDecl, Expr, ExprKind, ExternDecl, FunctionDef,
    Literal, Span, Stmt, StmtKind, SubjectProgram,
};
use avc_core::Rational;

use super::{Check, Gen, STRINGS};

pub const VARS: &[&str] = &["a", "b", "xs", "total", "acc"];
pub const BINOPS: &[BinOp] = &[
    BinOp::Or,
    BinOp::And,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
    BinOp::In,
    BinOp::NotIn,
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
];

pub fn e(kind: ExprKind) -> Expr {
    Expr::new(kind, Span::default())
}

pub fn s(kind: StmtKind) -> Stmt {
    Stmt { kind, span: Span::default() }
}

pub fn literal(g: &mut Gen) -> Literal {
    match g.below(4) {
        0 => Literal::Str(g.pick(STRINGS).to_string()),
        1 => Literal::Bool(g.chance(0.5)),
        _ => Literal::Num(Rational::new(g.int(0, 5000), *g.pick(&[1, 10, 100]))),
    }
}

pub struct ProgGen<'a> {
    pub g: &'a mut Gen,
    pub functions: Vec<String>,
}

impl ProgGen<'_> {
    pub fn expr(&mut self, depth: u32) -> Expr {
        if depth == 0 || self.g.chance(0.2) {
            return if self.g.chance(0.5) {
                e(ExprKind::Lit(literal(self.g)))
            } else {
                e(ExprKind::Var(self.g.pick(VARS).to_string()))
            };
        }
        let d = depth - 1;
        match self.g.below(10) {
            0 => e(ExprKind::List((0..self.g.below(3)).map(|_| self.expr(d)).collect())),
            1 => {
                let keys = ["score", "decision", "reasons"];
                let n = self.g.below(4);
                e(ExprKind::Record(keys[..n].iter().map(|k| (k.to_string(), self.expr(d))).collect()))
            }
            2 => e(ExprKind::Neg(Box::new(self.expr(d)))),
            3 => e(ExprKind::Not(Box::new(self.expr(d)))),
            4 | 5 => {
                let op = *self.g.pick(BINOPS);
                e(ExprKind::Bin(op, Box::new(self.expr(d)), Box::new(self.expr(d))))
            }
            6 => {
                let name = self.g.pick(&["len", "min", "max", "round", "set", "ext"]).to_string();
                let n = match name.as_str() {
                    "len" | "set" => 1,
                    "ext" => 0,
                    _ => 2,
                };
                e(ExprKind::Call(name, (0..n).map(|_| self.expr(d)).collect()))
            }
            7 => {
                let pred = e(ExprKind::Lambda("t".into(), Box::new(self.expr(d))));
                e(ExprKind::Call("count_if".into(), vec![self.expr(d), pred]))
            }
            8 => {
                let key = e(ExprKind::Lit(Literal::Str(self.g.pick(&["amount", "country"]).to_string())));
                let mut args = vec![key];
                if self.g.chance(0.5) {
                    args.push(self.expr(d));
                }
                e(ExprKind::Method(Box::new(self.expr(d)), "get".into(), args))
            }
            _ if !self.functions.is_empty() => {
                let f = self.g.pick(&self.functions).clone();
                e(ExprKind::Call(f, vec![self.expr(d)]))
            }
            _ => self.expr(d),
        }
    }

    pub fn stmt(&mut self, depth: u32) -> Stmt {
        let nested = depth > 0;
        match self.g.below(if nested { 8 } else { 5 }) {
            0 | 1 => {
                let op = *self.g.pick(&[AssignOp::Set, AssignOp::Add, AssignOp::Sub]);
                let is_let = op == AssignOp::Set && self.g.chance(0.3);
                s(StmtKind::Assign { target: self.g.pick(VARS).to_string(), op, value: self.expr(2), is_let })
            }
            2 => {
                let recv = e(ExprKind::Var("acc".into()));
                s(StmtKind::Expr(e(ExprKind::Method(Box::new(recv), "append".into(), vec![self.expr(2)]))))
            }
            3 => s(StmtKind::Pass),
            4 => s(StmtKind::Return(self.expr(2))),
            5 | 6 => {
                let branches = (0..1 + self.g.below(3)).map(|_| (self.expr(2), self.block(depth - 1))).collect();
                let otherwise = self.g.chance(0.5).then(|| self.block(depth - 1));
                s(StmtKind::If { branches, otherwise })
            }
            _ => s(StmtKind::For { var: "t".into(), iter: self.expr(1), body: self.block(depth - 1) }),
        }
    }

    pub fn block(&mut self, depth: u32) -> Vec<Stmt> {
        (0..1 + self.g.below(3)).map(|_| self.stmt(depth)).collect()
    }

    pub fn program(&mut self) -> SubjectProgram {
        let consts = (0..self.g.below(3))
            .map(|i| {
                let value = match literal(self.g) {
                    Literal::Num(n) if self.g.chance(0.3) => Literal::Num(-&n),
                    l => l,
                };
                ConstDecl { name: format!("K{i}"), value, span: Span::default() }
            })
            .collect();
        let externs = vec![ExternDecl { name: "ext".into(), params: Vec::new(), span: Span::default() }];
        let mut functions = Vec::new();
        for i in 0..1 + self.g.below(3) {
            let mut body = self.block(2);
            if !always_returns(&body) {
                body.push(s(StmtKind::Return(self.expr(2))));
            }
            let name = format!("f{i}");
            functions.push(FunctionDef {
                name: name.clone(),
                params: vec!["a".into(), "b".into()],
                body,
                span: Span::default(),
            });
            self.functions.push(name);
        }
        SubjectProgram { consts, externs, functions, source_hash: String::new() }
    }
}

/// Enumerates every control path through `body`, choosing which branch each
/// `if` takes and whether each loop runs, and reports whether all of them
/// reach a `return`.
pub fn all_paths_return(body: &[Stmt]) -> bool {
    fn run(stmts: &[Stmt], choices: &[usize], arities: &mut Vec<usize>) -> bool {
        for st in stmts {
            match &st.kind {
                StmtKind::Return(_) => return true,
                StmtKind::If { branches, otherwise } => {
                    let pick = choices.get(arities.len()).copied().unwrap_or(0);
                    arities.push(branches.len() + 1);
                    let taken: &[Stmt] = match branches.get(pick) {
                        Some((_, b)) => b,
                        None => otherwise.as_deref().unwrap_or(&[]),
                    };
                    if run(taken, choices, arities) {
                        return true;
                    }
                }
                StmtKind::For { body, .. } => {
                    let pick = choices.get(arities.len()).copied().unwrap_or(0);
                    arities.push(2);
                    if pick == 1 && run(body, choices, arities) {
                        return true;
                    }
                }
                _ => {}
            }
        }
        false
    }
    let mut choices: Vec<usize> = Vec::new();
    loop {
        let mut arities = Vec::new();
        if !run(body, &choices, &mut arities) {
            return false;
        }
        let mut full: Vec<usize> = (0..arities.len()).map(|i| choices.get(i).copied().unwrap_or(0)).collect();
        let Some(i) = (0..full.len()).rev().find(|&i| full[i] + 1 < arities[i]) else {
            return true;
        };
        full[i] += 1;
        full.truncate(i + 1);
        choices = full;
    }
}

pub fn sl_round_trip(seed: u64) -> Check {
    let prog = ProgGen { g: &mut Gen::new(seed), functions: Vec::new() }.program();
    let text = print_program(&prog);
    let back = parse_program(&text).map_err(|err| format!("{err}\n{text}"))?;
    ensure!(back.same_structure(&prog), "reparsed program differs\n{text}");
    ensure!(print_program(&back) == text, "printing is not stable\n{text}");
    Ok(())
}

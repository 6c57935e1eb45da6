#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;

use avc_core::inference::emit_smt;
use avc_core::logic::{ArithOp, CmpOp, Formula, Signature, Sort, Term};
use avc_core::rationale::{
    from_interchange, parse_rationale, print_rationale, to_interchange, validate_structure, Claim, ConfigValue,
    Decomposition, Rationale, Statement, SubjectRef, VerifyHint,
};
use avc_core::Rational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub mod analyzers;
pub mod assurance;
pub mod logic;
pub mod subject;

/// Outcome of one property case; the error explains the counterexample.
pub type Check = Result<(), String>;

pub const AML: &str = include_str!("../../../../corpus/aml.sl");
pub const RATIONALE: &str = include_str!("../../../../corpus/aml.rationale");

pub struct Gen(pub StdRng);

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen(StdRng::seed_from_u64(seed))
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.0.gen_bool(p)
    }

    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.below(xs.len())]
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.0.gen_range(lo..=hi)
    }
}

pub const STRINGS: &[&str] = &["ok", "review", "flag", "a \"quoted\" one", "back\\slash"];
pub const INFORMAL: &[&str] = &["weights are appropriate", "the knowledge base is sound"];

/// Sort A; f : A -> A; g : A -> Real; h : A -> Str; c : A; k : Real;
/// P, Q : A; R : A, A; S : Str; p, q.
pub fn logic_sig() -> Signature {
    let mut sig = Signature::new();
    sig.declare_sort("A").unwrap();
    let a = || Sort::Named("A".into());
    sig.declare_function("f", vec![a()], a()).unwrap();
    sig.declare_function("g", vec![a()], Sort::Real).unwrap();
    sig.declare_function("h", vec![a()], Sort::Str).unwrap();
    sig.declare_function("c", vec![], a()).unwrap();
    sig.declare_function("k", vec![], Sort::Real).unwrap();
    sig.declare_predicate("P", vec![a()]).unwrap();
    sig.declare_predicate("Q", vec![a()]).unwrap();
    sig.declare_predicate("R", vec![a(), a()]).unwrap();
    sig.declare_predicate("S", vec![Sort::Str]).unwrap();
    sig.declare_predicate("p", vec![]).unwrap();
    sig.declare_predicate("q", vec![]).unwrap();
    sig
}

pub struct FormulaGen<'a> {
    pub g: &'a mut Gen,
    scope: Vec<String>,
}

impl<'a> FormulaGen<'a> {
    pub fn new(g: &'a mut Gen) -> Self {
        FormulaGen { g, scope: Vec::new() }
    }

    fn term_a(&mut self, depth: u32) -> Term {
        match self.g.below(if depth == 0 { 2 } else { 3 }) {
            0 if !self.scope.is_empty() => {
                let v = self.g.pick(&self.scope).clone();
                Term::Var(v, Sort::Named("A".into()))
            }
            2 => Term::apply("f", vec![self.term_a(depth - 1)]),
            _ => Term::constant("c"),
        }
    }

    fn num(&mut self) -> Term {
        let n = self.g.int(-300, 300);
        let d = *self.g.pick(&[1, 10, 100]);
        Term::Num(Rational::new(n, d))
    }

    fn term_real(&mut self, depth: u32) -> Term {
        match self.g.below(if depth == 0 { 3 } else { 4 }) {
            0 => Term::apply("g", vec![self.term_a(depth.saturating_sub(1))]),
            1 => Term::constant("k"),
            2 => self.num(),
            _ => {
                let op = *self.g.pick(&[ArithOp::Add, ArithOp::Sub, ArithOp::Mul]);
                Term::Arith(op, Box::new(self.term_real(depth - 1)), Box::new(self.term_real(depth - 1)))
            }
        }
    }

    fn term_str(&mut self) -> Term {
        if self.g.chance(0.5) {
            Term::apply("h", vec![self.term_a(1)])
        } else {
            Term::Str(self.g.pick(STRINGS).to_string())
        }
    }

    pub fn atom(&mut self) -> Formula {
        match self.g.below(10) {
            0 => Formula::pred("P", vec![self.term_a(2)]),
            1 => Formula::pred("Q", vec![self.term_a(2)]),
            2 => Formula::pred("R", vec![self.term_a(1), self.term_a(1)]),
            3 => Formula::pred(self.g.pick(&["p", "q"]), vec![]),
            4 => Formula::Equals(self.term_a(1), self.term_a(1)),
            5 => {
                let op = *self.g.pick(&[CmpOp::Le, CmpOp::Lt]);
                Formula::Compare(op, self.term_real(2), self.term_real(2))
            }
            6 => {
                let mut set: Vec<String> = Vec::new();
                for _ in 0..=self.g.below(3) {
                    let s = self.g.pick(STRINGS).to_string();
                    if !set.contains(&s) {
                        set.push(s);
                    }
                }
                Formula::MemberOf(self.term_str(), set)
            }
            7 => Formula::informal(self.g.pick(INFORMAL)),
            8 => Formula::pred("S", vec![self.term_str()]),
            _ => {
                if self.g.chance(0.5) {
                    Formula::True
                } else {
                    Formula::False
                }
            }
        }
    }

    pub fn formula(&mut self, depth: u32) -> Formula {
        if depth == 0 {
            return self.atom();
        }
        match self.g.below(9) {
            0 => Formula::not(self.formula(depth - 1)),
            1 => Formula::And((0..2 + self.g.below(2)).map(|_| self.formula(depth - 1)).collect()),
            2 => Formula::Or((0..2 + self.g.below(2)).map(|_| self.formula(depth - 1)).collect()),
            3 => Formula::implies(self.formula(depth - 1), self.formula(depth - 1)),
            4 => Formula::iff(self.formula(depth - 1), self.formula(depth - 1)),
            5 | 6 => {
                let free: Vec<&str> =
                    ["x", "y", "z"].into_iter().filter(|v| !self.scope.iter().any(|s| s == v)).collect();
                if free.is_empty() {
                    return self.atom();
                }
                let v = self.g.pick(&free).to_string();
                self.scope.push(v.clone());
                let body = self.formula(depth - 1);
                self.scope.pop();
                let a = Sort::Named("A".into());
                if self.g.chance(0.5) {
                    Formula::forall(&v, a, body)
                } else {
                    Formula::exists(&v, a, body)
                }
            }
            _ => self.atom(),
        }
    }
}

/// Renames every bound variable to a fresh name.
pub fn alpha_variant(phi: &Formula, suffix: &str) -> Formula {
    fn term(t: &Term, map: &[(String, String)]) -> Term {
        match t {
            Term::Var(v, s) => {
                let name = map.iter().rev().find(|(a, _)| a == v).map(|(_, b)| b.clone()).unwrap_or(v.clone());
                Term::Var(name, s.clone())
            }
            Term::Apply(n, args) => Term::Apply(n.clone(), args.iter().map(|a| term(a, map)).collect()),
            Term::Arith(op, a, b) => Term::Arith(*op, Box::new(term(a, map)), Box::new(term(b, map))),
            other => other.clone(),
        }
    }
    fn go(phi: &Formula, map: &mut Vec<(String, String)>, suffix: &str) -> Formula {
        let b = |x: &Formula, map: &mut Vec<(String, String)>| Box::new(go(x, map, suffix));
        match phi {
            Formula::Pred(n, ts) => Formula::Pred(n.clone(), ts.iter().map(|t| term(t, map)).collect()),
            Formula::Equals(a, c) => Formula::Equals(term(a, map), term(c, map)),
            Formula::Compare(op, a, c) => Formula::Compare(*op, term(a, map), term(c, map)),
            Formula::MemberOf(t, set) => Formula::MemberOf(term(t, map), set.clone()),
            Formula::Not(a) => Formula::Not(b(a, map)),
            Formula::And(xs) => Formula::And(xs.iter().map(|x| go(x, map, suffix)).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|x| go(x, map, suffix)).collect()),
            Formula::Implies(x, y) => Formula::Implies(b(x, map), b(y, map)),
            Formula::Iff(x, y) => Formula::Iff(b(x, map), b(y, map)),
            Formula::Forall(v, s, body) | Formula::Exists(v, s, body) => {
                let fresh = format!("{v}{suffix}");
                map.push((v.clone(), fresh.clone()));
                let body = b(body, map);
                map.pop();
                if matches!(phi, Formula::Forall(..)) {
                    Formula::Forall(fresh, s.clone(), body)
                } else {
                    Formula::Exists(fresh, s.clone(), body)
                }
            }
            other => other.clone(),
        }
    }
    go(phi, &mut Vec::new(), suffix)
}

/// Path to an SMT solver, from `AVC_SOLVER` or `z3` on the path.
pub fn solver_command() -> Option<String> {
    if let Ok(cmd) = std::env::var("AVC_SOLVER") {
        if !cmd.trim().is_empty() {
            return Some(cmd);
        }
    }
    let ok = Command::new("z3").arg("-version").output().map(|o| o.status.success()).unwrap_or(false);
    ok.then(|| "z3 -in".to_string())
}

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub const TITLES: &[&str] = &["Root claim", "Shape of \"output\"", "a\\b", "Weights", ""];

pub fn hint(g: &mut Gen) -> VerifyHint {
    let word = |g: &mut Gen| ConfigValue::Ident(g.pick(&["assess", "score", "reasons", "Real"]).to_string());
    let value = |g: &mut Gen| match g.below(5) {
        0 => ConfigValue::Ident("ListStr".into()),
        1 => ConfigValue::Str("a \"b\"".into()),
        2 => ConfigValue::Number(Rational::new(g.int(-50, 50), 10)),
        3 => ConfigValue::Set(vec!["flag".into(), "ok".into()]),
        _ => ConfigValue::List(vec!["ok".into(), "review".into(), "flag".into()]),
    };
    match g.below(4) {
        0 => VerifyHint {
            verifier: "output-shape".into(),
            config: vec![
                ("fn".into(), word(g)),
                ("score".into(), value(g)),
                ("decision".into(), value(g)),
                ("reasons".into(), value(g)),
            ],
        },
        1 => VerifyHint {
            verifier: "string-inventory".into(),
            config: vec![("fn".into(), word(g)), ("sink".into(), word(g))],
        },
        2 => VerifyHint {
            verifier: "threshold-ladder".into(),
            config: vec![("fn".into(), word(g)), ("score".into(), word(g)), ("order".into(), value(g))],
        },
        _ => VerifyHint {
            verifier: "const-relation".into(),
            config: vec![("low".into(), word(g)), ("high".into(), word(g))],
        },
    }
}

/// A random valid rationale over the test signature.
pub fn rationale(g: &mut Gen) -> Rationale {
    let n = 1 + g.below(12);
    let ids: Vec<String> = (0..n).map(|i| if i == 0 { "C_R".to_string() } else { format!("C{i}") }).collect();
    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 1..n {
        children.entry(g.below(i)).or_default().push(i);
    }
    let mut sig = logic_sig();
    let mut claims = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let statement = if g.chance(0.6) {
            let phi = FormulaGen::new(g).formula(3);
            sig.absorb_literals(&phi);
            Statement::Formal(phi)
        } else {
            Statement::Informal(g.pick(INFORMAL).to_string())
        };
        let leaf = !children.contains_key(&i);
        let verify = (leaf && g.chance(0.5)).then(|| hint(g));
        let note = g.chance(0.3).then(|| "checked by hand; see \"notes\"".to_string());
        claims.insert(id.clone(), Claim { id: id.clone(), title: g.pick(TITLES).to_string(), statement, verify, note });
    }
    let decompositions = children
        .into_iter()
        .map(|(p, cs)| Decomposition {
            parent: ids[p].clone(),
            children: cs.into_iter().map(|c| ids[c].clone()).collect(),
        })
        .collect();
    let subject = g.chance(0.5).then(|| SubjectRef { path: "dir/prog.sl".into(), sha256: "ab".repeat(32) });
    Rationale { name: "generated".into(), signature: sig, root: "C_R".into(), claims, decompositions, subject }
}

pub fn dsl_round_trip(seed: u64) -> Check {
    let r = rationale(&mut Gen::new(seed));
    let diags = validate_structure(&r);
    ensure!(diags.is_empty(), "{diags:?}");
    let text = print_rationale(&r);
    let back = parse_rationale(&text).map_err(|e| format!("{e}\n{text}"))?;
    ensure!(back == r, "reparsed rationale differs\n{text}");
    ensure!(print_rationale(&back) == text, "printing is not stable\n{text}");
    Ok(())
}

pub fn interchange_round_trip(seed: u64) -> Check {
    let r = rationale(&mut Gen::new(seed));
    let json = serde_json::to_string_pretty(&to_interchange(&r)).unwrap();
    let back = from_interchange(&json).map_err(|e| format!("{e}\n{json}"))?;
    ensure!(back == r, "interchange changed the rationale\n{json}");
    Ok(())
}

pub fn golden_dir() -> PathBuf {
    repo_path("crates/core/tests/golden")
}

pub fn smt_script(r: &Rationale, parent: &str) -> String {
    let (premises, conclusion) = r.inference(parent).unwrap();
    emit_smt(&r.signature, &premises, &conclusion).unwrap()
}

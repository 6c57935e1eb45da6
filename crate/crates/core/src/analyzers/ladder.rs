use std::collections::{BTreeMap, BTreeSet};

use super::{function, Evidence, EvidenceDetails, EvidenceStatus, Rung, Sample, VerifierError};
use crate::rational::Rational;
use crate::subject::{
    extract_constants, interpret, AssignOp, BinOp, Expr, ExprKind, ExternTable, FunctionDef, Literal, SlValue, Span,
    Stmt, StmtKind, SubjectProgram,
};

/// Offset around each threshold in the fallback sampling grid.
pub const LADDER_EPSILON: (i64, i64) = (1, 1_000_000);

const STRENGTHENING: &str = "checked the decision ladder on the score variable before any output rounding; \
                             monotonicity of the ladder implies monotonicity in the score it reads";

fn touches(s: &Stmt, var: &str) -> bool {
    let mut hit = false;
    s.visit(&mut |s| match &s.kind {
        StmtKind::Assign { target, .. } | StmtKind::For { var: target, .. } => hit |= target == var,
        _ => {}
    });
    hit
}

fn number(e: &Expr, constants: &BTreeMap<String, Literal>) -> Option<Rational> {
    match &e.kind {
        ExprKind::Var(v) => constants.get(v).and_then(Literal::as_num).cloned(),
        _ => e.as_literal().and_then(|l| l.as_num().cloned()),
    }
}

fn single_literal_assign<'a>(body: &'a [Stmt], var: &str) -> Option<&'a str> {
    match body {
        [Stmt { kind: StmtKind::Assign { target, op: AssignOp::Set, value, .. }, .. }] if target == var => {
            match &value.kind {
                ExprKind::Lit(Literal::Str(s)) => Some(s),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Matches `if s >= t1: d = a elif s >= t2: d = b ... else: d = z`.
fn match_ladder(
    s: &Stmt,
    score: &str,
    decision: &str,
    rank: &BTreeMap<&str, usize>,
    constants: &BTreeMap<String, Literal>,
) -> Option<(Vec<Rung>, String)> {
    let StmtKind::If { branches, otherwise: Some(otherwise) } = &s.kind else { return None };
    let mut rungs = Vec::new();
    for (cond, body) in branches {
        let ExprKind::Bin(BinOp::Ge | BinOp::Gt, lhs, rhs) = &cond.kind else { return None };
        if !matches!(&lhs.kind, ExprKind::Var(v) if v == score) {
            return None;
        }
        let threshold = number(rhs, constants)?;
        let d = single_literal_assign(body, decision)?;
        rank.get(d)?;
        rungs.push(Rung { threshold, decision: d.to_string() });
    }
    let last = single_literal_assign(otherwise, decision)?;
    let last_rank = *rank.get(last)?;
    let descending = rungs
        .windows(2)
        .all(|w| w[0].threshold > w[1].threshold && rank[w[0].decision.as_str()] > rank[w[1].decision.as_str()]);
    let above_last = rungs.last().is_none_or(|r| rank[r.decision.as_str()] > last_rank);
    (descending && above_last).then(|| (rungs, last.to_string()))
}

fn grid(thresholds: &BTreeSet<Rational>) -> Vec<Rational> {
    let eps = Rational::new(LADDER_EPSILON.0, LADDER_EPSILON.1);
    let one = Rational::from_integer(1);
    let half = Rational::new(1, 2);
    let mut points = BTreeSet::new();
    let ts: Vec<&Rational> = thresholds.iter().collect();
    for t in &ts {
        points.insert(*t - &eps);
        points.insert(*t + &eps);
    }
    for w in ts.windows(2) {
        points.insert(&(w[0] + w[1]) * &half);
    }
    if let (Some(lo), Some(hi)) = (ts.first(), ts.last()) {
        points.insert(*lo - &one);
        points.insert(*hi + &one);
    }
    points.into_iter().collect()
}

fn thresholds_in(stmts: &[&Stmt], constants: &BTreeMap<String, Literal>) -> BTreeSet<Rational> {
    let mut out = BTreeSet::new();
    for s in stmts {
        s.visit(&mut |s| {
            for e in s.exprs() {
                e.visit(&mut |e| {
                    if let ExprKind::Bin(op, a, b) = &e.kind {
                        if matches!(op, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne) {
                            out.extend(number(a, constants));
                            out.extend(number(b, constants));
                        }
                    }
                });
            }
        });
    }
    out
}

/// Runs the statements that compute `decision` as a function of `score`
/// alone, over the sampling grid.
fn sample(prog: &SubjectProgram, stmts: &[&Stmt], score: &str, decision: &str, points: &[Rational]) -> Vec<Sample> {
    let mut body: Vec<Stmt> = stmts.iter().map(|s| (*s).clone()).collect();
    let span = Span::default();
    body.push(Stmt { kind: StmtKind::Return(Expr::new(ExprKind::Var(decision.to_string()), span)), span });
    let name = "__decision";
    let mut probe = prog.clone();
    probe.functions = vec![FunctionDef { name: name.into(), params: vec![score.to_string()], body, span }];
    let mut externs: ExternTable = BTreeMap::new();
    for e in &prog.externs {
        externs.insert(e.name.clone(), Box::new(|_| Err("extern not available while sampling".to_string())));
    }
    points
        .iter()
        .filter_map(|p| match interpret(&probe, name, vec![SlValue::Num(p.clone())], &externs) {
            Ok(SlValue::Str(d)) => Some(Sample { score: p.clone(), decision: d }),
            _ => None,
        })
        .collect()
}

/// The smallest sample with a later, higher-scoring sample of lower rank,
/// paired with the highest such sample.
fn violation(samples: &[Sample], rank: &BTreeMap<&str, usize>) -> Option<(Sample, Sample)> {
    let ranked: Vec<(&Sample, usize)> =
        samples.iter().filter_map(|s| rank.get(s.decision.as_str()).map(|r| (s, *r))).collect();
    for (i, (a, ra)) in ranked.iter().enumerate() {
        if let Some((b, _)) = ranked[i + 1..].iter().rev().find(|(b, rb)| rb < ra && b.score > a.score) {
            return Some(((*a).clone(), (*b).clone()));
        }
    }
    None
}

pub fn verify_threshold_ladder(
    prog: &SubjectProgram,
    fname: &str,
    score: &str,
    order: &[String],
) -> Result<Evidence, VerifierError> {
    let distinct: BTreeSet<&String> = order.iter().collect();
    if order.len() < 2 || distinct.len() != order.len() {
        return Err(VerifierError::BadConfig("decision order needs at least two distinct literals".into()));
    }
    let f = function(prog, fname)?;
    let known = f.params.iter().any(|p| p == score) || f.body.iter().any(|s| touches(s, score));
    if !known {
        return Err(VerifierError::ScoreVarNotFound { function: fname.to_string(), var: score.to_string() });
    }
    let rank: BTreeMap<&str, usize> = order.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    let constants = extract_constants(prog);

    let mut targets = BTreeSet::new();
    f.visit_stmts(&mut |s| {
        if let StmtKind::Assign { target, value, .. } = &s.kind {
            if matches!(&value.kind, ExprKind::Lit(Literal::Str(d)) if rank.contains_key(d.as_str())) {
                targets.insert(target.clone());
            }
        }
    });
    let decision = match targets.len() {
        1 => targets.pop_first(),
        _ => None,
    };
    let stmts: Vec<&Stmt> = match &decision {
        Some(d) => f.body.iter().filter(|s| touches(s, d)).collect(),
        None => Vec::new(),
    };

    let details = |status, summary: String, ladder: Option<(Vec<Rung>, String)>, samples, witness| {
        let (ladder, otherwise) = match ladder {
            Some((l, o)) => (Some(l), Some(o)),
            None => (None, None),
        };
        Evidence {
            claim_id: String::new(),
            verifier: "threshold-ladder".into(),
            status,
            summary,
            details: EvidenceDetails::ThresholdLadder {
                function: fname.to_string(),
                score_var: score.to_string(),
                decision_var: decision.clone(),
                ladder,
                otherwise,
                samples,
                witness,
                strengthening: STRENGTHENING.into(),
            },
            subject_hash: prog.source_hash.clone(),
        }
    };

    let Some(d) = decision.clone() else {
        let why = if targets.is_empty() {
            "no variable is assigned a decision literal".to_string()
        } else {
            format!(
                "several variables receive decision literals: {}",
                targets.into_iter().collect::<Vec<_>>().join(", ")
            )
        };
        return Ok(details(EvidenceStatus::Unknown, why, None, Vec::new(), None));
    };
    if let [only] = stmts.as_slice() {
        if let Some(ladder) = match_ladder(only, score, &d, &rank, &constants) {
            let shown: Vec<String> =
                ladder.0.iter().map(|r| format!("{} >= {} -> {}", score, r.threshold, r.decision)).collect();
            let summary = format!("ladder {} else {}", shown.join(", "), ladder.1);
            return Ok(details(EvidenceStatus::Verified, summary, Some(ladder), Vec::new(), None));
        }
    }
    let points = grid(&thresholds_in(&stmts, &constants));
    let samples = sample(prog, &stmts, score, &d, &points);
    match violation(&samples, &rank) {
        Some((a, b)) => {
            let summary =
                format!("{score} = {} gives {} but {score} = {} gives {}", a.score, a.decision, b.score, b.decision);
            Ok(details(EvidenceStatus::Refuted, summary, None, samples, Some((a, b))))
        }
        None => {
            let summary = format!(
                "{d} is not set by a threshold ladder on {score}; {} samples found no violation",
                samples.len()
            );
            Ok(details(EvidenceStatus::Unknown, summary, None, samples, None))
        }
    }
}

use std::collections::BTreeMap;

use super::{Evidence, EvidenceDetails, EvidenceStatus, VerifierError};
use crate::logic::{ArithOp, CmpOp, Formula, Term};
use crate::rational::Rational;
use crate::subject::{extract_constants, Literal, SubjectProgram};

fn malformed(msg: String) -> VerifierError {
    VerifierError::MalformedBinding(msg)
}

fn term(t: &Term, env: &BTreeMap<String, Rational>) -> Result<Rational, VerifierError> {
    match t {
        Term::Num(n) => Ok(n.clone()),
        Term::Apply(name, args) if args.is_empty() => {
            env.get(name).cloned().ok_or_else(|| malformed(format!("`{name}` has no binding")))
        }
        Term::Arith(op, a, b) => {
            let (a, b) = (term(a, env)?, term(b, env)?);
            Ok(match op {
                ArithOp::Add => &a + &b,
                ArithOp::Sub => &a - &b,
                ArithOp::Mul => &a * &b,
            })
        }
        _ => Err(malformed(format!("unsupported term in relation: {t}"))),
    }
}

fn eval(phi: &Formula, env: &BTreeMap<String, Rational>) -> Result<bool, VerifierError> {
    Ok(match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Equals(a, b) => term(a, env)? == term(b, env)?,
        Formula::Compare(CmpOp::Le, a, b) => term(a, env)? <= term(b, env)?,
        Formula::Compare(CmpOp::Lt, a, b) => term(a, env)? < term(b, env)?,
        Formula::Not(a) => !eval(a, env)?,
        Formula::And(xs) => {
            let mut all = true;
            for x in xs {
                all &= eval(x, env)?;
            }
            all
        }
        Formula::Or(xs) => {
            let mut any = false;
            for x in xs {
                any |= eval(x, env)?;
            }
            any
        }
        Formula::Implies(a, b) => !eval(a, env)? || eval(b, env)?,
        Formula::Iff(a, b) => eval(a, env)? == eval(b, env)?,
        other => return Err(malformed(format!("unsupported formula in relation: {other}"))),
    })
}

/// Evaluates `relation` exactly after replacing each logical constant with
/// the program constant it is bound to.
pub fn verify_const_relation(
    prog: &SubjectProgram,
    relation: &Formula,
    binding: &BTreeMap<String, String>,
) -> Result<Evidence, VerifierError> {
    for name in relation.constants_used() {
        if !binding.contains_key(&name) {
            return Err(malformed(format!("`{name}` has no binding")));
        }
    }
    let constants = extract_constants(prog);
    let mut env = BTreeMap::new();
    let mut values = BTreeMap::new();
    let mut missing = Vec::new();
    for (logical, program) in binding {
        match constants.get(program) {
            Some(Literal::Num(n)) => {
                env.insert(logical.clone(), n.clone());
                values.insert(program.clone(), n.to_string());
            }
            Some(other) => return Err(malformed(format!("`{program}` is not numeric: {}", other.to_value()))),
            None => missing.push(program.clone()),
        }
    }
    let (status, summary) = if missing.is_empty() {
        if eval(relation, &env)? {
            (EvidenceStatus::Verified, "relation holds for the program constants".to_string())
        } else {
            let shown: Vec<String> = values.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            (EvidenceStatus::Refuted, format!("relation fails for {}", shown.join(", ")))
        }
    } else {
        // Still reject a relation the evaluator cannot handle.
        let probe: BTreeMap<String, Rational> = binding.keys().map(|k| (k.clone(), Rational::zero())).collect();
        eval(relation, &probe)?;
        (EvidenceStatus::Unknown, format!("no single constant definition for {}", missing.join(", ")))
    };
    Ok(Evidence {
        claim_id: String::new(),
        verifier: "const-relation".into(),
        status,
        summary,
        details: EvidenceDetails::ConstRelation {
            relation: relation.to_string(),
            binding: binding.clone(),
            values,
            missing,
        },
        subject_hash: prog.source_hash.clone(),
    })
}

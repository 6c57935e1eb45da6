use std::collections::BTreeSet;

use super::domain::{AbstractValue, Evaluator};
use super::{function, Evidence, EvidenceDetails, EvidenceStatus, ReturnReport, VerifierError};
use crate::rationale::{ConfigValue, VerifyHint};
use crate::subject::SubjectProgram;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldConstraint {
    Numeric,
    Str,
    ListStr,
    OneOf(BTreeSet<String>),
}

impl FieldConstraint {
    fn check(&self, v: &AbstractValue) -> (EvidenceStatus, Option<String>) {
        use AbstractValue::*;
        use EvidenceStatus::*;
        let wrong_kind = |what: &str| (Refuted, Some(format!("expected {what}, found {v}")));
        match self {
            FieldConstraint::Numeric => match v {
                _ if v.is_numeric() => (Verified, None),
                Top => (Unknown, Some("value not determined".into())),
                _ => wrong_kind("a number"),
            },
            FieldConstraint::Str => match v {
                _ if v.is_string() => (Verified, None),
                Top => (Unknown, Some("value not determined".into())),
                _ => wrong_kind("a string"),
            },
            FieldConstraint::ListStr => match v {
                ListOfStrLits(_, false) => (Verified, None),
                ListOfStrLits(_, true) | Top => (Unknown, Some(format!("elements not determined: {v}"))),
                _ => wrong_kind("a list of strings"),
            },
            FieldConstraint::OneOf(allowed) => match v {
                StrLits(s) | EnumStr(s) if s.is_subset(allowed) => (Verified, None),
                StrLits(s) => (Refuted, Some(format!("{} is not an allowed value", s.iter().next().unwrap()))),
                EnumStr(_) | AnyStr | Top => (Unknown, Some(format!("may be outside the allowed set: {v}"))),
                _ => wrong_kind("one of the allowed strings"),
            },
        }
    }
}

/// Required record fields of every returned value.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ShapeSpec {
    pub fields: Vec<(String, FieldConstraint)>,
}

impl ShapeSpec {
    pub fn from_hint(hint: &VerifyHint) -> Result<ShapeSpec, VerifierError> {
        let mut fields = Vec::new();
        for (k, v) in &hint.config {
            if k == "fn" {
                continue;
            }
            let c = match v {
                ConfigValue::Ident(s) => match s.as_str() {
                    "Real" | "Int" => FieldConstraint::Numeric,
                    "Str" => FieldConstraint::Str,
                    "ListStr" => FieldConstraint::ListStr,
                    other => return Err(VerifierError::BadConfig(format!("unknown field sort `{other}` for `{k}`"))),
                },
                ConfigValue::Set(xs) | ConfigValue::List(xs) => FieldConstraint::OneOf(xs.iter().cloned().collect()),
                _ => return Err(VerifierError::BadConfig(format!("field `{k}` needs a sort or a string set"))),
            };
            fields.push((k.clone(), c));
        }
        Ok(ShapeSpec { fields })
    }
}

fn check_return(spec: &ShapeSpec, v: &AbstractValue) -> (EvidenceStatus, Option<String>) {
    let AbstractValue::RecordShape(fields) = v else {
        return match v {
            AbstractValue::Top => (EvidenceStatus::Unknown, Some("returned value not determined".into())),
            _ => (EvidenceStatus::Refuted, Some(format!("returns {v}, not a record"))),
        };
    };
    let mut status = EvidenceStatus::Verified;
    let mut problem = None;
    for (name, c) in &spec.fields {
        let (s, p) = match fields.get(name) {
            Some(fv) => c.check(fv),
            None => (EvidenceStatus::Refuted, Some("field missing".into())),
        };
        let p = p.map(|p| format!("{name}: {p}"));
        match s {
            EvidenceStatus::Refuted => return (s, p),
            EvidenceStatus::Unknown if status == EvidenceStatus::Verified => {
                status = s;
                problem = p;
            }
            _ => {}
        }
    }
    (status, problem)
}

pub fn verify_output_shape(prog: &SubjectProgram, fname: &str, spec: &ShapeSpec) -> Result<Evidence, VerifierError> {
    let f = function(prog, fname)?;
    let returns: Vec<ReturnReport> = Evaluator::returns_of(prog, f)
        .into_iter()
        .map(|r| {
            let (status, problem) = check_return(spec, &r.value);
            ReturnReport { line: r.span.line, col: r.span.col, value: r.value.to_string(), status, problem }
        })
        .collect();
    let witness = returns.iter().find(|r| r.status == EvidenceStatus::Refuted).cloned();
    let status = if witness.is_some() {
        EvidenceStatus::Refuted
    } else if !returns.is_empty() && returns.iter().all(|r| r.status == EvidenceStatus::Verified) {
        EvidenceStatus::Verified
    } else {
        EvidenceStatus::Unknown
    };
    let summary = match (&witness, status) {
        (Some(w), _) => {
            format!("return at {}:{} violates the shape: {}", w.line, w.col, w.problem.as_deref().unwrap_or(""))
        }
        (None, EvidenceStatus::Verified) => format!("all {} return sites have the declared shape", returns.len()),
        _ => {
            let open = returns.iter().find(|r| r.status == EvidenceStatus::Unknown);
            match open {
                Some(r) => {
                    format!("return at {}:{} undetermined: {}", r.line, r.col, r.problem.as_deref().unwrap_or(""))
                }
                None => "no return sites".into(),
            }
        }
    };
    Ok(Evidence {
        claim_id: String::new(),
        verifier: "output-shape".into(),
        status,
        summary,
        details: EvidenceDetails::OutputShape { function: fname.to_string(), returns, witness },
        subject_hash: prog.source_hash.clone(),
    })
}

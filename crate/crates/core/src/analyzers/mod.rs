//! Static verifiers for leaf claims, and the registry that dispatches
//! verify hints to them.

pub mod domain;
mod inventory;
mod ladder;
mod relation;
mod shape;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;
use crate::rationale::{ConfigValue, Rationale, VerifyHint};
use crate::subject::{FunctionDef, SubjectProgram};

pub use domain::AbstractValue;
pub use inventory::verify_string_inventory;
pub use ladder::{verify_threshold_ladder, LADDER_EPSILON};
pub use relation::verify_const_relation;
pub use shape::{verify_output_shape, FieldConstraint, ShapeSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvidenceStatus {
    Verified,
    Refuted,
    Unknown,
}

impl fmt::Display for EvidenceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvidenceStatus::Verified => "Verified",
            EvidenceStatus::Refuted => "Refuted",
            EvidenceStatus::Unknown => "Unknown",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSite {
    pub line: usize,
    pub col: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnReport {
    pub line: usize,
    pub col: usize,
    pub value: String,
    pub status: EvidenceStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rung {
    pub threshold: Rational,
    pub decision: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub score: Rational,
    pub decision: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", rename_all_fields = "camelCase")]
pub enum EvidenceDetails {
    OutputShape {
        function: String,
        returns: Vec<ReturnReport>,
        witness: Option<ReturnReport>,
    },
    StringInventory {
        function: String,
        sink: String,
        inventory: Vec<String>,
        claimed: Vec<String>,
        non_literal: Vec<SourceSite>,
        witness: Option<SourceSite>,
    },
    ThresholdLadder {
        function: String,
        score_var: String,
        decision_var: Option<String>,
        ladder: Option<Vec<Rung>>,
        otherwise: Option<String>,
        samples: Vec<Sample>,
        witness: Option<(Sample, Sample)>,
        strengthening: String,
    },
    ConstRelation {
        relation: String,
        binding: BTreeMap<String, String>,
        values: BTreeMap<String, String>,
        missing: Vec<String>,
    },
    Error {
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Evidence {
    pub claim_id: String,
    pub verifier: String,
    pub status: EvidenceStatus,
    pub summary: String,
    pub details: EvidenceDetails,
    pub subject_hash: String,
}

impl Evidence {
    /// Evidence counts only against the program it was computed from.
    pub fn is_current(&self, prog: &SubjectProgram) -> bool {
        self.subject_hash == prog.source_hash
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum VerifierError {
    #[error("no function `{0}` in the subject program")]
    UnknownFunction(String),
    #[error("`{sink}` is not a list variable of `{function}`")]
    SinkNotFound { function: String, sink: String },
    #[error("`{var}` is not a variable of `{function}`")]
    ScoreVarNotFound { function: String, var: String },
    #[error("malformed binding: {0}")]
    MalformedBinding(String),
    #[error("bad verifier configuration: {0}")]
    BadConfig(String),
    #[error("no verifier named `{0}`")]
    UnknownVerifier(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("stale subject: rationale expects {expected} but the program hashes to {actual}")]
pub struct StaleSubject {
    pub expected: String,
    pub actual: String,
}

pub(crate) fn function<'a>(prog: &'a SubjectProgram, name: &str) -> Result<&'a FunctionDef, VerifierError> {
    prog.function(name).ok_or_else(|| VerifierError::UnknownFunction(name.to_string()))
}

fn word<'a>(hint: &'a VerifyHint, key: &str) -> Result<&'a str, VerifierError> {
    hint.get(key)
        .and_then(ConfigValue::as_word)
        .ok_or_else(|| VerifierError::BadConfig(format!("`{}` needs `{key}=<name>`", hint.verifier)))
}

/// Runs the verifier named by `hint` for claim `claim_id`.
pub fn run_hint(
    r: &Rationale,
    claim_id: &str,
    hint: &VerifyHint,
    prog: &SubjectProgram,
) -> Result<Evidence, VerifierError> {
    let mut ev = match hint.verifier.as_str() {
        "output-shape" => {
            let spec = ShapeSpec::from_hint(hint)?;
            verify_output_shape(prog, word(hint, "fn")?, &spec)?
        }
        "string-inventory" => {
            let claim = &r.claims[claim_id];
            let phi = claim.statement.formula();
            let claimed = phi
                .member_set()
                .ok_or_else(|| VerifierError::BadConfig(format!("claim {claim_id} has no membership formula")))?;
            verify_string_inventory(prog, word(hint, "fn")?, word(hint, "sink")?, claimed)?
        }
        "threshold-ladder" => {
            let order = hint
                .get("order")
                .and_then(ConfigValue::as_strings)
                .ok_or_else(|| VerifierError::BadConfig("threshold-ladder needs `order=[...]`".into()))?;
            verify_threshold_ladder(prog, word(hint, "fn")?, word(hint, "score")?, order)?
        }
        "const-relation" => {
            let mut binding = BTreeMap::new();
            for (k, v) in &hint.config {
                match v {
                    ConfigValue::Ident(c) => binding.insert(k.clone(), c.clone()),
                    _ => return Err(VerifierError::MalformedBinding(format!("`{k}` must name a program constant"))),
                };
            }
            verify_const_relation(prog, &r.claims[claim_id].statement.formula(), &binding)?
        }
        other => return Err(VerifierError::UnknownVerifier(other.to_string())),
    };
    ev.claim_id = claim_id.to_string();
    Ok(ev)
}

fn error_evidence(claim_id: &str, hint: &VerifyHint, prog: &SubjectProgram, e: VerifierError) -> Evidence {
    Evidence {
        claim_id: claim_id.to_string(),
        verifier: hint.verifier.clone(),
        status: EvidenceStatus::Unknown,
        summary: e.to_string(),
        details: EvidenceDetails::Error { message: e.to_string() },
        subject_hash: prog.source_hash.clone(),
    }
}

/// Evidence for every hinted leaf. A verifier that cannot run on its
/// configuration yields Unknown evidence carrying the error.
pub fn run_verifiers(r: &Rationale, prog: &SubjectProgram) -> Result<BTreeMap<String, Evidence>, StaleSubject> {
    if let Some(s) = &r.subject {
        if s.sha256 != prog.source_hash {
            return Err(StaleSubject { expected: s.sha256.clone(), actual: prog.source_hash.clone() });
        }
    }
    let jobs: Vec<(&str, &VerifyHint)> = r
        .claims
        .values()
        .filter(|c| r.is_leaf(&c.id))
        .filter_map(|c| c.verify.as_ref().map(|h| (c.id.as_str(), h)))
        .collect();
    let results = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(id, hint)| {
                scope.spawn(move || run_hint(r, id, hint, prog).unwrap_or_else(|e| error_evidence(id, hint, prog, e)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("verifier panicked")).collect::<Vec<_>>()
    });
    Ok(results.into_iter().map(|e| (e.claim_id.clone(), e)).collect())
}

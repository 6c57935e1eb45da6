//! Whole-rationale analysis: every inference check and every verifier.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analyzers::{run_verifiers, EvidenceStatus, StaleSubject};
use crate::assurance::MachineResults;
use crate::inference::{check_inference_with, InferenceStatus, InferenceVerdict, SmtRunner};
use crate::rationale::Rationale;
use crate::subject::SubjectProgram;

/// Verdict per decomposition parent. Checks run in parallel; the map is
/// independent of scheduling.
pub fn check_decompositions(r: &Rationale, runner: Option<&dyn SmtRunner>) -> BTreeMap<String, InferenceVerdict> {
    let jobs: Vec<&str> = r.decompositions.iter().map(|d| d.parent.as_str()).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&parent| {
                scope.spawn(move || {
                    let (premises, conclusion) = r.inference(parent).expect("decomposition parent");
                    (parent.to_string(), check_inference_with(&r.signature, &premises, &conclusion, runner))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("inference check panicked")).collect()
    })
}

/// Inference verdicts, plus verifier evidence when a program is given.
pub fn analyze(
    r: &Rationale,
    prog: Option<&SubjectProgram>,
    runner: Option<&dyn SmtRunner>,
) -> Result<MachineResults, StaleSubject> {
    let (verdicts, evidence) = std::thread::scope(|scope| {
        let evidence = scope.spawn(|| prog.map(|p| run_verifiers(r, p)).transpose());
        let verdicts = check_decompositions(r, runner);
        (verdicts, evidence.join().expect("verifiers panicked"))
    });
    Ok(MachineResults { evidence: evidence?.unwrap_or_default(), verdicts })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Tally {
    pub machine_valid: usize,
    pub machine_invalid: usize,
    pub unknown_inferences: usize,
    pub verified: usize,
    pub refuted: usize,
    pub unknown_evidence: usize,
}

impl Tally {
    pub fn of(m: &MachineResults) -> Tally {
        let mut t = Tally::default();
        for v in m.verdicts.values() {
            match v.status {
                InferenceStatus::MachineValid => t.machine_valid += 1,
                InferenceStatus::MachineInvalid => t.machine_invalid += 1,
                InferenceStatus::Unknown => t.unknown_inferences += 1,
            }
        }
        for e in m.evidence.values() {
            match e.status {
                EvidenceStatus::Verified => t.verified += 1,
                EvidenceStatus::Refuted => t.refuted += 1,
                EvidenceStatus::Unknown => t.unknown_evidence += 1,
            }
        }
        t
    }

    pub fn checks(&self) -> usize {
        self.machine_valid
            + self.machine_invalid
            + self.unknown_inferences
            + self.verified
            + self.refuted
            + self.unknown_evidence
    }

    /// Any machine result that contradicts the rationale.
    pub fn has_findings(&self) -> bool {
        self.machine_invalid > 0 || self.refuted > 0
    }
}

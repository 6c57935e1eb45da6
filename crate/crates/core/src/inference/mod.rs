//! Validity of decomposition inferences `(children) ⟹ parent`.
//!
//! Tier 1 normalizes and atomizes the claims and decides the propositional
//! skeleton with a built-in DPLL search; it can prove validity but never
//! refutes it. Tier 2 hands an SMT-LIB script to an external solver.

pub mod sat;
pub mod smt;
pub mod solver;

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::logic::{atomize, normalize, well_formed, Formula, Prop, Signature};
pub use smt::{emit_smt, SmtError};
pub use solver::{ProcessSolver, SmtRunner, SolverConfig, SolverConfigError, SolverOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InferenceStatus {
    MachineValid,
    MachineInvalid,
    Unknown,
}

impl fmt::Display for InferenceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InferenceStatus::MachineValid => "MachineValid",
            InferenceStatus::MachineInvalid => "MachineInvalid",
            InferenceStatus::Unknown => "Unknown",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomValue {
    pub atom: String,
    pub value: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum VerdictDiagnostic {
    /// Tier 1: an abstract assignment falsifying the skeleton.
    Countermodel {
        assignment: Vec<AtomValue>,
    },
    /// Tier 2: the solver's model text.
    Model {
        reason: Option<String>,
        model: String,
    },
    Reason {
        reason: String,
    },
}

impl fmt::Display for VerdictDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictDiagnostic::Countermodel { assignment } => {
                f.write_str("abstract countermodel: ")?;
                for (i, a) in assignment.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "[{}] = {}", a.atom, a.value)?;
                }
                Ok(())
            }
            VerdictDiagnostic::Model { reason: Some(r), .. } => write!(f, "{r}; solver model attached"),
            VerdictDiagnostic::Model { reason: None, .. } => f.write_str("solver model attached"),
            VerdictDiagnostic::Reason { reason } => f.write_str(reason),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceVerdict {
    pub status: InferenceStatus,
    pub tier: u8,
    pub diagnostic: Option<VerdictDiagnostic>,
    #[serde(rename = "elapsedMs", with = "millis")]
    pub elapsed: Duration,
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

impl InferenceVerdict {
    fn unknown(tier: u8, reason: impl Into<String>, start: Instant) -> Self {
        InferenceVerdict {
            status: InferenceStatus::Unknown,
            tier,
            diagnostic: Some(VerdictDiagnostic::Reason { reason: reason.into() }),
            elapsed: start.elapsed(),
        }
    }
}

/// Resource cap for the Tier-1 search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tier1Budget {
    pub max_atoms: usize,
    pub max_decisions: usize,
}

impl Default for Tier1Budget {
    fn default() -> Self {
        Tier1Budget { max_atoms: 256, max_decisions: 1 << 20 }
    }
}

pub fn check_tier1(sig: &Signature, premises: &[Formula], conclusion: &Formula) -> InferenceVerdict {
    check_tier1_with(sig, premises, conclusion, Tier1Budget::default())
}

pub fn check_tier1_with(
    sig: &Signature,
    premises: &[Formula],
    conclusion: &Formula,
    budget: Tier1Budget,
) -> InferenceVerdict {
    let start = Instant::now();
    for phi in premises.iter().chain(std::iter::once(conclusion)) {
        if let Some(d) = well_formed(sig, phi).into_iter().next() {
            return InferenceVerdict::unknown(1, format!("ill-formed statement: {d}"), start);
        }
    }
    let normalized: Vec<Formula> = premises.iter().chain(std::iter::once(conclusion)).map(normalize).collect();
    let (mut skeletons, table) = atomize(&normalized);
    if table.len() > budget.max_atoms {
        return InferenceVerdict::unknown(
            1,
            format!("budget: {} atoms exceed the cap of {}", table.len(), budget.max_atoms),
            start,
        );
    }
    let concl = skeletons.pop().expect("conclusion skeleton");
    let mut parts = skeletons;
    parts.push(Prop::Not(Box::new(concl)));

    let mut cnf = sat::Cnf::new(table.len());
    let root = cnf.encode(&Prop::And(parts));
    cnf.add(vec![root]);
    match sat::solve(&cnf, budget.max_decisions) {
        sat::SatResult::Unsat => InferenceVerdict {
            status: InferenceStatus::MachineValid,
            tier: 1,
            diagnostic: None,
            elapsed: start.elapsed(),
        },
        sat::SatResult::Sat(model) => InferenceVerdict {
            status: InferenceStatus::Unknown,
            tier: 1,
            diagnostic: Some(VerdictDiagnostic::Countermodel {
                assignment: table
                    .iter()
                    .map(|(id, phi)| AtomValue { atom: phi.to_string(), value: model[id] })
                    .collect(),
            }),
            elapsed: start.elapsed(),
        },
        sat::SatResult::Budget => InferenceVerdict::unknown(1, "budget: decision limit reached", start),
    }
}

pub fn check_tier2(
    sig: &Signature,
    premises: &[Formula],
    conclusion: &Formula,
    cfg: &SolverConfig,
) -> InferenceVerdict {
    let start = Instant::now();
    if !cfg.enabled {
        return InferenceVerdict::unknown(2, "solver disabled", start);
    }
    match ProcessSolver::new(cfg) {
        Ok(runner) => check_tier2_with(sig, premises, conclusion, &runner),
        Err(e) => InferenceVerdict::unknown(2, format!("solver configuration: {e}"), start),
    }
}

/// Tier 2 against an arbitrary runner.
///
/// A `sat` answer is a genuine counterexample only when every statement
/// is fully formal. With informal atoms in play the model merely picks
/// truth values for text the solver cannot read, so the verdict stays
/// Unknown and the inference goes to the reviewer.
pub fn check_tier2_with(
    sig: &Signature,
    premises: &[Formula],
    conclusion: &Formula,
    runner: &dyn SmtRunner,
) -> InferenceVerdict {
    let start = Instant::now();
    let mut script = match emit_smt(sig, premises, conclusion) {
        Ok(s) => s,
        Err(e) => return InferenceVerdict::unknown(2, e.to_string(), start),
    };
    script.push_str("(get-model)\n");
    let informal = premises.iter().chain(std::iter::once(conclusion)).any(Formula::has_informal);
    let (status, diagnostic) = match runner.run(&script) {
        SolverOutcome::Unsat => (InferenceStatus::MachineValid, None),
        SolverOutcome::Sat { model } if informal => (
            InferenceStatus::Unknown,
            Some(VerdictDiagnostic::Model {
                reason: Some("countermodel assigns truth values to informal atoms".into()),
                model,
            }),
        ),
        SolverOutcome::Sat { model } => {
            (InferenceStatus::MachineInvalid, Some(VerdictDiagnostic::Model { reason: None, model }))
        }
        SolverOutcome::Unknown { reason } => (InferenceStatus::Unknown, Some(VerdictDiagnostic::Reason { reason })),
    };
    InferenceVerdict { status, tier: 2, diagnostic, elapsed: start.elapsed() }
}

/// Tier 1, then Tier 2 when Tier 1 is inconclusive and a solver is
/// enabled.
pub fn check_inference(
    sig: &Signature,
    premises: &[Formula],
    conclusion: &Formula,
    cfg: &SolverConfig,
) -> InferenceVerdict {
    if !cfg.enabled {
        return check_tier1(sig, premises, conclusion);
    }
    match ProcessSolver::new(cfg) {
        Ok(runner) => check_inference_with(sig, premises, conclusion, Some(&runner)),
        Err(e) => {
            let mut v = check_tier1(sig, premises, conclusion);
            if v.status == InferenceStatus::Unknown {
                v.diagnostic = Some(VerdictDiagnostic::Reason { reason: format!("solver configuration: {e}") });
            }
            v
        }
    }
}

pub fn check_inference_with(
    sig: &Signature,
    premises: &[Formula],
    conclusion: &Formula,
    runner: Option<&dyn SmtRunner>,
) -> InferenceVerdict {
    let start = Instant::now();
    let tier1 = check_tier1(sig, premises, conclusion);
    let Some(runner) = runner else { return tier1 };
    if tier1.status == InferenceStatus::MachineValid {
        return tier1;
    }
    let mut tier2 = check_tier2_with(sig, premises, conclusion, runner);
    tier2.elapsed = start.elapsed();
    tier2
}

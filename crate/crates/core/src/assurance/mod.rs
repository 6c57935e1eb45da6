//! Checklists, judgments and assurance-status propagation.

mod export;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyzers::{Evidence, EvidenceStatus};
use crate::inference::{InferenceStatus, InferenceVerdict};
use crate::rationale::Rationale;

pub use export::{checklist_json, checklist_markdown, CHECKLIST_VERSION, EMPTY_BANNER};

/// Machine results for one rationale: evidence per leaf, verdict per
/// decomposition parent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MachineResults {
    pub evidence: BTreeMap<String, Evidence>,
    pub verdicts: BTreeMap<String, InferenceVerdict>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ItemKind {
    Conjecture,
    Inference,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum MachineStatus {
    Evidence { verifier: String, status: EvidenceStatus, summary: String },
    Inference { status: InferenceStatus, tier: u8, diagnostic: Option<String> },
    None,
}

impl fmt::Display for MachineStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineStatus::Evidence { verifier, status, summary } => write!(f, "{status} by {verifier}: {summary}"),
            MachineStatus::Inference { status, tier, diagnostic: Some(d) } => write!(f, "{status} (tier {tier}): {d}"),
            MachineStatus::Inference { status, tier, diagnostic: None } => write!(f, "{status} (tier {tier})"),
            MachineStatus::None => f.write_str("not checked"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChecklistItem {
    pub id: String,
    pub kind: ItemKind,
    pub target: String,
    pub rendered_text: String,
    pub machine_status: MachineStatus,
    /// A solver or Tier-1 countermodel refutes this inference.
    pub counterexample: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AssuranceError {
    #[error("evidence for `{0}`, which is not a leaf claim")]
    DanglingEvidence(String),
    #[error("verdict for `{0}`, which has no decomposition")]
    DanglingVerdict(String),
    #[error("no checklist item `{0}`")]
    UnknownItem(String),
}

fn rendered_conjecture(r: &Rationale, id: &str) -> String {
    let c = &r.claims[id];
    format!("{}: {}", c.title, c.statement)
}

fn rendered_inference(r: &Rationale, parent: &str) -> String {
    format!("From {} conclude {parent}: {}", r.children(parent).join(", "), r.claims[parent].title)
}

/// Items needing a human verdict, in depth-first tree order: leaves
/// without Verified evidence and decompositions without a MachineValid
/// verdict.
pub fn extract_checklist(r: &Rationale, m: &MachineResults) -> Result<Vec<ChecklistItem>, AssuranceError> {
    for id in m.evidence.keys() {
        if !r.claims.contains_key(id) || !r.is_leaf(id) {
            return Err(AssuranceError::DanglingEvidence(id.clone()));
        }
    }
    for id in m.verdicts.keys() {
        if r.decomposition_of(id).is_none() {
            return Err(AssuranceError::DanglingVerdict(id.clone()));
        }
    }
    let mut items = Vec::new();
    for id in r.preorder() {
        if r.is_leaf(id) {
            let ev = m.evidence.get(id);
            if ev.is_some_and(|e| e.status == EvidenceStatus::Verified) {
                continue;
            }
            let machine_status = match ev {
                Some(e) => MachineStatus::Evidence {
                    verifier: e.verifier.clone(),
                    status: e.status,
                    summary: e.summary.clone(),
                },
                None => MachineStatus::None,
            };
            items.push(ChecklistItem {
                id: id.to_string(),
                kind: ItemKind::Conjecture,
                target: id.to_string(),
                rendered_text: rendered_conjecture(r, id),
                machine_status,
                counterexample: false,
            });
        } else {
            let v = m.verdicts.get(id);
            if v.is_some_and(|v| v.status == InferenceStatus::MachineValid) {
                continue;
            }
            let machine_status = match v {
                Some(v) => MachineStatus::Inference {
                    status: v.status,
                    tier: v.tier,
                    diagnostic: v.diagnostic.as_ref().map(|d| d.to_string()),
                },
                None => MachineStatus::None,
            };
            items.push(ChecklistItem {
                id: id.to_string(),
                kind: ItemKind::Inference,
                target: id.to_string(),
                rendered_text: rendered_inference(r, id),
                machine_status,
                counterexample: v.is_some_and(|v| v.status == InferenceStatus::MachineInvalid),
            });
        }
    }
    Ok(items)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accepted,
    Doubted,
    Pending,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accepted => "Accepted",
            Verdict::Doubted => "Doubted",
            Verdict::Pending => "Pending",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Judgment {
    pub item_id: String,
    pub verdict: Verdict,
    #[serde(default)]
    pub note: String,
    pub timestamp: DateTime<Utc>,
}

/// Append-only judgment history; the latest entry per item wins.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentLog {
    entries: Vec<Judgment>,
}

impl JudgmentLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<Judgment>) -> Self {
        JudgmentLog { entries }
    }

    pub fn entries(&self) -> &[Judgment] {
        &self.entries
    }

    pub fn latest(&self, item: &str) -> Option<&Judgment> {
        self.entries.iter().rev().find(|j| j.item_id == item)
    }

    /// Appends `j` unless it repeats the item's current verdict and note.
    /// Returns whether an entry was added.
    pub fn record(&mut self, j: Judgment) -> bool {
        if self.latest(&j.item_id).is_some_and(|cur| cur.verdict == j.verdict && cur.note == j.note) {
            return false;
        }
        self.entries.push(j);
        true
    }

    pub fn current(&self) -> BTreeMap<String, Verdict> {
        self.entries.iter().map(|j| (j.item_id.clone(), j.verdict)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssuranceStatus {
    Established,
    Blocked,
    Open,
}

impl fmt::Display for AssuranceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssuranceStatus::Established => "Established",
            AssuranceStatus::Blocked => "Blocked",
            AssuranceStatus::Open => "Open",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusReport {
    pub root: String,
    pub statuses: BTreeMap<String, AssuranceStatus>,
    /// Established inferences that rest on an accepted machine
    /// counterexample.
    pub warnings: Vec<String>,
}

impl StatusReport {
    pub fn root_status(&self) -> AssuranceStatus {
        self.statuses[&self.root]
    }

    pub fn root_established(&self) -> bool {
        self.root_status() == AssuranceStatus::Established
    }

    pub fn established_with_warnings(&self) -> bool {
        self.root_established() && !self.warnings.is_empty()
    }
}

struct Propagation<'a> {
    r: &'a Rationale,
    m: &'a MachineResults,
    judgments: &'a BTreeMap<String, Verdict>,
    out: BTreeMap<String, AssuranceStatus>,
    warnings: Vec<String>,
}

impl Propagation<'_> {
    fn claim(&mut self, id: &str) -> AssuranceStatus {
        let judged = self.judgments.get(id).copied();
        let status = if self.r.is_leaf(id) {
            match self.m.evidence.get(id).map(|e| e.status) {
                Some(EvidenceStatus::Verified) => AssuranceStatus::Established,
                Some(EvidenceStatus::Refuted) => AssuranceStatus::Blocked,
                _ => match judged {
                    Some(Verdict::Accepted) => AssuranceStatus::Established,
                    Some(Verdict::Doubted) => AssuranceStatus::Blocked,
                    _ => AssuranceStatus::Open,
                },
            }
        } else {
            let children: Vec<AssuranceStatus> = self.r.children(id).to_vec().iter().map(|c| self.claim(c)).collect();
            let machine = self.m.verdicts.get(id).map(|v| v.status);
            let (holds, doubted) = match machine {
                Some(InferenceStatus::MachineValid) => (true, false),
                _ => (judged == Some(Verdict::Accepted), judged == Some(Verdict::Doubted)),
            };
            if doubted || children.contains(&AssuranceStatus::Blocked) {
                AssuranceStatus::Blocked
            } else if holds && children.iter().all(|c| *c == AssuranceStatus::Established) {
                if machine == Some(InferenceStatus::MachineInvalid) {
                    self.warnings.push(id.to_string());
                }
                AssuranceStatus::Established
            } else {
                AssuranceStatus::Open
            }
        };
        self.out.insert(id.to_string(), status);
        status
    }
}

/// Status of every claim, bottom-up from machine results and current
/// verdicts. Verdicts on claims without a checklist item are ignored.
pub fn propagate(r: &Rationale, m: &MachineResults, judgments: &BTreeMap<String, Verdict>) -> StatusReport {
    let mut p = Propagation { r, m, judgments, out: BTreeMap::new(), warnings: Vec::new() };
    p.claim(&r.root);
    let mut warnings = p.warnings;
    warnings.sort();
    StatusReport { root: r.root.clone(), statuses: p.out, warnings }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhatIf {
    pub status: StatusReport,
    pub delta: BTreeSet<String>,
}

/// Propagation with `overlay` superseding `judgments`, and the claims
/// whose status differs from the baseline.
pub fn whatif(
    r: &Rationale,
    m: &MachineResults,
    judgments: &BTreeMap<String, Verdict>,
    overlay: &[(String, Verdict)],
) -> Result<WhatIf, AssuranceError> {
    let items: BTreeSet<String> = extract_checklist(r, m)?.into_iter().map(|i| i.id).collect();
    let mut merged = judgments.clone();
    for (id, v) in overlay {
        if !items.contains(id) {
            return Err(AssuranceError::UnknownItem(id.clone()));
        }
        merged.insert(id.clone(), *v);
    }
    let before = propagate(r, m, judgments);
    let after = propagate(r, m, &merged);
    let delta =
        after.statuses.iter().filter(|(k, v)| before.statuses.get(*k) != Some(v)).map(|(k, _)| k.clone()).collect();
    Ok(WhatIf { status: after, delta })
}

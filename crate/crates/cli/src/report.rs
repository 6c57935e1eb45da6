//! Analysis report in text, JSON and Markdown.

use std::fmt::Write;

use avc_core::analyzers::{EvidenceDetails, EvidenceStatus};
use avc_core::assurance::{ChecklistItem, MachineResults};
use avc_core::inference::InferenceStatus;
use avc_core::pipeline::Tally;
use avc_core::rationale::Rationale;
use serde::Serialize;

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub rationale: String,
    pub claims: usize,
    pub subject: Option<SubjectView>,
    pub solver: Option<String>,
    pub inferences: Vec<InferenceRow>,
    pub conjectures: Vec<ConjectureRow>,
    pub unchecked_hints: Vec<String>,
    pub tally: Tally,
    pub checklist: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct SubjectView {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct InferenceRow {
    pub parent: String,
    pub children: Vec<String>,
    pub status: InferenceStatus,
    pub tier: u8,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ConjectureRow {
    pub claim: String,
    pub verifier: String,
    pub status: EvidenceStatus,
    pub summary: String,
    pub details: EvidenceDetails,
}

impl Report {
    pub fn new(
        r: &Rationale,
        m: &MachineResults,
        items: &[ChecklistItem],
        subject: Option<SubjectView>,
        solver: Option<String>,
    ) -> Report {
        let order = r.preorder();
        let inferences = order
            .iter()
            .filter_map(|id| {
                let d = r.decomposition_of(id)?;
                let v = m.verdicts.get(*id)?;
                Some(InferenceRow {
                    parent: d.parent.clone(),
                    children: d.children.clone(),
                    status: v.status,
                    tier: v.tier,
                    diagnostic: v.diagnostic.as_ref().map(|d| d.to_string()),
                })
            })
            .collect();
        let conjectures = order
            .iter()
            .filter_map(|id| m.evidence.get(*id))
            .map(|e| ConjectureRow {
                claim: e.claim_id.clone(),
                verifier: e.verifier.clone(),
                status: e.status,
                summary: e.summary.clone(),
                details: e.details.clone(),
            })
            .collect();
        let unchecked_hints = order
            .iter()
            .filter(|id| r.is_leaf(id) && r.claims[**id].verify.is_some() && !m.evidence.contains_key(**id))
            .map(|id| id.to_string())
            .collect();
        Report {
            rationale: r.name.clone(),
            claims: r.claims.len(),
            subject,
            solver,
            inferences,
            conjectures,
            unchecked_hints,
            tally: Tally::of(m),
            checklist: items.iter().map(|i| i.id.clone()).collect(),
        }
    }

    fn summary(&self) -> String {
        let t = &self.tally;
        format!(
            "{} check(s): {} inference(s) ({} MachineValid, {} MachineInvalid, {} Unknown), \
             {} verifier result(s) ({} Verified, {} Refuted, {} Unknown)",
            t.checks(),
            t.machine_valid + t.machine_invalid + t.unknown_inferences,
            t.machine_valid,
            t.machine_invalid,
            t.unknown_inferences,
            t.verified + t.refuted + t.unknown_evidence,
            t.verified,
            t.refuted,
            t.unknown_evidence
        )
    }

    fn header_lines(&self) -> Vec<String> {
        let mut out = vec![format!("rationale {} ({} claims)", self.rationale, self.claims)];
        out.push(match &self.subject {
            Some(s) => format!("program {} (sha256:{})", s.path, s.sha256),
            None => "no program; verifiers not run".into(),
        });
        out.push(match &self.solver {
            Some(s) => format!("solver {s}"),
            None => "solver disabled; Tier 2 skipped".into(),
        });
        out
    }

    pub fn text(&self) -> String {
        let mut s = self.header_lines().join("\n");
        s.push_str("\n\n");
        if !self.inferences.is_empty() {
            s.push_str("Inferences\n");
            let width = self.inferences.iter().map(|i| arrow(i).len()).max().unwrap_or(0);
            for i in &self.inferences {
                let _ = writeln!(s, "  {:width$}  {:<14} tier {}", arrow(i), format!("{:?}", i.status), i.tier);
                if i.status == InferenceStatus::MachineInvalid {
                    if let Some(d) = &i.diagnostic {
                        let _ = writeln!(s, "      {d}");
                    }
                }
            }
            s.push('\n');
        }
        if !self.conjectures.is_empty() {
            s.push_str("Conjectures\n");
            let width = self.conjectures.iter().map(|c| c.claim.len()).max().unwrap_or(0);
            for c in &self.conjectures {
                let status = format!("{:?}", c.status);
                let _ = writeln!(s, "  {:width$}  {:<17} {:<9} {}", c.claim, c.verifier, status, c.summary);
            }
            s.push('\n');
        }
        if !self.unchecked_hints.is_empty() {
            let _ = writeln!(s, "Hints not run: {}\n", self.unchecked_hints.join(", "));
        }
        let _ = writeln!(s, "{}", self.summary());
        let _ = writeln!(s, "Checklist: {} item(s){}", self.checklist.len(), list_suffix(&self.checklist));
        s
    }

    pub fn markdown(&self) -> String {
        let mut s = format!("# Analysis: {}\n\n", self.rationale);
        for line in self.header_lines().iter().skip(1) {
            let _ = writeln!(s, "- {line}");
        }
        s.push('\n');
        if !self.inferences.is_empty() {
            s.push_str("## Inferences\n\n| Inference | Status | Tier |\n| --- | --- | --- |\n");
            for i in &self.inferences {
                let _ = writeln!(s, "| {} | {:?} | {} |", arrow(i), i.status, i.tier);
            }
            s.push('\n');
        }
        if !self.conjectures.is_empty() {
            s.push_str("## Conjectures\n\n| Claim | Verifier | Status | Summary |\n| --- | --- | --- | --- |\n");
            for c in &self.conjectures {
                let _ = writeln!(
                    s,
                    "| {} | {} | {:?} | {} |",
                    c.claim,
                    c.verifier,
                    c.status,
                    c.summary.replace('|', "\\|")
                );
            }
            s.push('\n');
        }
        let _ = writeln!(s, "{}\n", self.summary());
        let _ = writeln!(s, "Checklist: {} item(s){}", self.checklist.len(), list_suffix(&self.checklist));
        s
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

fn arrow(i: &InferenceRow) -> String {
    format!("{} -> [{}]", i.parent, i.children.join(", "))
}

fn list_suffix(ids: &[String]) -> String {
    if ids.is_empty() {
        String::new()
    } else {
        format!(": {}", ids.join(", "))
    }
}

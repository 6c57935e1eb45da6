use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use super::{rationale, Check, Gen};
use avc_core::analyzers::{Evidence, EvidenceDetails, EvidenceStatus};
use avc_core::assurance::{
    extract_checklist, propagate, whatif, AssuranceStatus, ItemKind, Judgment, JudgmentLog, MachineResults, Verdict,
};
use avc_core::inference::{InferenceStatus, InferenceVerdict};
use avc_core::rationale::Rationale;
use chrono::{TimeZone, Utc};

pub fn machine(g: &mut Gen, r: &Rationale) -> MachineResults {
    let mut m = MachineResults::default();
    for id in r.preorder() {
        if r.is_leaf(id) {
            let status = match g.below(5) {
                0 => continue,
                1 | 2 => EvidenceStatus::Verified,
                3 if g.chance(0.4) => EvidenceStatus::Refuted,
                _ => EvidenceStatus::Unknown,
            };
            let ev = Evidence {
                claim_id: id.to_string(),
                verifier: "output-shape".into(),
                status,
                summary: String::new(),
                details: EvidenceDetails::Error { message: String::new() },
                subject_hash: String::new(),
            };
            m.evidence.insert(id.to_string(), ev);
        } else {
            let status = match g.below(4) {
                0 => continue,
                1 => InferenceStatus::MachineValid,
                2 => InferenceStatus::MachineInvalid,
                _ => InferenceStatus::Unknown,
            };
            let v = InferenceVerdict { status, tier: 1, diagnostic: None, elapsed: Duration::ZERO };
            m.verdicts.insert(id.to_string(), v);
        }
    }
    m
}

fn subtree<'a>(r: &'a Rationale, id: &'a str) -> Vec<&'a str> {
    let mut out = vec![id];
    for c in r.children(id) {
        out.extend(subtree(r, c));
    }
    out
}

pub fn ancestors(r: &Rationale, id: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::from([id.to_string()]);
    let mut cur = id;
    while let Some(p) = r.parent_of(cur) {
        out.insert(p.to_string());
        cur = p;
    }
    out
}

pub fn refuted(m: &MachineResults, id: &str) -> bool {
    m.evidence.get(id).is_some_and(|e| e.status == EvidenceStatus::Refuted)
}

/// A claim is established exactly when nothing below it was refuted by
/// a verifier and every checklist item below it is accepted; it is blocked
/// exactly when something below it was refuted or doubted.
fn expected_status(
    r: &Rationale,
    m: &MachineResults,
    items: &BTreeSet<String>,
    judgments: &BTreeMap<String, Verdict>,
    id: &str,
) -> AssuranceStatus {
    let below = subtree(r, id);
    let verdict = |c: &str| judgments.get(c).copied().unwrap_or(Verdict::Pending);
    let mine: Vec<&str> = below.iter().copied().filter(|c| items.contains(*c)).collect();
    if below.iter().any(|c| refuted(m, c)) || mine.iter().any(|c| verdict(c) == Verdict::Doubted) {
        AssuranceStatus::Blocked
    } else if mine.iter().all(|c| verdict(c) == Verdict::Accepted) {
        AssuranceStatus::Established
    } else {
        AssuranceStatus::Open
    }
}

fn random_judgments(g: &mut Gen, r: &Rationale) -> BTreeMap<String, Verdict> {
    r.preorder()
        .into_iter()
        .filter_map(|id| {
            let v = match g.below(5) {
                0 => return None,
                1 => Verdict::Pending,
                2 => Verdict::Doubted,
                _ => Verdict::Accepted,
            };
            Some((id.to_string(), v))
        })
        .collect()
}

pub struct Case {
    pub r: Rationale,
    pub m: MachineResults,
    pub items: Vec<String>,
}

pub fn case(seed: u64) -> (Case, Gen) {
    let mut g = Gen::new(seed);
    let r = rationale(&mut g);
    let m = machine(&mut g, &r);
    let items = extract_checklist(&r, &m).unwrap().into_iter().map(|i| i.id).collect();
    (Case { r, m, items }, g)
}

pub fn statuses_match_the_closed_form(seed: u64) -> Check {
    let (c, mut g) = case(seed);
    let judgments = random_judgments(&mut g, &c.r);
    let items: BTreeSet<String> = c.items.iter().cloned().collect();
    let report = propagate(&c.r, &c.m, &judgments);
    for id in c.r.preorder() {
        let expected = expected_status(&c.r, &c.m, &items, &judgments, id);
        ensure!(report.statuses[id] == expected, "{id}: {:?}, expected {expected:?}", report.statuses[id]);
    }
    for w in &report.warnings {
        ensure!(report.statuses[w] == AssuranceStatus::Established, "warning on unestablished {w}");
        ensure!(c.m.verdicts[w].status == InferenceStatus::MachineInvalid, "warning on {w}");
        ensure!(judgments.get(w) == Some(&Verdict::Accepted), "warning on unaccepted {w}");
    }
    Ok(())
}

/// Accepting every item establishes the root unless a verifier refuted a
/// leaf; machine-invalid inferences surface as warnings.
pub fn accepting_every_item_establishes_the_root(seed: u64) -> Check {
    let (c, _) = case(seed);
    let all: BTreeMap<String, Verdict> = c.items.iter().map(|i| (i.clone(), Verdict::Accepted)).collect();
    let report = propagate(&c.r, &c.m, &all);
    let any_refuted = c.r.preorder().into_iter().any(|id| refuted(&c.m, id));
    ensure!(report.root_established() == !any_refuted, "root {:?}, refuted leaf: {any_refuted}", report.root_status());
    if any_refuted {
        ensure!(report.root_status() == AssuranceStatus::Blocked, "refuted leaf but root {:?}", report.root_status());
    }
    let invalid: Vec<String> =
        c.m.verdicts
            .iter()
            .filter(|(_, v)| v.status == InferenceStatus::MachineInvalid)
            .map(|(k, _)| k.clone())
            .collect();
    if report.root_established() {
        ensure!(report.warnings == invalid, "warnings {:?}, invalid {invalid:?}", report.warnings);
    }
    Ok(())
}

/// Case with no refuted leaf and no machine-invalid inference, for the
/// plain soundness statement.
pub fn accepting_every_item_of_a_clean_case_establishes_the_root(seed: u64) -> Check {
    let (c, _) = case(seed);
    let clean = !c.r.preorder().into_iter().any(|id| refuted(&c.m, id))
        && c.m.verdicts.values().all(|v| v.status != InferenceStatus::MachineInvalid);
    if !clean {
        return Ok(());
    }
    let all: BTreeMap<String, Verdict> = c.items.iter().map(|i| (i.clone(), Verdict::Accepted)).collect();
    let report = propagate(&c.r, &c.m, &all);
    ensure!(report.root_status() == AssuranceStatus::Established, "root {:?}", report.root_status());
    ensure!(report.warnings.is_empty(), "warnings {:?}", report.warnings);
    Ok(())
}

pub fn doubting_any_item_blocks_the_root(seed: u64) -> Check {
    let (c, mut g) = case(seed);
    if c.items.is_empty() {
        return Ok(());
    }
    let mut all: BTreeMap<String, Verdict> = c.items.iter().map(|i| (i.clone(), Verdict::Accepted)).collect();
    let doubted = g.pick(&c.items).clone();
    all.insert(doubted.clone(), Verdict::Doubted);
    let report = propagate(&c.r, &c.m, &all);
    ensure!(report.root_status() == AssuranceStatus::Blocked, "doubted {doubted}, root {:?}", report.root_status());
    for a in ancestors(&c.r, &doubted) {
        ensure!(report.statuses[&a] == AssuranceStatus::Blocked, "doubted {doubted}, {a} is {:?}", report.statuses[&a]);
    }
    Ok(())
}

pub fn whatif_changes_only_ancestors(seed: u64) -> Check {
    let (c, mut g) = case(seed);
    if c.items.is_empty() {
        return Ok(());
    }
    let judgments = random_judgments(&mut g, &c.r);
    let overlay: Vec<(String, Verdict)> = (0..1 + g.below(3))
        .map(|_| (g.pick(&c.items).clone(), *g.pick(&[Verdict::Accepted, Verdict::Doubted, Verdict::Pending])))
        .collect();
    let w = whatif(&c.r, &c.m, &judgments, &overlay).map_err(|e| e.to_string())?;
    let mut merged = judgments.clone();
    merged.extend(overlay.iter().cloned());
    ensure!(w.status == propagate(&c.r, &c.m, &merged), "overlay differs from merged judgments");
    let closure: BTreeSet<String> = overlay.iter().flat_map(|(id, _)| ancestors(&c.r, id)).collect();
    ensure!(w.delta.is_subset(&closure), "{:?} not within {:?}", w.delta, closure);
    let before = propagate(&c.r, &c.m, &judgments);
    for id in c.r.preorder() {
        ensure!(w.delta.contains(id) == (before.statuses[id] != w.status.statuses[id]), "delta wrong at {id}");
    }
    Ok(())
}

pub fn checklist_is_exactly_the_unproved_nodes(seed: u64) -> Check {
    let (c, _) = case(seed);
    let expected: Vec<String> =
        c.r.preorder()
            .into_iter()
            .filter(|id| {
                if c.r.is_leaf(id) {
                    !c.m.evidence.get(*id).is_some_and(|e| e.status == EvidenceStatus::Verified)
                } else {
                    !c.m.verdicts.get(*id).is_some_and(|v| v.status == InferenceStatus::MachineValid)
                }
            })
            .map(String::from)
            .collect();
    ensure!(c.items == expected, "items {:?}, expected {expected:?}", c.items);
    for item in extract_checklist(&c.r, &c.m).map_err(|e| e.to_string())? {
        ensure!((item.kind == ItemKind::Inference) == !c.r.is_leaf(&item.id), "kind of {}", item.id);
        ensure!(item.target == item.id, "target of {}", item.id);
        let invalid = c.m.verdicts.get(&item.id).is_some_and(|v| v.status == InferenceStatus::MachineInvalid);
        ensure!(item.counterexample == invalid, "counterexample flag of {}", item.id);
    }
    Ok(())
}

pub fn judgment_log_keeps_the_latest_verdict(seed: u64) -> Check {
    let mut g = Gen::new(seed);
    let ids = ["C1", "C2", "C3"];
    let mut log = JudgmentLog::new();
    let mut latest: BTreeMap<String, (Verdict, String)> = BTreeMap::new();
    for i in 0..g.below(20) {
        let id = g.pick(&ids).to_string();
        let verdict = *g.pick(&[Verdict::Accepted, Verdict::Doubted, Verdict::Pending]);
        let note = g.pick(&["", "looks right", "weights unclear"]).to_string();
        let timestamp = Utc.timestamp_opt(1_700_000_000 + i as i64, 0).unwrap();
        let j = Judgment { item_id: id.clone(), verdict, note: note.clone(), timestamp };
        let repeat = latest.get(&id) == Some(&(verdict, note.clone()));
        ensure!(log.record(j) == !repeat, "record of {id} at step {i}");
        latest.insert(id, (verdict, note));
    }
    let current: BTreeMap<String, Verdict> = latest.iter().map(|(k, (v, _))| (k.clone(), *v)).collect();
    ensure!(log.current() == current, "{:?} != {current:?}", log.current());
    ensure!(log.entries().windows(2).all(|w| w[0].timestamp < w[1].timestamp), "timestamps not increasing");
    Ok(())
}

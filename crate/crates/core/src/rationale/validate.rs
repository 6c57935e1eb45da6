use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{verifier_keys, Rationale, Statement};
use crate::logic::well_formed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureKind {
    UnknownId,
    MismatchedId,
    EmptyDecomposition,
    DuplicateParent,
    DuplicateChild,
    RootHasParent,
    Cycle,
    Unreachable,
    HintOnInternal,
    UnknownVerifier,
    MissingHintKey,
    IllFormed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureDiagnostic {
    pub kind: StructureKind,
    pub claim: Option<String>,
    pub message: String,
}

impl fmt::Display for StructureDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.claim {
            Some(c) => write!(f, "{c}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn diag(kind: StructureKind, claim: Option<&str>, message: String) -> StructureDiagnostic {
    StructureDiagnostic { kind, claim: claim.map(str::to_string), message }
}

/// Empty iff the claims form one tree under `root`, every formal
/// statement is well-formed and every hint names a registered verifier
/// with its required keys.
pub fn validate_structure(r: &Rationale) -> Vec<StructureDiagnostic> {
    use StructureKind::*;
    let mut out = Vec::new();
    let known = |id: &str| r.claims.contains_key(id);

    for (id, c) in &r.claims {
        if *id != c.id {
            out.push(diag(MismatchedId, Some(id), format!("claim stored under `{id}` has id `{}`", c.id)));
        }
    }
    if !known(&r.root) {
        out.push(diag(UnknownId, None, format!("root `{}` is not a claim", r.root)));
    }

    let mut parent_of: BTreeMap<&str, &str> = BTreeMap::new();
    let mut decomposed = BTreeSet::new();
    for d in &r.decompositions {
        if !known(&d.parent) {
            out.push(diag(UnknownId, None, format!("decomposition of unknown claim `{}`", d.parent)));
        }
        if !decomposed.insert(d.parent.as_str()) {
            out.push(diag(DuplicateParent, Some(&d.parent), "claim is decomposed more than once".into()));
        }
        if d.children.is_empty() {
            out.push(diag(EmptyDecomposition, Some(&d.parent), "decomposition has no children".into()));
        }
        for c in &d.children {
            if !known(c) {
                out.push(diag(UnknownId, Some(&d.parent), format!("unknown child `{c}`")));
                continue;
            }
            if let Some(prev) = parent_of.insert(c, &d.parent) {
                out.push(diag(
                    DuplicateChild,
                    Some(c),
                    format!("claim is a child of both `{prev}` and `{}`", d.parent),
                ));
            }
        }
    }
    if let Some(p) = parent_of.get(r.root.as_str()) {
        out.push(diag(RootHasParent, Some(&r.root), format!("root is a child of `{p}`")));
    }

    // Walk up from every claim; a walk that revisits a claim is a cycle.
    let mut cyclic = BTreeSet::new();
    for id in r.claims.keys() {
        let mut seen = BTreeSet::from([id.as_str()]);
        let mut cur = id.as_str();
        while let Some(&p) = parent_of.get(cur) {
            if !seen.insert(p) {
                if p == id {
                    cyclic.insert(id.as_str());
                }
                break;
            }
            cur = p;
        }
    }
    if !cyclic.is_empty() {
        let ids: Vec<&str> = cyclic.into_iter().collect();
        out.push(diag(Cycle, None, format!("decomposition cycle through {}", ids.join(", "))));
    }

    let reachable: BTreeSet<&str> = r.preorder().into_iter().collect();
    for id in r.claims.keys() {
        if !reachable.contains(id.as_str()) {
            out.push(diag(Unreachable, Some(id), "claim is not reachable from the root".into()));
        }
    }

    for (id, c) in &r.claims {
        if let Statement::Formal(phi) = &c.statement {
            for d in well_formed(&r.signature, phi) {
                out.push(diag(IllFormed, Some(id), d.to_string()));
            }
        }
        let Some(hint) = &c.verify else { continue };
        if decomposed.contains(id.as_str()) {
            out.push(diag(HintOnInternal, Some(id), "only conjectures may carry a verify hint".into()));
        }
        match verifier_keys(&hint.verifier) {
            None => out.push(diag(UnknownVerifier, Some(id), format!("unknown verifier `{}`", hint.verifier))),
            Some(keys) => {
                for k in keys.iter().filter(|k| hint.get(k).is_none()) {
                    out.push(diag(MissingHintKey, Some(id), format!("`{}` requires `{k}`", hint.verifier)));
                }
            }
        }
    }
    out
}

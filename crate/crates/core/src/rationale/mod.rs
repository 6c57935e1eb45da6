//! Claim trees: model, DSL (`rationale v1`), structural validation and the
//! JSON interchange form.

mod interchange;
mod parse;
mod print;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logic::{Formula, Signature};
use crate::rational::Rational;

pub use interchange::{from_interchange, to_interchange, InterchangeError};
pub use parse::{parse_rationale, parse_rationale_unchecked, RationaleError};
pub use print::print_rationale;
pub use validate::{validate_structure, StructureDiagnostic, StructureKind};

pub const DSL_VERSION: &str = "rationale v1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum ConfigValue {
    Ident(String),
    Str(String),
    Number(Rational),
    Set(Vec<String>),
    List(Vec<String>),
}

impl ConfigValue {
    pub fn as_word(&self) -> Option<&str> {
        match self {
            ConfigValue::Ident(s) | ConfigValue::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_strings(&self) -> Option<&[String]> {
        match self {
            ConfigValue::Set(v) | ConfigValue::List(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyHint {
    pub verifier: String,
    pub config: Vec<(String, ConfigValue)>,
}

impl VerifyHint {
    pub fn get(&self, key: &str) -> Option<&ConfigValue> {
        self.config.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    Formal(Formula),
    /// Normalized free text.
    Informal(String),
}

impl Statement {
    /// The statement as a formula; free text becomes an informal atom.
    pub fn formula(&self) -> Formula {
        match self {
            Statement::Formal(phi) => phi.clone(),
            Statement::Informal(t) => Formula::Informal(t.clone()),
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Formal(phi) => write!(f, "{phi}"),
            Statement::Informal(t) => f.write_str(t),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim {
    pub id: String,
    pub title: String,
    pub statement: Statement,
    pub verify: Option<VerifyHint>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub parent: String,
    pub children: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rationale {
    pub name: String,
    pub signature: Signature,
    pub root: String,
    pub claims: BTreeMap<String, Claim>,
    pub decompositions: Vec<Decomposition>,
    pub subject: Option<SubjectRef>,
}

impl Rationale {
    pub fn decomposition_of(&self, id: &str) -> Option<&Decomposition> {
        self.decompositions.iter().find(|d| d.parent == id)
    }

    pub fn children(&self, id: &str) -> &[String] {
        self.decomposition_of(id).map(|d| d.children.as_slice()).unwrap_or(&[])
    }

    pub fn parent_of(&self, id: &str) -> Option<&str> {
        self.decompositions.iter().find(|d| d.children.iter().any(|c| c == id)).map(|d| d.parent.as_str())
    }

    /// Conjectures are the claims without a decomposition.
    pub fn is_leaf(&self, id: &str) -> bool {
        self.decomposition_of(id).is_none()
    }

    /// Depth-first preorder from the root, children in stored order.
    /// Claims unreachable from the root are omitted.
    pub fn preorder(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.root.as_str()];
        while let Some(id) = stack.pop() {
            if !self.claims.contains_key(id) || !seen.insert(id) {
                continue;
            }
            out.push(id);
            for c in self.children(id).iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Ancestors of `id`, nearest first.
    pub fn ancestors(&self, id: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cur = id;
        while let Some(p) = self.parent_of(cur) {
            if out.contains(&p) || p == id {
                break;
            }
            out.push(p);
            cur = p;
        }
        out
    }

    /// Premises and conclusion of the inference at `parent`.
    pub fn inference(&self, parent: &str) -> Option<(Vec<Formula>, Formula)> {
        let d = self.decomposition_of(parent)?;
        let premises =
            d.children.iter().map(|c| self.claims.get(c).map(|c| c.statement.formula())).collect::<Option<Vec<_>>>()?;
        Some((premises, self.claims.get(parent)?.statement.formula()))
    }
}

/// Configuration keys each registered verifier requires.
pub const VERIFIERS: &[(&str, &[&str])] = &[
    ("output-shape", &["fn", "score", "decision", "reasons"]),
    ("string-inventory", &["fn", "sink"]),
    ("threshold-ladder", &["fn", "score", "order"]),
    ("const-relation", &[]),
];

pub fn verifier_keys(name: &str) -> Option<&'static [&'static str]> {
    VERIFIERS.iter().find(|(n, _)| *n == name).map(|(_, k)| *k)
}

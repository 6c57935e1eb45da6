//! JSON mirror of [`Rationale`]. Formal statements travel as formula
//! text and are re-parsed against the embedded signature on the way in.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Claim, ConfigValue, Decomposition, Rationale, Statement, SubjectRef, VerifyHint, DSL_VERSION};
use crate::logic::{parse_formula, FormulaError, Signature};
use crate::text::normalize_ws;

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Doc {
    version: String,
    name: String,
    signature: Signature,
    root: String,
    claims: BTreeMap<String, ClaimDoc>,
    decompositions: Vec<Decomposition>,
    subject_ref: Option<SubjectRef>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ClaimDoc {
    id: String,
    title: String,
    statement: StatementDoc,
    verify_hint: Option<HintDoc>,
    note: Option<String>,
    /// Derived from the tree; ignored when reading.
    #[serde(default)]
    conjecture: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum StatementDoc {
    Formal { text: String },
    Informal { text: String },
}

#[derive(Serialize, Deserialize)]
struct HintDoc {
    verifier: String,
    config: Vec<ConfigEntry>,
}

#[derive(Serialize, Deserialize)]
struct ConfigEntry {
    key: String,
    value: ConfigValue,
}

#[derive(Debug, thiserror::Error)]
pub enum InterchangeError {
    #[error("malformed interchange document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported interchange version `{0}`")]
    Version(String),
    #[error("claim {claim}: {error}")]
    Formula { claim: String, error: FormulaError },
}

pub fn to_interchange(r: &Rationale) -> serde_json::Value {
    let claims = r
        .claims
        .iter()
        .map(|(id, c)| {
            let statement = match &c.statement {
                Statement::Formal(phi) => StatementDoc::Formal { text: phi.to_string() },
                Statement::Informal(t) => StatementDoc::Informal { text: t.clone() },
            };
            let verify_hint = c.verify.as_ref().map(|h| HintDoc {
                verifier: h.verifier.clone(),
                config: h.config.iter().map(|(k, v)| ConfigEntry { key: k.clone(), value: v.clone() }).collect(),
            });
            let doc = ClaimDoc {
                id: c.id.clone(),
                title: c.title.clone(),
                statement,
                verify_hint,
                note: c.note.clone(),
                conjecture: r.is_leaf(id),
            };
            (id.clone(), doc)
        })
        .collect();
    let doc = Doc {
        version: DSL_VERSION.to_string(),
        name: r.name.clone(),
        signature: r.signature.clone(),
        root: r.root.clone(),
        claims,
        decompositions: r.decompositions.clone(),
        subject_ref: r.subject.clone(),
    };
    serde_json::to_value(doc).expect("interchange document serializes")
}

/// Reads an interchange document. Structure is not validated here.
pub fn from_interchange(json: &str) -> Result<Rationale, InterchangeError> {
    let doc: Doc = serde_json::from_str(json)?;
    if doc.version != DSL_VERSION {
        return Err(InterchangeError::Version(doc.version));
    }
    let mut signature = doc.signature;
    signature.string_literals.clear();
    let mut claims = BTreeMap::new();
    for (key, c) in doc.claims {
        let statement = match c.statement {
            StatementDoc::Formal { text } => Statement::Formal(
                parse_formula(&text, &signature)
                    .map_err(|error| InterchangeError::Formula { claim: key.clone(), error })?,
            ),
            StatementDoc::Informal { text } => Statement::Informal(normalize_ws(&text)),
        };
        let verify = c.verify_hint.map(|h| VerifyHint {
            verifier: h.verifier,
            config: h.config.into_iter().map(|e| (e.key, e.value)).collect(),
        });
        claims.insert(key, Claim { id: c.id, title: c.title, statement, verify, note: c.note });
    }
    for c in claims.values() {
        if let Statement::Formal(phi) = &c.statement {
            signature.absorb_literals(phi);
        }
    }
    Ok(Rationale {
        name: doc.name,
        signature,
        root: doc.root,
        claims,
        decompositions: doc.decompositions,
        subject: doc.subject_ref,
    })
}

//! Core of the abductive review toolkit.
//!
//! A rationale is a tree of claims arguing that a program is adequate.
//! This crate parses rationales and subject programs, checks the
//! decompositions and the statically verifiable leaves, and reduces what
//! is left to a checklist whose acceptance establishes the root claim.

pub mod analyzers;
pub mod assurance;
pub mod inference;
pub mod logic;
pub mod pipeline;
pub mod rational;
pub mod rationale;
pub mod subject;
pub mod text;

pub use rational::Rational;

use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

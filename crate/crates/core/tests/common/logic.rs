use std::collections::BTreeMap;

use avc_core::inference::{check_tier1, InferenceStatus, VerdictDiagnostic};
use avc_core::logic::{parse_formula, well_formed, Formula, Signature};

use super::{logic_sig, FormulaGen, Gen};

pub const ATOMS: usize = 10;

pub fn prop_sig() -> Signature {
    let mut sig = Signature::new();
    for i in 0..ATOMS {
        sig.declare_predicate(&format!("p{i}"), vec![]).unwrap();
    }
    sig
}

pub fn prop_formula(g: &mut Gen, n: usize, depth: u32) -> Formula {
    if depth == 0 || g.chance(0.25) {
        return match g.below(12) {
            0 => Formula::True,
            1 => Formula::False,
            2 => Formula::informal(g.pick(super::INFORMAL)),
            _ => Formula::pred(&format!("p{}", g.below(n)), vec![]),
        };
    }
    match g.below(5) {
        0 => Formula::not(prop_formula(g, n, depth - 1)),
        1 => Formula::And((0..2 + g.below(2)).map(|_| prop_formula(g, n, depth - 1)).collect()),
        2 => Formula::Or((0..2 + g.below(2)).map(|_| prop_formula(g, n, depth - 1)).collect()),
        3 => Formula::implies(prop_formula(g, n, depth - 1), prop_formula(g, n, depth - 1)),
        _ => Formula::iff(prop_formula(g, n, depth - 1), prop_formula(g, n, depth - 1)),
    }
}

pub fn eval(phi: &Formula, v: &BTreeMap<String, bool>) -> bool {
    match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Not(a) => !eval(a, v),
        Formula::And(xs) => xs.iter().all(|x| eval(x, v)),
        Formula::Or(xs) => xs.iter().any(|x| eval(x, v)),
        Formula::Implies(a, b) => !eval(a, v) || eval(b, v),
        Formula::Iff(a, b) => eval(a, v) == eval(b, v),
        atom => v.get(&atom.to_string()).copied().unwrap_or(false),
    }
}

pub fn atom_names(phis: &[&Formula]) -> Vec<String> {
    let mut out = std::collections::BTreeSet::new();
    for phi in phis {
        phi.visit(&mut |f| {
            if matches!(f, Formula::Pred(..) | Formula::Informal(_)) {
                out.insert(f.to_string());
            }
        });
    }
    out.into_iter().collect()
}

pub fn truth_table_valid(premises: &[Formula], conclusion: &Formula) -> bool {
    let all: Vec<&Formula> = premises.iter().chain(std::iter::once(conclusion)).collect();
    let names = atom_names(&all);
    (0u32..1 << names.len()).all(|bits| {
        let v: BTreeMap<String, bool> =
            names.iter().enumerate().map(|(i, n)| (n.clone(), bits >> i & 1 == 1)).collect();
        !premises.iter().all(|p| eval(p, &v)) || eval(conclusion, &v)
    })
}

pub fn random_inference(g: &mut Gen) -> (Vec<Formula>, Formula) {
    let n = 1 + g.below(ATOMS - 2);
    let premises: Vec<Formula> = (0..g.below(4)).map(|_| prop_formula(g, n, 3)).collect();
    let conclusion = match g.below(4) {
        0 if !premises.is_empty() => {
            let p = g.pick(&premises).clone();
            Formula::Or(vec![p, prop_formula(g, n, 1)])
        }
        1 if premises.len() > 1 => Formula::And(premises[..2].to_vec()),
        _ => prop_formula(g, n, 3),
    };
    (premises, conclusion)
}

/// Checks Tier 1 against the truth table on one random inference and
/// returns whether the inference is valid.
pub fn tier1_agrees_with_truth_table(seed: u64) -> Result<bool, String> {
    let sig = prop_sig();
    let mut g = Gen::new(seed);
    let (premises, conclusion) = random_inference(&mut g);
    let expected = truth_table_valid(&premises, &conclusion);
    let v = check_tier1(&sig, &premises, &conclusion);
    ensure!(
        (v.status == InferenceStatus::MachineValid) == expected,
        "seed {seed}: {premises:?} => {conclusion}: {v:?}"
    );
    if !expected {
        let Some(VerdictDiagnostic::Countermodel { assignment }) = &v.diagnostic else {
            return Err(format!("seed {seed}: no countermodel"));
        };
        let m: BTreeMap<String, bool> = assignment.iter().map(|a| (a.atom.clone(), a.value)).collect();
        ensure!(premises.iter().all(|p| eval(p, &m)) && !eval(&conclusion, &m), "seed {seed}: bad countermodel");
    }
    Ok(expected)
}

pub fn formula_round_trip(seed: u64) -> super::Check {
    let sig = logic_sig();
    let mut g = Gen::new(seed);
    let phi = FormulaGen::new(&mut g).formula(4);
    ensure!(well_formed(&sig, &phi).is_empty(), "generated formula is ill-formed: {phi}");
    let text = phi.to_string();
    let back = parse_formula(&text, &sig).map_err(|e| format!("{text}: {e}"))?;
    ensure!(back == phi, "{text} reparsed as {back}");
    Ok(())
}

mod common;

use std::time::Duration;

use avc_core::inference::{check_tier1, check_tier2, InferenceStatus, SolverConfig};
use avc_core::logic::{atomize, normalize, parse_formula, well_formed, Formula};
use common::logic::{formula_round_trip, tier1_agrees_with_truth_table};
use common::{alpha_variant, logic_sig, solver_command, FormulaGen, Gen};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        formula_round_trip(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn normalize_is_idempotent_and_well_formed(seed in any::<u64>()) {
        let sig = logic_sig();
        let mut g = Gen::new(seed);
        let phi = FormulaGen::new(&mut g).formula(4);
        let n = normalize(&phi);
        prop_assert_eq!(normalize(&n), n.clone());
        prop_assert!(well_formed(&sig, &n).is_empty(), "{n}");
    }

    #[test]
    fn alpha_variants_share_atoms(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let phi = FormulaGen::new(&mut g).formula(4);
        let psi = alpha_variant(&phi, "_renamed");
        let (skel, table) = atomize(&[normalize(&phi), normalize(&psi)]);
        prop_assert_eq!(&skel[0], &skel[1]);
        let atoms: Vec<&Formula> = table.iter().map(|(_, f)| f).collect();
        for (i, a) in atoms.iter().enumerate() {
            for b in &atoms[i + 1..] {
                prop_assert_ne!(normalize(a), normalize(b));
            }
        }
    }

    #[test]
    fn distinct_canonical_forms_get_distinct_atoms(s1 in any::<u64>(), s2 in any::<u64>()) {
        let mut g1 = Gen::new(s1);
        let mut g2 = Gen::new(s2);
        let a = FormulaGen::new(&mut g1).atom();
        let b = FormulaGen::new(&mut g2).atom();
        let (na, nb) = (normalize(&a), normalize(&b));
        let (skel, _) = atomize(&[na.clone(), nb.clone()]);
        prop_assert_eq!(skel[0] == skel[1], na == nb);
    }
}

#[test]
fn tier1_agrees_with_truth_tables() {
    let (mut valid, mut invalid) = (0, 0);
    for seed in 0..1200u64 {
        if tier1_agrees_with_truth_table(seed).unwrap() {
            valid += 1;
        } else {
            invalid += 1;
        }
    }
    assert!(valid >= 100 && invalid >= 100, "{valid} valid, {invalid} invalid");
}

#[test]
fn tier1_valid_implies_solver_unsat() {
    let Some(cmd) = solver_command() else {
        eprintln!("no SMT solver found; skipping");
        return;
    };
    let cfg = SolverConfig::new(&cmd, Duration::from_secs(20)).unwrap();
    let sig = logic_sig();
    let mut checked = 0;
    for seed in 0..400u64 {
        let mut g = Gen::new(seed);
        let mut fg = FormulaGen::new(&mut g);
        let premises: Vec<Formula> = (0..1 + fg.g.below(3)).map(|_| fg.formula(2)).collect();
        let conclusion = match fg.g.below(3) {
            0 => alpha_variant(&premises[0], "_b"),
            1 => Formula::Or(vec![premises[0].clone(), fg.formula(1)]),
            _ => fg.formula(2),
        };
        if check_tier1(&sig, &premises, &conclusion).status != InferenceStatus::MachineValid {
            continue;
        }
        let v = check_tier2(&sig, &premises, &conclusion, &cfg);
        assert_eq!(v.status, InferenceStatus::MachineValid, "seed {seed}: {premises:?} => {conclusion}: {v:?}");
        checked += 1;
        if checked == 60 {
            break;
        }
    }
    assert!(checked >= 30, "only {checked} Tier-1 valid samples");
}

#[test]
fn hand_built_inferences() {
    let sig = logic_sig();
    let f = |s: &str| parse_formula(s, &sig).unwrap();
    let valid = [
        (vec!["forall x:A. P(x) && Q(x)"], "(forall y:A. Q(y)) && forall z:A. P(z)"),
        (vec!["p", "p -> q"], "q"),
        (vec!["!!p"], "p"),
        (vec!["exists x:A. P(x) || Q(x)"], "(exists x:A. P(x)) || exists x:A. Q(x)"),
        (vec!["\"weights are appropriate\""], "\"weights   are appropriate\""),
    ];
    for (ps, c) in valid {
        let premises: Vec<Formula> = ps.iter().map(|p| f(p)).collect();
        assert_eq!(check_tier1(&sig, &premises, &f(c)).status, InferenceStatus::MachineValid, "{ps:?} => {c}");
    }
    let not_tier1 = [
        (vec!["forall x:A. P(x)"], "P(c)"),
        (vec!["p || q"], "p"),
        (vec!["\"weights are appropriate\""], "\"the knowledge base is sound\""),
    ];
    for (ps, c) in not_tier1 {
        let premises: Vec<Formula> = ps.iter().map(|p| f(p)).collect();
        assert_eq!(check_tier1(&sig, &premises, &f(c)).status, InferenceStatus::Unknown, "{ps:?} => {c}");
    }
}

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use avc_core::analyzers::{verify_string_inventory, verify_threshold_ladder, EvidenceDetails, EvidenceStatus};
use avc_core::rationale::parse_rationale;
use avc_core::subject::{interpret, parse_program, ExternTable, SlValue, SubjectProgram};
use avc_core::Rational;

use super::{Check, Gen, RATIONALE};

pub const F: &str = "assess_suspicious_activity";
pub const COUNTRIES: &[&str] = &["US", "DE", "IR", "KP", "SY"];
pub const POOL: &[&str] = &["alpha", "beta", "gamma", "delta", "omega"];

pub fn num(n: i64, d: i64) -> SlValue {
    SlValue::Num(Rational::new(n, d))
}

pub fn claimed_reasons() -> Vec<String> {
    let r = parse_rationale(RATIONALE).unwrap();
    r.claims["C11"].statement.formula().member_set().unwrap().to_vec()
}

pub fn aml_externs(g: &mut Gen) -> ExternTable {
    let countries: Vec<SlValue> = COUNTRIES.iter().filter(|_| g.chance(0.4)).map(|c| SlValue::str(c)).collect();
    let mitigation = num(g.int(0, 600), 100);
    let mut t: ExternTable = BTreeMap::new();
    t.insert("high_risk_countries".into(), Box::new(move |_| Ok(SlValue::List(countries.clone()))));
    t.insert("mitigation_kb".into(), Box::new(move |_| Ok(mitigation.clone())));
    t
}

pub fn aml_input(g: &mut Gen) -> Vec<SlValue> {
    let txns: Vec<SlValue> = (0..g.below(25))
        .map(|_| {
            SlValue::record([("country", SlValue::str(g.pick(COUNTRIES))), ("amount", SlValue::num(g.int(0, 250_000)))])
        })
        .collect();
    let profile: Vec<SlValue> =
        ["cash-intensive", "retail", "online"].iter().filter(|_| g.chance(0.4)).map(|s| SlValue::str(s)).collect();
    let factors = SlValue::record([
        ("transactions", SlValue::List(txns)),
        ("account_age_days", SlValue::num(g.int(0, 400))),
        ("customer_profile", SlValue::List(profile)),
        ("prior_alerts", SlValue::num(g.int(0, 3))),
    ]);
    vec![SlValue::str("acct-1"), factors]
}

pub fn field<'a>(v: &'a SlValue, k: &str) -> &'a SlValue {
    let SlValue::Record(m) = v else { panic!("not a record: {v}") };
    &m[k]
}

pub fn strings(v: &SlValue) -> Vec<String> {
    let SlValue::List(xs) = v else { panic!("not a list: {v}") };
    xs.iter()
        .map(|x| match x {
            SlValue::Str(s) => s.clone(),
            other => panic!("not a string: {other}"),
        })
        .collect()
}

pub fn inventory_of(details: &EvidenceDetails) -> (BTreeSet<String>, bool) {
    let EvidenceDetails::StringInventory { inventory, non_literal, .. } = details else { panic!("{details:?}") };
    (inventory.iter().cloned().collect(), non_literal.is_empty())
}

pub fn rank(d: &str) -> usize {
    ["ok", "review", "flag"].iter().position(|x| *x == d).unwrap_or_else(|| panic!("unexpected decision {d}"))
}

/// A function `f(a, b)` that builds `reasons` with literal appends under
/// numeric guards, plus occasional non-literal writes.
pub fn inventory_program(g: &mut Gen) -> String {
    let mut src = String::from(
        "extern ext()\n\ndef helper(x):\n    x.append(\"zzz\")\n    return x\n\ndef f(a, b):\n    reasons = []\n",
    );
    for _ in 0..1 + g.below(6) {
        let var = *g.pick(&["a", "b"]);
        let op = *g.pick(&[">", "<=", "=="]);
        let _ = writeln!(src, "    if {var} {op} {}:", g.int(0, 10));
        match g.below(12) {
            0 => src.push_str("        reasons.append(ext())\n"),
            1 => src.push_str("        reasons = helper(reasons)\n"),
            2 => src.push_str("        other = reasons\n        other.append(\"zzz\")\n"),
            3 => src.push_str("        ignored = helper(reasons)\n"),
            4 => {
                let _ = writeln!(src, "        reasons = [\"{}\", \"{}\"]", g.pick(POOL), g.pick(POOL));
            }
            5 => {
                let _ = writeln!(src, "        note = \"{}\"\n        reasons.append(note)", g.pick(POOL));
            }
            6 => {
                let _ = writeln!(src, "        for t in [1, 2]:\n            reasons.append(\"{}\")", g.pick(POOL));
            }
            _ => {
                let _ = writeln!(src, "        reasons.append(\"{}\")", g.pick(POOL));
            }
        }
    }
    if g.chance(0.5) {
        src.push_str("    return reasons\n");
    } else {
        src.push_str("    return {\"reasons\": reasons}\n");
    }
    src
}

/// A verified inventory bounds every string a run can put in `reasons`;
/// with no non-literal writes the inventory itself bounds them.
pub fn verified_inventory_covers_every_run(seed: u64) -> Check {
    let mut g = Gen::new(seed);
    let src = inventory_program(&mut g);
    let prog = parse_program(&src).map_err(|e| format!("{e}\n{src}"))?;
    let claimed: Vec<String> = POOL.iter().filter(|_| g.chance(0.7)).map(|s| s.to_string()).collect();
    let ev = verify_string_inventory(&prog, "f", "reasons", &claimed).map_err(|e| e.to_string())?;
    let (inventory, closed) = inventory_of(&ev.details);
    if ev.status == EvidenceStatus::Refuted {
        ensure!(inventory.iter().any(|s| !claimed.contains(s)), "refuted without an unclaimed literal\n{src}");
    }
    for _ in 0..20 {
        let leak = g.pick(&["alpha", "zzz"]).to_string();
        let mut externs: ExternTable = BTreeMap::new();
        externs.insert("ext".into(), Box::new(move |_| Ok(SlValue::Str(leak.clone()))));
        let args = vec![SlValue::num(g.int(-2, 12)), SlValue::num(g.int(-2, 12))];
        let out = interpret(&prog, "f", args, &externs).map_err(|e| format!("{e}\n{src}"))?;
        let reasons = match &out {
            SlValue::List(_) => strings(&out),
            _ => strings(field(&out, "reasons")),
        };
        for s in reasons {
            if ev.status == EvidenceStatus::Verified {
                ensure!(claimed.contains(&s), "{s} escaped a verified inventory\n{src}");
            }
            if closed {
                ensure!(inventory.contains(&s), "{s} missing from inventory\n{src}");
            }
        }
    }
    Ok(())
}

/// A decision function over `score` with a random chain of threshold tests.
pub fn ladder_program(g: &mut Gen) -> String {
    let mut src = String::from("const HIGH = 8.0\n\ndef decide(score):\n");
    if g.chance(0.2) {
        src.push_str("    bonus = 1.0\n");
    }
    let shape = g.below(4);
    let rungs = 1 + g.below(3);
    let mut thresholds: Vec<i64> = (0..rungs).map(|_| g.int(-5, 15)).collect();
    let mut labels: Vec<&str> = vec!["flag", "review", "ok"];
    if shape == 0 {
        thresholds.sort_unstable_by(|a, b| b.cmp(a));
        thresholds.dedup();
    } else {
        let i = g.below(3);
        let j = g.below(3);
        labels.swap(i, j);
    }
    let threshold = |g: &mut Gen, t: i64| {
        if t == 8 && g.chance(0.5) {
            "HIGH".to_string()
        } else {
            format!("{t}.0")
        }
    };
    match shape {
        3 => {
            let _ = writeln!(src, "    decision = \"{}\"", labels[2]);
            for (i, t) in thresholds.iter().enumerate() {
                let op = *g.pick(&[">=", ">", "<", "<="]);
                let t = threshold(g, *t);
                let _ = writeln!(src, "    if score {op} {t}:\n        decision = \"{}\"", labels[i.min(1)]);
            }
        }
        _ => {
            for (i, t) in thresholds.iter().enumerate() {
                let op = if shape == 2 { *g.pick(&[">=", ">", "<", "<="]) } else { *g.pick(&[">=", ">"]) };
                let kw = if i == 0 { "if" } else { "elif" };
                let t = threshold(g, *t);
                let _ = writeln!(src, "    {kw} score {op} {t}:\n        decision = \"{}\"", labels[i.min(1)]);
            }
            let _ = writeln!(src, "    else:\n        decision = \"{}\"", labels[2]);
        }
    }
    src.push_str("    return decision\n");
    src
}

pub fn decide(prog: &SubjectProgram, score: &Rational) -> String {
    match interpret(prog, "decide", vec![SlValue::Num(score.clone())], &BTreeMap::new()).unwrap() {
        SlValue::Str(d) => d,
        other => panic!("{other}"),
    }
}

/// A verified ladder is monotone on every sampled score; a refuted one
/// comes with a witness pair the interpreter reproduces.
pub fn ladder_verdicts_agree_with_execution(seed: u64) -> Check {
    let mut g = Gen::new(seed);
    let src = ladder_program(&mut g);
    let prog = parse_program(&src).map_err(|e| format!("{e}\n{src}"))?;
    let order: Vec<String> = ["ok", "review", "flag"].map(String::from).to_vec();
    let ev = verify_threshold_ladder(&prog, "decide", "score", &order).map_err(|e| e.to_string())?;
    match ev.status {
        EvidenceStatus::Verified => {
            let mut scores: Vec<Rational> = (0..200).map(|_| Rational::new(g.int(-2000, 2000), 100)).collect();
            scores.extend((-6..=16).map(Rational::from_integer));
            scores.sort();
            let ranks: Vec<usize> = scores.iter().map(|s| rank(&decide(&prog, s))).collect();
            ensure!(ranks.windows(2).all(|w| w[0] <= w[1]), "verified ladder is not monotone\n{src}");
        }
        EvidenceStatus::Refuted => {
            let EvidenceDetails::ThresholdLadder { witness: Some((a, b)), .. } = &ev.details else {
                return Err(format!("no witness\n{src}"));
            };
            ensure!(a.score < b.score && rank(&a.decision) > rank(&b.decision), "witness is not a violation\n{src}");
            ensure!(decide(&prog, &a.score) == a.decision, "witness {} not reproduced\n{src}", a.score);
            ensure!(decide(&prog, &b.score) == b.decision, "witness {} not reproduced\n{src}", b.score);
        }
        EvidenceStatus::Unknown => {}
    }
    Ok(())
}

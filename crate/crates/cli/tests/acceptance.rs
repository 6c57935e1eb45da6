//! Prints one PASS or FAIL line per acceptance criterion and exits nonzero
//! when any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;
mod support;

use std::collections::BTreeSet;
use std::io::Write;
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use avc_core::analyzers::{run_verifiers, EvidenceDetails, EvidenceStatus};
use avc_core::inference::InferenceStatus;
use avc_core::logic::{parse_formula, Formula};
use avc_core::rationale::{from_interchange, parse_rationale, print_rationale, to_interchange, Rationale, Statement};
use avc_core::subject::{extract_constants, parse_program, print_program, Literal};
use avc_core::Rational;
use serde_json::{json, Value};

use support::{code, json_out, mock_agent, repo, start_review, stderr, Sandbox, CORPUS};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SOUNDNESS_CASES: u64 = 1000;
const TIER1_CASES: u64 = 1000;
const ANALYZER_CASES: u64 = 500;
const ROUND_TRIP_CASES: u64 = 1000;

fn main() -> ExitCode {
    let criteria: &[Criterion] = &[
        ("corpus end-to-end", corpus_end_to_end),
        ("string inventory", string_inventory),
        ("constant fixtures", constant_fixtures),
        ("checklist soundness", checklist_soundness),
        ("tier-1 vs truth table", tier1_vs_truth_table),
        ("inventory and ladder soundness", analyzer_soundness),
        ("round-trips", round_trips),
        ("smt goldens", smt_goldens),
        ("headless without network", headless),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.2}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{secs:.2}s]");
            }
        }
        let _ = std::io::stdout().flush();
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

macro_rules! require {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn corpus() -> Rationale {
    parse_rationale(CORPUS).expect("corpus parses")
}

fn seeds(n: u64, f: impl Fn(u64) -> common::Check) -> Result<(), String> {
    (0..n).try_for_each(|seed| f(seed).map_err(|e| format!("seed {seed}: {e}")))
}

fn analyze(s: &Sandbox, rationale: &str, extra: &[&str]) -> Result<(Value, Duration), String> {
    let mut args = vec!["analyze", rationale, "--format", "json", "--no-cache"];
    args.extend_from_slice(extra);
    let start = Instant::now();
    let o = s.run(&args);
    let elapsed = start.elapsed();
    require!(code(&o) == 0, "avc analyze exited {}: {}", code(&o), stderr(&o));
    Ok((json_out(&o), elapsed))
}

fn status_of<'a>(report: &'a Value, key: &str, id_key: &str, id: &str) -> &'a str {
    report[key]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r[id_key] == id)
        .and_then(|r| r["status"].as_str())
        .unwrap_or("absent")
}

fn expect_report(report: &Value, c3: &str, checklist: &[&str]) -> Result<(), String> {
    let expected = [("C_R", "Unknown"), ("C0", "MachineValid"), ("C2", "Unknown"), ("C7", "Unknown"), ("C3", c3)];
    for (parent, status) in expected {
        let got = status_of(report, "inferences", "parent", parent);
        require!(got == status, "inference {parent}: {got}, expected {status}");
    }
    require!(report["inferences"].as_array().unwrap().len() == 5, "inference count {}", report["inferences"]);
    for claim in ["C1", "C6", "C8", "C11"] {
        let got = status_of(report, "conjectures", "claim", claim);
        require!(got == "Verified", "conjecture {claim}: {got}");
    }
    require!(report["conjectures"].as_array().unwrap().len() == 4, "conjecture count {}", report["conjectures"]);
    require!(report["checklist"] == json!(checklist), "checklist {}", report["checklist"]);
    Ok(())
}

fn corpus_end_to_end() -> Outcome {
    let s = Sandbox::new();
    let r = s.corpus();
    let (report, plain) = analyze(&s, &r, &["--no-solver"])?;
    expect_report(&report, "Unknown", &["C_R", "C2", "C4", "C5", "C7", "C9", "C10", "C3", "C12"])?;
    require!(plain < Duration::from_secs(10), "took {plain:?} without a solver");
    let Some(solver) = common::solver_command() else {
        return Err(format!("no solver on this machine; solver-free run passed in {plain:?}"));
    };
    let (report, with) = analyze(&s, &r, &["--solver", &solver])?;
    expect_report(&report, "MachineValid", &["C_R", "C2", "C4", "C5", "C7", "C9", "C10", "C12"])?;
    let tier = report["inferences"].as_array().unwrap().iter().find(|i| i["parent"] == "C3").unwrap()["tier"].clone();
    require!(tier == 2, "C3 decided at tier {tier}");
    require!(with < Duration::from_secs(30), "took {with:?} with a solver");
    Ok(format!("8 checklist items; {:.2}s without solver, {:.2}s with", plain.as_secs_f64(), with.as_secs_f64()))
}

fn string_inventory() -> Outcome {
    let prog = parse_program(common::AML).map_err(|e| e.to_string())?;
    let evidence = run_verifiers(&corpus(), &prog).map_err(|e| format!("{e:?}"))?;
    let c11 = evidence.get("C11").ok_or("no evidence for C11")?;
    let EvidenceDetails::StringInventory { inventory, non_literal, .. } = &c11.details else {
        return Err(format!("unexpected details {:?}", c11.details));
    };
    require!(c11.status == EvidenceStatus::Verified, "C11 {:?}: {}", c11.status, c11.summary);
    require!(non_literal.is_empty(), "non-literal writes {non_literal:?}");
    let set: BTreeSet<&str> = inventory.iter().map(String::as_str).collect();
    require!(inventory.len() == 7 && set.len() == 7, "inventory {inventory:?}");
    for s in [
        "Transactions involving higher-risk jurisdictions were observed",
        "Documented contextual factors may explain some observed activity",
    ] {
        require!(set.contains(s), "missing {s:?}");
    }
    Ok("7 distinct literals".into())
}

fn constant_fixtures() -> Outcome {
    let prog = parse_program(common::AML).map_err(|e| e.to_string())?;
    let consts = extract_constants(&prog);
    let expected = [
        ("LOW_RISK_WEIGHT", 1),
        ("MID_RISK_WEIGHT", 3),
        ("HIGH_RISK_WEIGHT", 6),
        ("SUSPICIOUS_THRESHOLD", 8),
        ("AMBIGUOUS_THRESHOLD", 4),
        ("MAX_MITIGATION", 4),
    ];
    for (name, value) in expected {
        let got = consts.get(name);
        require!(got == Some(&Literal::Num(Rational::from(value))), "{name} = {got:?}");
    }
    let evidence = run_verifiers(&corpus(), &prog).map_err(|e| format!("{e:?}"))?;
    let c8 = evidence.get("C8").ok_or("no evidence for C8")?;
    require!(c8.verifier == "const-relation", "C8 ran {}", c8.verifier);
    require!(c8.status == EvidenceStatus::Verified, "C8 {:?}: {}", c8.status, c8.summary);
    Ok("6 constants; C8 Verified".into())
}

fn checklist_soundness() -> Outcome {
    use common::assurance::{
        accepting_every_item_of_a_clean_case_establishes_the_root, case, doubting_any_item_blocks_the_root, refuted,
    };
    let mut clean = 0;
    let mut seed = 0;
    while clean < SOUNDNESS_CASES {
        let (c, _) = case(seed);
        if !c.r.preorder().into_iter().any(|id| refuted(&c.m, id))
            && c.m.verdicts.values().all(|v| v.status != InferenceStatus::MachineInvalid)
        {
            clean += 1;
        }
        accepting_every_item_of_a_clean_case_establishes_the_root(seed).map_err(|e| format!("seed {seed}: {e}"))?;
        seed += 1;
    }
    seeds(seed, doubting_any_item_blocks_the_root)?;
    seeds(seed, common::assurance::accepting_every_item_establishes_the_root)?;
    seeds(seed, common::assurance::statuses_match_the_closed_form)?;
    Ok(format!("{seed} rationales, {clean} without refutations, zero counterexamples"))
}

fn tier1_vs_truth_table() -> Outcome {
    let mut valid = 0;
    for seed in 0..TIER1_CASES {
        valid += u32::from(common::logic::tier1_agrees_with_truth_table(seed)?);
    }
    require!(valid > 0 && u64::from(valid) < TIER1_CASES, "degenerate sample: {valid} valid");
    Ok(format!("{TIER1_CASES} inferences ({valid} valid), zero disagreements"))
}

fn analyzer_soundness() -> Outcome {
    seeds(ANALYZER_CASES, common::analyzers::verified_inventory_covers_every_run)?;
    seeds(ANALYZER_CASES, common::analyzers::ladder_verdicts_agree_with_execution)?;
    Ok(format!("{ANALYZER_CASES} cases per property, zero violations"))
}

fn corpus_formulas(r: &Rationale) -> Vec<&Formula> {
    r.claims
        .values()
        .filter_map(|c| match &c.statement {
            Statement::Formal(phi) => Some(phi),
            _ => None,
        })
        .collect()
}

fn round_trips() -> Outcome {
    let r = corpus();
    let text = print_rationale(&r);
    let back = parse_rationale(&text).map_err(|e| e.to_string())?;
    require!(back == r && print_rationale(&back) == text, "corpus rationale does not round-trip");
    let json = serde_json::to_string(&to_interchange(&r)).unwrap();
    require!(from_interchange(&json).map_err(|e| e.to_string())? == r, "corpus interchange does not round-trip");
    for phi in corpus_formulas(&r) {
        let text = phi.to_string();
        let again = parse_formula(&text, &r.signature).map_err(|e| format!("{text}: {e}"))?;
        require!(&again == phi, "{text} reparsed as {again}");
    }
    let prog = parse_program(common::AML).map_err(|e| e.to_string())?;
    let printed = print_program(&prog);
    let reparsed = parse_program(&printed).map_err(|e| e.to_string())?;
    require!(
        prog.same_structure(&reparsed) && print_program(&reparsed) == printed,
        "corpus program does not round-trip"
    );
    seeds(ROUND_TRIP_CASES, common::dsl_round_trip)?;
    seeds(ROUND_TRIP_CASES, common::interchange_round_trip)?;
    seeds(ROUND_TRIP_CASES, common::logic::formula_round_trip)?;
    seeds(ROUND_TRIP_CASES, common::subject::sl_round_trip)?;
    Ok(format!("corpus plus {ROUND_TRIP_CASES} generated instances per format"))
}

fn run_solver(command: &str, script: &str) -> Result<String, String> {
    let mut parts = command.split_whitespace();
    let program = parts.next().ok_or("empty solver command")?;
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| format!("{program}: {e}"))?;
    child.stdin.take().unwrap().write_all(script.as_bytes()).map_err(|e| e.to_string())?;
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    Ok(String::from_utf8_lossy(&out.stdout).trim().to_string())
}

fn smt_goldens() -> Outcome {
    let r = corpus();
    let dir = common::golden_dir().join("smt");
    let parents: Vec<&str> = r.preorder().into_iter().filter(|id| r.decomposition_of(id).is_some()).collect();
    for parent in &parents {
        let path = dir.join(format!("{parent}.smt2"));
        let golden = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        require!(common::smt_script(&r, parent) == golden, "{parent} differs from its golden script");
    }
    let Some(solver) = common::solver_command() else {
        return Err(format!("{} scripts match; no solver to run C3", parents.len()));
    };
    let answer = run_solver(&solver, &common::smt_script(&r, "C3"))?;
    require!(answer.lines().next() == Some("unsat"), "C3 answered {answer:?}");
    Ok(format!("{} scripts byte-identical; C3 unsat", parents.len()))
}

fn headless() -> Outcome {
    let s = Sandbox::new();
    let url = mock_agent(CORPUS);
    let out = s.path("draft.rationale").display().to_string();
    let spec = repo("corpus/aml.spec.md").display().to_string();
    let prog = repo("corpus/aml.sl").display().to_string();
    let o = s.run(&["agent", "generate", "--spec", &spec, "--program", &prog, "--out", &out, "--endpoint", &url]);
    require!(code(&o) == 0, "agent generate exited {}: {}", code(&o), stderr(&o));
    require!(std::fs::read_to_string(&out).map_err(|e| e.to_string())? == CORPUS, "draft differs from the reply");

    let server = start_review(&s, &[]);
    let client = reqwest::blocking::Client::new();
    let items: Value = client
        .get(format!("{}/api/checklist", server.base))
        .send()
        .and_then(|r| r.error_for_status())
        .and_then(|r| r.json())
        .map_err(|e| e.to_string())?;
    require!(items.as_array().is_some_and(|a| a.len() == 9), "checklist {items}");
    let status: Value = client
        .post(format!("{}/api/judgments", server.base))
        .json(&json!({ "itemId": items[0]["id"], "verdict": "accepted" }))
        .send()
        .and_then(|r| r.error_for_status())
        .and_then(|r| r.json())
        .map_err(|e| e.to_string())?;
    require!(status["statuses"].is_object(), "status {status}");
    Ok(format!("agent via loopback mock; review API without UI assets at {}", server.base))
}

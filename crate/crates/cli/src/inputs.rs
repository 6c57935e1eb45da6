//! Loading rationale and program files, and cached analysis.

use std::fmt;
use std::path::{Path, PathBuf};

use avc_core::assurance::MachineResults;
use avc_core::inference::{ProcessSolver, SmtRunner, SolverConfig};
use avc_core::pipeline::analyze;
use avc_core::rationale::{parse_rationale, Rationale};
use avc_core::sha256_hex;
use avc_core::subject::{parse_program, SubjectProgram};

use crate::config::CacheSection;

/// A failed command: the exit code and what to print on standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn io(path: &Path, e: impl fmt::Display) -> Failure {
        Failure { code: 2, message: format!("{}: {e}", path.display()) }
    }

    pub fn parse(message: String) -> Failure {
        Failure { code: 2, message }
    }

    pub fn finding(message: String) -> Failure {
        Failure { code: 1, message }
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

pub struct LoadedRationale {
    pub path: PathBuf,
    pub source: String,
    pub rationale: Rationale,
}

pub fn load_rationale(path: &Path) -> Result<LoadedRationale, Failure> {
    let source = read(path)?;
    match parse_rationale(&source) {
        Ok(rationale) => Ok(LoadedRationale { path: path.to_path_buf(), source, rationale }),
        Err(e) => {
            let lines: Vec<String> = e.to_string().lines().map(|l| format!("{}: {l}", path.display())).collect();
            let message = lines.join("\n");
            Err(if e.is_syntax() { Failure::parse(message) } else { Failure::finding(message) })
        }
    }
}

pub struct LoadedProgram {
    pub path: PathBuf,
    pub program: SubjectProgram,
}

/// The program named by `explicit`, else the rationale's `subject` line
/// resolved against the rationale's directory.
pub fn load_program(r: &LoadedRationale, explicit: Option<&Path>) -> Result<Option<LoadedProgram>, Failure> {
    let path = match (explicit, &r.rationale.subject) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(s)) => r.path.parent().unwrap_or(Path::new("")).join(&s.path),
        (None, None) => return Ok(None),
    };
    let source = read(&path)?;
    let program = parse_program(&source).map_err(|e| Failure::parse(format!("{}:{e}", path.display())))?;
    if let Some(s) = &r.rationale.subject {
        if s.sha256 != program.source_hash {
            return Err(Failure::finding(format!(
                "stale subject: {} has sha256:{} but the rationale was written for sha256:{}; \
                 review the change and update the subject line",
                path.display(),
                program.source_hash,
                s.sha256
            )));
        }
    }
    Ok(Some(LoadedProgram { path, program }))
}

fn cache_key(r: &LoadedRationale, prog: Option<&LoadedProgram>, solver: &SolverConfig) -> String {
    let solver = if solver.enabled { format!("{} {:?}", solver.command, solver.timeout) } else { "disabled".into() };
    let material = format!(
        "avc {}\n{}\n{}\n{}\n",
        env!("CARGO_PKG_VERSION"),
        sha256_hex(r.source.as_bytes()),
        prog.map_or("none", |p| p.program.source_hash.as_str()),
        solver
    );
    sha256_hex(material.as_bytes())
}

/// Runs every inference check and verifier, reusing a cached result for
/// identical inputs and solver settings.
pub fn machine_results(
    r: &LoadedRationale,
    prog: Option<&LoadedProgram>,
    solver: &SolverConfig,
    cache: Option<&CacheSection>,
) -> Result<MachineResults, Failure> {
    let file = cache.filter(|c| c.enabled).map(|c| c.dir.join(format!("{}.json", cache_key(r, prog, solver))));
    if let Some(f) = &file {
        if let Some(m) = std::fs::read_to_string(f).ok().and_then(|t| serde_json::from_str(&t).ok()) {
            return Ok(m);
        }
    }
    let process = if solver.enabled {
        Some(ProcessSolver::new(solver).map_err(|e| Failure::parse(format!("solver: {e}")))?)
    } else {
        None
    };
    let runner = process.as_ref().map(|p| p as &dyn SmtRunner);
    let m = analyze(&r.rationale, prog.map(|p| &p.program), runner).map_err(|s| {
        Failure::finding(format!("stale subject: expected sha256:{}, found sha256:{}", s.expected, s.actual))
    })?;
    if let Some(f) = &file {
        let stored = f
            .parent()
            .map_or(Ok(()), std::fs::create_dir_all)
            .and_then(|_| std::fs::write(f, serde_json::to_string(&m).expect("results serialize")));
        if let Err(e) = stored {
            eprintln!("warning: cannot write cache {}: {e}", f.display());
        }
    }
    Ok(m)
}

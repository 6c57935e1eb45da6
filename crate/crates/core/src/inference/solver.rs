//! External SMT solver processes.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Command template. `{file}` is replaced by a temporary script path;
    /// without it the script is written to standard input.
    pub command: String,
    #[serde(with = "secs")]
    pub timeout: Duration,
    pub enabled: bool,
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverConfigError {
    #[error("solver timeout must be positive")]
    NonPositiveTimeout,
    #[error("solver command is empty")]
    EmptyCommand,
    #[error("cannot split solver command: {0}")]
    BadCommand(String),
}

impl SolverConfig {
    pub fn new(command: &str, timeout: Duration) -> Result<Self, SolverConfigError> {
        if timeout.is_zero() {
            return Err(SolverConfigError::NonPositiveTimeout);
        }
        let cfg = SolverConfig { command: command.to_string(), timeout, enabled: true };
        cfg.argv()?;
        Ok(cfg)
    }

    /// Tier 2 switched off.
    pub fn disabled() -> Self {
        SolverConfig { command: String::new(), timeout: DEFAULT_TIMEOUT, enabled: false }
    }

    pub fn argv(&self) -> Result<Vec<String>, SolverConfigError> {
        let argv = shlex::split(&self.command).ok_or_else(|| SolverConfigError::BadCommand(self.command.clone()))?;
        if argv.is_empty() {
            return Err(SolverConfigError::EmptyCommand);
        }
        Ok(argv)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverOutcome {
    Sat { model: String },
    Unsat,
    Unknown { reason: String },
}

/// Anything that can answer an SMT-LIB script.
pub trait SmtRunner: Sync {
    fn run(&self, script: &str) -> SolverOutcome;
}

pub struct ProcessSolver {
    argv: Vec<String>,
    timeout: Duration,
}

impl ProcessSolver {
    pub fn new(cfg: &SolverConfig) -> Result<Self, SolverConfigError> {
        Ok(ProcessSolver { argv: cfg.argv()?, timeout: cfg.timeout })
    }
}

/// First line that is exactly `sat`, `unsat` or `unknown` decides; for
/// `sat` the remaining output is kept as the model.
pub fn parse_answer(output: &str) -> SolverOutcome {
    let mut lines = output.lines();
    while let Some(line) = lines.next() {
        match line.trim() {
            "unsat" => return SolverOutcome::Unsat,
            "sat" => {
                let model: Vec<&str> = lines.collect();
                return SolverOutcome::Sat { model: model.join("\n").trim().to_string() };
            }
            "unknown" => return SolverOutcome::Unknown { reason: "solver answered unknown".into() },
            _ => {}
        }
    }
    let shown: String = output.trim().chars().take(200).collect();
    SolverOutcome::Unknown { reason: format!("malformed solver output: {shown:?}") }
}

impl SmtRunner for ProcessSolver {
    fn run(&self, script: &str) -> SolverOutcome {
        let unknown = |reason: String| SolverOutcome::Unknown { reason };
        let uses_file = self.argv.iter().any(|a| a.contains("{file}"));
        let mut file = None;
        let argv: Vec<String> = if uses_file {
            let mut tmp = match tempfile::Builder::new().suffix(".smt2").tempfile() {
                Ok(t) => t,
                Err(e) => return unknown(format!("cannot create script file: {e}")),
            };
            if let Err(e) = tmp.write_all(script.as_bytes()).and_then(|_| tmp.flush()) {
                return unknown(format!("cannot write script file: {e}"));
            }
            let path = tmp.path().display().to_string();
            file = Some(tmp);
            self.argv.iter().map(|a| a.replace("{file}", &path)).collect()
        } else {
            self.argv.clone()
        };

        let mut child = match Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(if uses_file { Stdio::null() } else { Stdio::piped() })
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
        {
            Ok(c) => c,
            Err(e) => return unknown(format!("solver launch failed: {}: {e}", argv[0])),
        };

        if let Some(mut stdin) = child.stdin.take() {
            let script = script.to_string();
            thread::spawn(move || {
                let _ = stdin.write_all(script.as_bytes());
            });
        }
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = thread::spawn(move || {
            let mut buf = String::new();
            let _ = stdout.read_to_string(&mut buf);
            buf
        });

        let deadline = Instant::now() + self.timeout;
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break Some(status),
                Ok(None) if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    break None;
                }
                Ok(None) => thread::sleep(Duration::from_millis(2)),
                Err(e) => return unknown(format!("waiting for solver failed: {e}")),
            }
        };
        let output = reader.join().unwrap_or_default();
        drop(file);
        match status {
            None => unknown("timeout".into()),
            Some(_) => parse_answer(&output),
        }
    }
}

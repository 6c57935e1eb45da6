//! `avc.toml` and solver selection.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use avc_agent::AgentConfig;
use avc_core::inference::SolverConfig;
use serde::Deserialize;

pub const CONFIG_FILE: &str = "avc.toml";
pub const SOLVER_ENV: &str = "AVC_SOLVER";
pub const DEFAULT_SOLVER: &str = "z3 -in";

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub solver: SolverSection,
    pub review: ReviewSection,
    pub cache: CacheSection,
    pub agent: AgentConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// Command template; `{file}` receives a script path, otherwise the
    /// script goes to standard input. Empty or "none" disables Tier 2.
    pub command: Option<String>,
    /// Seconds per solver call.
    pub timeout: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { command: None, timeout: 20.0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReviewSection {
    pub host: String,
    pub port: u16,
    pub assets: Option<PathBuf>,
}

impl Default for ReviewSection {
    fn default() -> Self {
        ReviewSection { host: "127.0.0.1".into(), port: avc_review::DEFAULT_PORT, assets: None }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheSection {
    pub enabled: bool,
    pub dir: PathBuf,
}

impl Default for CacheSection {
    fn default() -> Self {
        CacheSection { enabled: true, dir: PathBuf::from(".avc-cache") }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("solver: {0}")]
    Solver(String),
}

impl Config {
    /// Reads `explicit`, or `avc.toml` in the working directory when it
    /// exists, or falls back to defaults.
    pub fn load(explicit: Option<&Path>) -> Result<Config, ConfigError> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None if Path::new(CONFIG_FILE).is_file() => PathBuf::from(CONFIG_FILE),
            None => return Ok(Config::default()),
        };
        let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
        toml::from_str(&text).map_err(|source| ConfigError::Toml { path, source })
    }

    /// Precedence: `--no-solver`, `--solver`, `AVC_SOLVER`, the config
    /// file, then `z3` when it is on the path.
    pub fn solver(&self, flag: Option<&str>, disabled: bool) -> Result<SolverConfig, ConfigError> {
        if disabled {
            return Ok(SolverConfig::disabled());
        }
        let env = std::env::var(SOLVER_ENV).ok();
        let chosen = flag.map(String::from).or(env).or_else(|| self.solver.command.clone());
        let command = match chosen {
            Some(c) if c.trim().is_empty() || c.trim() == "none" => return Ok(SolverConfig::disabled()),
            Some(c) => c,
            None if z3_available() => DEFAULT_SOLVER.to_string(),
            None => return Ok(SolverConfig::disabled()),
        };
        let timeout =
            Duration::try_from_secs_f64(self.solver.timeout).map_err(|e| ConfigError::Solver(e.to_string()))?;
        SolverConfig::new(&command, timeout).map_err(|e| ConfigError::Solver(e.to_string()))
    }
}

fn z3_available() -> bool {
    Command::new("z3").arg("-version").stdout(Stdio::null()).stderr(Stdio::null()).status().is_ok_and(|s| s.success())
}

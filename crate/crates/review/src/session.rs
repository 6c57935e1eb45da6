//! Append-only review sessions: one header line, then one judgment per
//! line.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use avc_core::assurance::{Judgment, JudgmentLog, Verdict};
use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

pub const SESSION_FORMAT: &str = "avc-session v1";

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error(
        "{} belongs to a different {what} (session has sha256:{stored}, loaded file has sha256:{actual}); \
         move the session aside or pass --session <path>",
        path.display()
    )]
    HashMismatch { path: PathBuf, what: &'static str, stored: String, actual: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Header {
    format: String,
    rationale_hash: String,
    program_hash: Option<String>,
    created: DateTime<Utc>,
}

/// `<rationale>.session.jsonl` next to the rationale file.
pub fn default_session_path(rationale: &Path) -> PathBuf {
    let mut name = rationale.file_name().unwrap_or_default().to_os_string();
    name.push(".session.jsonl");
    rationale.with_file_name(name)
}

#[derive(Debug)]
pub struct Session {
    path: PathBuf,
    pub rationale_hash: String,
    pub program_hash: Option<String>,
    pub created: DateTime<Utc>,
    pub updated: DateTime<Utc>,
    log: JudgmentLog,
}

impl Session {
    /// Loads the session at `path`, or starts a new one there. An existing
    /// session recorded for other content is refused.
    pub fn open(path: &Path, rationale_hash: &str, program_hash: Option<&str>) -> Result<Session, SessionError> {
        let io = |source| SessionError::Io { path: path.to_path_buf(), source };
        if !path.exists() {
            let now = Utc::now();
            let header = Header {
                format: SESSION_FORMAT.into(),
                rationale_hash: rationale_hash.into(),
                program_hash: program_hash.map(String::from),
                created: now,
            };
            let mut f = File::create(path).map_err(io)?;
            writeln!(f, "{}", serde_json::to_string(&header).expect("header serializes")).map_err(io)?;
            f.sync_all().map_err(io)?;
            return Ok(Session {
                path: path.to_path_buf(),
                rationale_hash: rationale_hash.into(),
                program_hash: program_hash.map(String::from),
                created: now,
                updated: now,
                log: JudgmentLog::new(),
            });
        }

        let malformed =
            |line: usize, message: String| SessionError::Malformed { path: path.to_path_buf(), line, message };
        let reader = BufReader::new(File::open(path).map_err(io)?);
        let mut lines = reader.lines().enumerate().filter(|(_, l)| !l.as_ref().is_ok_and(|l| l.trim().is_empty()));
        let (_, first) = lines.next().ok_or_else(|| malformed(1, "empty session file".into()))?;
        let header: Header = serde_json::from_str(&first.map_err(io)?).map_err(|e| malformed(1, e.to_string()))?;
        if header.format != SESSION_FORMAT {
            return Err(malformed(1, format!("unsupported session format {:?}", header.format)));
        }
        if header.rationale_hash != rationale_hash {
            return Err(SessionError::HashMismatch {
                path: path.to_path_buf(),
                what: "rationale",
                stored: header.rationale_hash,
                actual: rationale_hash.into(),
            });
        }
        if header.program_hash.as_deref() != program_hash {
            return Err(SessionError::HashMismatch {
                path: path.to_path_buf(),
                what: "program",
                stored: header.program_hash.unwrap_or_else(|| "none".into()),
                actual: program_hash.unwrap_or("none").into(),
            });
        }
        let mut entries: Vec<Judgment> = Vec::new();
        for (i, line) in lines {
            let j: Judgment = serde_json::from_str(&line.map_err(io)?).map_err(|e| malformed(i + 1, e.to_string()))?;
            if entries.last().is_some_and(|prev| prev.timestamp >= j.timestamp) {
                return Err(malformed(i + 1, "judgment timestamps must strictly increase".into()));
            }
            entries.push(j);
        }
        let updated = entries.last().map_or(header.created, |j| j.timestamp);
        Ok(Session {
            path: path.to_path_buf(),
            rationale_hash: header.rationale_hash,
            program_hash: header.program_hash,
            created: header.created,
            updated,
            log: JudgmentLog::from_entries(entries),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn log(&self) -> &JudgmentLog {
        &self.log
    }

    /// Durably appends a judgment unless it repeats the item's current
    /// verdict and note. Returns whether anything was written.
    pub fn judge(&mut self, item_id: &str, verdict: Verdict, note: &str) -> Result<bool, SessionError> {
        if self.log.latest(item_id).is_some_and(|cur| cur.verdict == verdict && cur.note == note) {
            return Ok(false);
        }
        let floor = self.log.entries().last().map(|j| j.timestamp + TimeDelta::microseconds(1));
        let now = Utc::now();
        let timestamp = match floor {
            Some(f) if f > now => f,
            _ => now,
        };
        let j = Judgment { item_id: item_id.into(), verdict, note: note.into(), timestamp };
        let io = |source| SessionError::Io { path: self.path.clone(), source };
        let mut f = OpenOptions::new().append(true).open(&self.path).map_err(io)?;
        writeln!(f, "{}", serde_json::to_string(&j).expect("judgment serializes")).map_err(io)?;
        f.sync_all().map_err(io)?;
        self.updated = timestamp;
        self.log.record(j);
        Ok(true)
    }
}

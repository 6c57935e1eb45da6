//! Drafts a rationale with a chat-completion model and feeds validation
//! diagnostics back until it parses or the repair budget runs out.

use std::fmt;
use std::time::Duration;

use avc_core::rationale::{parse_rationale, Rationale, RationaleError};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const RATIONALE_DOC: &str = include_str!("../../../docs/rationale.md");
pub const FORMULA_DOC: &str = include_str!("../../../docs/formula-grammar.md");

pub const EMPTY_SPEC_PLACEHOLDER: &str = "(no specification was provided)";
pub const EMPTY_SPEC_WARNING: &str =
    "Warning: the specification is empty. Argue only about properties visible in the program and mark every \
     requirement you assume as an informal claim for the reviewer.";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token; no auth header when unset.
    pub token_env: Option<String>,
    pub max_repairs: u32,
    pub temperature: Option<f64>,
    #[serde(with = "secs")]
    pub timeout: Duration,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            endpoint: "http://127.0.0.1:8080/v1/chat/completions".into(),
            model: "default".into(),
            token_env: None,
            max_repairs: 3,
            temperature: None,
            timeout: Duration::from_secs(120),
        }
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_secs())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_secs)
    }
}

/// Grammar documents embedded in the prompt.
#[derive(Clone, Debug)]
pub struct GrammarDocs {
    pub rationale: String,
    pub formula: String,
}

impl GrammarDocs {
    pub fn v1() -> Self {
        GrammarDocs { rationale: RATIONALE_DOC.into(), formula: FORMULA_DOC.into() }
    }
}

const VOCABULARY: &str = "\
- `output-shape(fn=..., <field>=...)`: every return of `fn` is a record with the listed fields.
- `string-inventory(fn=..., sink=...)`: the string literals reaching list `sink` are among those in the claim's `in {...}` set.
- `threshold-ladder(fn=..., score=..., order=[...])`: the decision is a monotone if/elif/else ladder on `score`.
- `const-relation(<symbol>=<CONST>, ...)`: binds 0-ary symbols to program constants and evaluates the claim.";

pub fn render_prompt(spec: &str, program: &str, docs: &GrammarDocs) -> String {
    let mut out = String::new();
    out.push_str(
        "You are given a specification and a program written to meet it. Explain why the program is adequate \
         by writing a rationale: a tree of claims whose root states that the program meets the specification.\n\n",
    );
    out.push_str("## Specification\n\n");
    if spec.trim().is_empty() {
        out.push_str(EMPTY_SPEC_PLACEHOLDER);
        out.push_str("\n\n");
        out.push_str(EMPTY_SPEC_WARNING);
        out.push('\n');
    } else {
        out.push_str(spec.trim_end());
        out.push('\n');
    }
    out.push_str("\n## Program\n\n```\n");
    out.push_str(program.trim_end());
    out.push_str("\n```\n\n## Rationale language\n\n");
    out.push_str(docs.rationale.trim_end());
    out.push_str("\n\n## Formula language\n\n");
    out.push_str(docs.formula.trim_end());
    out.push_str("\n\n## Instructions\n\n");
    out.push_str(
        "- Reply with the rationale only. Its first line is `# rationale v1`.\n\
         - Formalize what can be formalized in the root's subclaim and keep the rest as uninterpreted predicates or informal statements.\n\
         - Decompose claims until every leaf is a conjecture precise enough to be checked directly, by a verifier or by a reader of the program.\n\
         - Attach a `verify:` hint to a leaf when one of these verifiers applies:\n",
    );
    for line in VOCABULARY.lines() {
        out.push_str("  ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("- Pin the program with a `subject` line naming its file and sha256.\n");
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

impl Message {
    pub fn user(content: impl Into<String>) -> Self {
        Message { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Message { role: "assistant".into(), content: content.into() }
    }
}

/// Wire format of one provider.
pub trait Dialect {
    fn request_body(&self, cfg: &AgentConfig, messages: &[Message]) -> Value;
    fn reply_text(&self, response: &Value) -> Option<String>;
}

/// OpenAI-style chat completions; the reply is `choices[0].message.content`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ChatCompletions;

impl Dialect for ChatCompletions {
    fn request_body(&self, cfg: &AgentConfig, messages: &[Message]) -> Value {
        let mut body = json!({ "model": cfg.model, "messages": messages });
        if let Some(t) = cfg.temperature {
            body["temperature"] = json!(t);
        }
        body
    }

    fn reply_text(&self, response: &Value) -> Option<String> {
        response.pointer("/choices/0/message/content")?.as_str().map(String::from)
    }
}

/// One request and the raw response body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub request: Value,
    pub response: String,
}

#[derive(Debug)]
pub struct Generation {
    pub rationale: Rationale,
    pub text: String,
    pub transcript: Vec<Exchange>,
}

#[derive(Debug)]
pub struct FailureReport {
    /// Diagnostics of each rejected reply, in order.
    pub diagnostics: Vec<Vec<String>>,
    pub transcript: Vec<Exchange>,
}

impl fmt::Display for FailureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "no valid rationale after {} attempt(s)", self.transcript.len())?;
        for (i, ds) in self.diagnostics.iter().enumerate() {
            writeln!(f, "attempt {}:", i + 1)?;
            for d in ds {
                writeln!(f, "  {d}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("environment variable {0} holding the API token is not set")]
    MissingToken(String),
    #[error("request to {endpoint} failed: {source}")]
    Http { endpoint: String, source: reqwest::Error },
    #[error("{endpoint} answered {status}: {body}")]
    Status { endpoint: String, status: u16, body: String, transcript: Vec<Exchange> },
    #[error("unexpected response shape: {0}")]
    Response(String),
    #[error("{0}")]
    Exhausted(FailureReport),
}

/// Text of the first fenced block when the reply has one, else the reply.
pub fn strip_fences(reply: &str) -> &str {
    let Some(open) = reply.find("```") else { return reply };
    let after = &reply[open + 3..];
    let Some(nl) = after.find('\n') else { return reply };
    let body = &after[nl + 1..];
    match body.find("```") {
        Some(close) => &body[..close],
        None => body,
    }
}

fn diagnostics(e: &RationaleError) -> Vec<String> {
    match e {
        RationaleError::Invalid(ds) => ds.iter().map(|d| d.to_string()).collect(),
        other => vec![other.to_string()],
    }
}

fn repair_message(ds: &[String]) -> String {
    let mut s = String::from("The rationale was rejected by the checker:\n\n");
    for d in ds {
        s.push_str("- ");
        s.push_str(d);
        s.push('\n');
    }
    s.push_str("\nReply with the whole corrected rationale only, starting with `# rationale v1`.");
    s
}

pub fn generate_with_repair(cfg: &AgentConfig, prompt: &str) -> Result<Generation, AgentError> {
    generate_with(cfg, &ChatCompletions, prompt)
}

pub fn generate_with(cfg: &AgentConfig, dialect: &dyn Dialect, prompt: &str) -> Result<Generation, AgentError> {
    let token = match &cfg.token_env {
        Some(var) => Some(std::env::var(var).map_err(|_| AgentError::MissingToken(var.clone()))?),
        None => None,
    };
    let http = |source| AgentError::Http { endpoint: cfg.endpoint.clone(), source };
    let client = reqwest::blocking::Client::builder().timeout(cfg.timeout).build().map_err(http)?;

    let mut messages = vec![Message::user(prompt)];
    let mut transcript = Vec::new();
    let mut all_diags = Vec::new();
    for _ in 0..=cfg.max_repairs {
        let body = dialect.request_body(cfg, &messages);
        let mut req = client.post(&cfg.endpoint).json(&body);
        if let Some(t) = &token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().map_err(http)?;
        let status = resp.status();
        let raw = resp.text().map_err(http)?;
        transcript.push(Exchange { request: body, response: raw.clone() });
        if !status.is_success() {
            return Err(AgentError::Status {
                endpoint: cfg.endpoint.clone(),
                status: status.as_u16(),
                body: raw,
                transcript,
            });
        }
        let value: Value = serde_json::from_str(&raw).map_err(|e| AgentError::Response(e.to_string()))?;
        let reply = dialect
            .reply_text(&value)
            .ok_or_else(|| AgentError::Response("no reply text at choices[0].message.content".into()))?;
        let text = strip_fences(&reply).to_string();
        match parse_rationale(&text) {
            Ok(rationale) => return Ok(Generation { rationale, text, transcript }),
            Err(e) => {
                let ds = diagnostics(&e);
                messages.push(Message::assistant(reply));
                messages.push(Message::user(repair_message(&ds)));
                all_diags.push(ds);
            }
        }
    }
    Err(AgentError::Exhausted(FailureReport { diagnostics: all_diags, transcript }))
}

mod config;
mod inputs;
mod report;

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use avc_agent::{generate_with_repair, render_prompt, AgentError, GrammarDocs};
use avc_core::assurance::{checklist_json, checklist_markdown, extract_checklist, ChecklistItem, MachineResults};
use avc_core::inference::{emit_smt, SolverConfig};
use avc_core::pipeline::Tally;
use avc_core::rationale::{parse_rationale_unchecked, validate_structure};
use avc_review::{default_session_path, serve, Review, Session};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::Config;
use inputs::{load_program, load_rationale, machine_results, read, Failure, LoadedProgram, LoadedRationale};
use report::{Report, SubjectView};

#[derive(Parser)]
#[command(name = "avc", version, about = "Check adequacy rationales for generated programs")]
struct Cli {
    /// Configuration file (default: ./avc.toml when present).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a rationale and validate its structure.
    Check { rationale: PathBuf },
    /// Check every inference and run every verifier hint.
    Analyze(AnalyzeArgs),
    /// Print the items a human must judge.
    Checklist {
        #[command(flatten)]
        analysis: AnalyzeArgs,
        /// Include the verdicts recorded in this review session.
        #[arg(long)]
        session: Option<PathBuf>,
    },
    /// Serve the review API and record verdicts.
    Review {
        #[command(flatten)]
        analysis: AnalyzeArgs,
        /// Port to listen on; 0 picks a free one (default 7341).
        #[arg(long)]
        port: Option<u16>,
        /// Address to bind (default 127.0.0.1).
        #[arg(long)]
        host: Option<IpAddr>,
        /// Session file (default: <rationale>.session.jsonl).
        #[arg(long)]
        session: Option<PathBuf>,
        /// Directory of built UI assets to serve at /.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
    /// Write the SMT-LIB script of every inference to a directory.
    Smt {
        rationale: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Draft rationales with a language model.
    #[command(subcommand)]
    Agent(AgentCmd),
}

#[derive(Args)]
struct AnalyzeArgs {
    rationale: PathBuf,
    /// Program under review (default: the rationale's subject line).
    #[arg(long)]
    program: Option<PathBuf>,
    /// Solver command template; overrides AVC_SOLVER and the config file.
    #[arg(long)]
    solver: Option<String>,
    /// Skip Tier 2.
    #[arg(long)]
    no_solver: bool,
    /// Ignore and do not write the analysis cache.
    #[arg(long)]
    no_cache: bool,
    /// Output format (default: text for analyze, markdown for checklist).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum AgentCmd {
    /// Print the prompt that `generate` would send.
    Prompt(PromptArgs),
    /// Ask the model for a rationale, repairing it until it validates.
    Generate {
        #[command(flatten)]
        prompt: PromptArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long)]
        model: Option<String>,
        /// Environment variable holding the bearer token.
        #[arg(long)]
        token_env: Option<String>,
        #[arg(long)]
        max_repairs: Option<u32>,
    },
}

#[derive(Args)]
struct PromptArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    program: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Markdown,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Config::load(cli.config.as_deref())
        .map_err(|e| Failure::parse(e.to_string()))
        .and_then(|cfg| run(cli.command, &cfg));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Cmd, cfg: &Config) -> Result<u8, Failure> {
    match cmd {
        Cmd::Check { rationale } => check(&rationale),
        Cmd::Analyze(a) => {
            let (r, prog, solver, m) = analysis(&a, cfg)?;
            let items = checklist(&r, &m)?;
            let report = Report::new(&r.rationale, &m, &items, subject_view(prog.as_ref()), solver_name(&solver));
            let text = match a.format.unwrap_or(Format::Text) {
                Format::Text => report.text(),
                Format::Json => report.json(),
                Format::Markdown => report.markdown(),
            };
            emit(&text)?;
            Ok(findings_code(&m))
        }
        Cmd::Checklist { analysis: a, session } => {
            let (r, prog, _, m) = analysis(&a, cfg)?;
            let items = checklist(&r, &m)?;
            let session = match &session {
                Some(p) if !p.is_file() => return Err(Failure::io(p, "no such session file")),
                Some(p) => Some(open_session(p, &r, prog.as_ref())?),
                None => None,
            };
            let log = session.as_ref().map(|s| s.log());
            let text = match a.format.unwrap_or(Format::Markdown) {
                Format::Json => serde_json::to_string_pretty(&checklist_json(&items, log)).expect("json") + "\n",
                Format::Text | Format::Markdown => checklist_markdown(&r.rationale, &items, log),
            };
            emit(&text)?;
            Ok(findings_code(&m))
        }
        Cmd::Review { analysis: a, port, host, session, assets } => {
            let (r, prog, _, m) = analysis(&a, cfg)?;
            let session_path = session.unwrap_or_else(|| default_session_path(&r.path));
            let host = host.unwrap_or_else(|| cfg.review.host.parse().unwrap_or(IpAddr::from([127, 0, 0, 1])));
            let addr = SocketAddr::new(host, port.unwrap_or(cfg.review.port));
            let assets = assets.or_else(|| cfg.review.assets.clone());
            review(r, prog, m, &session_path, addr, assets.as_deref())
        }
        Cmd::Smt { rationale, out } => smt(&rationale, &out),
        Cmd::Agent(AgentCmd::Prompt(p)) => {
            let (spec, program) = (read(&p.spec)?, read(&p.program)?);
            emit(&render_prompt(&spec, &program, &GrammarDocs::v1()))?;
            Ok(0)
        }
        Cmd::Agent(AgentCmd::Generate { prompt, out, endpoint, model, token_env, max_repairs }) => {
            let mut agent = cfg.agent.clone();
            agent.endpoint = endpoint.unwrap_or(agent.endpoint);
            agent.model = model.unwrap_or(agent.model);
            agent.token_env = token_env.or(agent.token_env);
            agent.max_repairs = max_repairs.unwrap_or(agent.max_repairs);
            generate(&agent, &prompt, &out)
        }
    }
}

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::io(Path::new("<stdout>"), e))
}

fn findings_code(m: &MachineResults) -> u8 {
    u8::from(Tally::of(m).has_findings())
}

fn check(path: &Path) -> Result<u8, Failure> {
    let source = read(path)?;
    let r = match parse_rationale_unchecked(&source) {
        Ok(r) => r,
        Err(e) => {
            let msg = format!("{}: {e}", path.display());
            return Err(if e.is_syntax() { Failure::parse(msg) } else { Failure::finding(msg) });
        }
    };
    let diags = validate_structure(&r);
    if !diags.is_empty() {
        let lines: Vec<String> = diags
            .iter()
            .map(|d| {
                let kind =
                    serde_json::to_value(d.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                format!("{}: {kind}: {d}", path.display())
            })
            .collect();
        return Err(Failure::finding(lines.join("\n")));
    }
    println!("{}: ok ({} claims, {} decompositions)", r.name, r.claims.len(), r.decompositions.len());
    Ok(0)
}

type Analysis = (LoadedRationale, Option<LoadedProgram>, SolverConfig, MachineResults);

fn analysis(a: &AnalyzeArgs, cfg: &Config) -> Result<Analysis, Failure> {
    let r = load_rationale(&a.rationale)?;
    let prog = load_program(&r, a.program.as_deref())?;
    let solver = cfg.solver(a.solver.as_deref(), a.no_solver).map_err(|e| Failure::parse(e.to_string()))?;
    let cache = (!a.no_cache).then_some(&cfg.cache);
    let m = machine_results(&r, prog.as_ref(), &solver, cache)?;
    Ok((r, prog, solver, m))
}

fn checklist(r: &LoadedRationale, m: &MachineResults) -> Result<Vec<ChecklistItem>, Failure> {
    extract_checklist(&r.rationale, m).map_err(|e| Failure::finding(e.to_string()))
}

fn subject_view(prog: Option<&LoadedProgram>) -> Option<SubjectView> {
    prog.map(|p| SubjectView { path: p.path.display().to_string(), sha256: p.program.source_hash.clone() })
}

fn solver_name(s: &SolverConfig) -> Option<String> {
    s.enabled.then(|| s.command.clone())
}

fn open_session(path: &Path, r: &LoadedRationale, prog: Option<&LoadedProgram>) -> Result<Session, Failure> {
    let hash = avc_core::sha256_hex(r.source.as_bytes());
    Session::open(path, &hash, prog.map(|p| p.program.source_hash.as_str()))
        .map_err(|e| Failure::finding(e.to_string()))
}

fn review(
    r: LoadedRationale,
    prog: Option<LoadedProgram>,
    m: MachineResults,
    session: &Path,
    addr: SocketAddr,
    assets: Option<&Path>,
) -> Result<u8, Failure> {
    let LoadedRationale { source, rationale, .. } = r;
    let review = Review::open(rationale, &source, prog.as_ref().map(|p| &p.program), m, session)
        .map_err(|e| Failure::finding(e.to_string()))?;
    let items = review.checklist().len();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::io(Path::new("<runtime>"), e))?;
    runtime.block_on(async move {
        let handle = serve(Arc::new(review), addr, assets).await.map_err(|e| Failure::parse(e.to_string()))?;
        println!("review: http://{}/ ({items} checklist item(s), session {})", handle.addr, session.display());
        let _ = std::io::stdout().flush();
        tokio::select! {
            _ = tokio::signal::ctrl_c() => handle.shutdown().await,
            r = std::future::pending::<std::io::Result<()>>() => r,
        }
        .map_err(|e| Failure::io(Path::new("<server>"), e))?;
        Ok(0)
    })
}

fn smt(path: &Path, out: &Path) -> Result<u8, Failure> {
    let r = load_rationale(path)?.rationale;
    std::fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    let mut code = 0;
    for id in r.preorder() {
        let Some((premises, conclusion)) = r.inference(id) else { continue };
        match emit_smt(&r.signature, &premises, &conclusion) {
            Ok(script) => {
                let file = out.join(format!("{id}.smt2"));
                std::fs::write(&file, script).map_err(|e| Failure::io(&file, e))?;
                println!("{}", file.display());
            }
            Err(e) => {
                eprintln!("{id}: {e}");
                code = 1;
            }
        }
    }
    Ok(code)
}

fn generate(agent: &avc_agent::AgentConfig, p: &PromptArgs, out: &Path) -> Result<u8, Failure> {
    let (spec, program) = (read(&p.spec)?, read(&p.program)?);
    if spec.trim().is_empty() {
        eprintln!("warning: {} is empty; the prompt carries a placeholder", p.spec.display());
    }
    let prompt = render_prompt(&spec, &program, &GrammarDocs::v1());
    let transcript_path = {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".transcript.json");
        out.with_file_name(name)
    };
    let save_transcript = |t: &[avc_agent::Exchange]| {
        let text = serde_json::to_string_pretty(t).expect("transcript serializes");
        std::fs::write(&transcript_path, text).map_err(|e| Failure::io(&transcript_path, e))
    };
    match generate_with_repair(agent, &prompt) {
        Ok(g) => {
            std::fs::write(out, &g.text).map_err(|e| Failure::io(out, e))?;
            save_transcript(&g.transcript)?;
            println!(
                "{}: rationale {} ({} claims) after {} exchange(s); transcript in {}",
                out.display(),
                g.rationale.name,
                g.rationale.claims.len(),
                g.transcript.len(),
                transcript_path.display()
            );
            Ok(0)
        }
        Err(AgentError::Exhausted(report)) => {
            save_transcript(&report.transcript)?;
            Err(Failure::finding(format!("{report}transcript in {}", transcript_path.display())))
        }
        Err(e) => {
            if let AgentError::Status { transcript, .. } = &e {
                save_transcript(transcript)?;
            }
            Err(Failure::parse(e.to_string()))
        }
    }
}

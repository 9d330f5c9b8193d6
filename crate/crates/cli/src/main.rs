//! `iasm`: parse, run, check, bound and synthesize interactive small-step
//! abstract state machines.
//!
//! Exit codes: 0 ok, 1 parse, validation or check failure, 2 the step
//! failed, 3 the step stalled.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use iasm_core::analysis::{bound_rule_with, check_lemmas, witness_rule, BoundMode, HarnessConfig};
use iasm_core::engine::{run, RandomEnv, ReplyUniverse, ScriptedEnv, StepResult, StepVerdict};
use iasm_core::model::{Elem, Structure};
use iasm_core::syntax::{parse_program, printer, validate, Program, Severity};
use iasm_core::synthesis::{
    builtin, builtin_names, check_equivalence, synthesize, AlgorithmOracle, ProgramOracle, SynthConfig, TableOracle,
};
use iasm_session::{ClientMessage, Sessions};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

#[derive(Parser)]
#[command(name = "iasm", version, about = "Interactive small-step abstract state machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a program; print diagnostics as JSON.
    Parse {
        file: PathBuf,
        /// Also print the desugared program.
        #[arg(long)]
        emit_ast: bool,
    },
    /// Run steps against a scripted, random or remote environment.
    Run {
        file: PathBuf,
        #[arg(long)]
        state: PathBuf,
        /// Rounds to hand out, as `{"rounds": [[{query, reply}, ...], ...]}`.
        #[arg(long, conflicts_with_all = ["random", "serve"])]
        env: Option<PathBuf>,
        /// Seed for random replies.
        #[arg(long, conflicts_with = "serve")]
        random: Option<u64>,
        /// Replies the random environment chooses from; the state's
        /// elements when absent.
        #[arg(long, value_delimiter = ',')]
        replies: Vec<String>,
        /// Serve one preloaded session on this address instead.
        #[arg(long)]
        serve: Option<SocketAddr>,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
    /// Run the semantic property checks on random cases.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        cases: usize,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        #[arg(long, default_value_t = 3)]
        elements: usize,
        #[arg(long, value_delimiter = ',')]
        replies: Vec<String>,
    },
    /// Print the work bound and the exploration witness.
    Bounds {
        file: PathBuf,
        /// Bound a conditional by its costlier branch instead of both.
        #[arg(long)]
        max: bool,
    },
    /// Extract a program from an oracle and check it against the oracle.
    Synth {
        /// `builtin:NAME`, an oracle table (`.json`) or a program (`.asm`).
        oracle: String,
        /// Probe states when the oracle is a program.
        #[arg(long)]
        probe: Vec<PathBuf>,
        /// Reply universe when the oracle is a program.
        #[arg(long, value_delimiter = ',')]
        replies: Vec<String>,
        /// Work bound override when the oracle is a program.
        #[arg(long)]
        bound: Option<usize>,
        /// Write the extracted program here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        max_critical_terms: Option<usize>,
        #[arg(long)]
        max_pairs: Option<usize>,
    },
    /// Serve sessions over HTTP and websocket.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn load_program(path: &Path) -> Result<Program, CliError> {
    Program::parse(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_state(path: &Path, program: Option<&Program>) -> Result<Structure, CliError> {
    let x: Structure = serde_json::from_str(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    match program {
        Some(p) => x.conform(&p.vocab).map_err(invalid),
        None => Ok(x),
    }
}

fn elems(names: &[String]) -> Vec<Elem> {
    names.iter().map(|n| Elem::new(n.as_str())).collect()
}

/// Write one line to stdout. A closed pipe is not an error for us.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}

fn print_json(v: &impl Serialize) {
    emit(&serde_json::to_string_pretty(v).expect("serializable"));
}

fn verdict_code(v: StepVerdict) -> u8 {
    match v {
        StepVerdict::Success => 0,
        StepVerdict::Fail => 2,
        StepVerdict::Stalled => 3,
    }
}

fn cmd_parse(file: &Path, emit_ast: bool) -> Result<u8, CliError> {
    let src = read(file)?;
    let (diagnostics, ast) = match parse_program(&src) {
        Err(e) => (vec![e.diagnostic()], None),
        Ok(sugar) => {
            let diags = validate(&sugar);
            let ast = if diags.iter().any(|d| d.severity == Severity::Error) {
                None
            } else {
                Program::parse(&src).ok().map(|p| printer::program(&p))
            };
            (diags, ast)
        }
    };
    let ok = !diagnostics.iter().any(|d| d.severity == Severity::Error);
    let mut out = json!({"ok": ok, "diagnostics": diagnostics});
    if emit_ast {
        out["ast"] = json!(ast);
    }
    print_json(&out);
    Ok(if ok { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    file: &Path,
    state: &Path,
    env: Option<&Path>,
    random: Option<u64>,
    replies: &[String],
    serve: Option<SocketAddr>,
    steps: usize,
) -> Result<u8, CliError> {
    let program = load_program(file)?;
    let x = load_state(state, Some(&program))?;
    if let Some(addr) = serve {
        return serve_sessions(addr, Some((read(file)?, x)));
    }
    let results: Vec<StepResult> = match (env, random) {
        (Some(path), _) => {
            let mut env = ScriptedEnv::from_json(&read(path)?).map_err(invalid)?;
            run(&program, &x, &mut env, steps).map_err(invalid)?
        }
        (None, Some(seed)) => {
            let universe = ReplyUniverse {
                default: elems(replies),
                ..Default::default()
            };
            let mut env = RandomEnv::new(seed, universe);
            run(&program, &x, &mut env, steps).map_err(invalid)?
        }
        (None, None) => return Err(invalid("one of --env, --random or --serve is required")),
    };
    print_json(&json!({ "steps": &results }));
    Ok(results.last().map_or(0, |r| verdict_code(r.verdict)))
}

fn cmd_check(file: &Path, config: HarnessConfig) -> Result<u8, CliError> {
    let program = load_program(file)?;
    let report = check_lemmas(&program, &config);
    print_json(&report);
    Ok(if report.passed() { 0 } else { 1 })
}

#[derive(Serialize)]
struct Bounds {
    #[serde(rename = "B")]
    b: usize,
    #[serde(rename = "W")]
    w: Vec<String>,
}

fn cmd_bounds(file: &Path, max: bool) -> Result<u8, CliError> {
    let p = load_program(file)?;
    let mode = if max { BoundMode::Max } else { BoundMode::Sum };
    let out = Bounds {
        b: bound_rule_with(&p.rule, mode),
        w: witness_rule(&p.rule, &p.external).normalized().printed(),
    };
    emit(&serde_json::to_string(&out).expect("serializable"));
    Ok(0)
}

struct SynthArgs {
    oracle: String,
    probe: Vec<PathBuf>,
    replies: Vec<String>,
    bound: Option<usize>,
    out: Option<PathBuf>,
    config: SynthConfig,
}

fn load_oracle(a: &SynthArgs) -> Result<Box<dyn AlgorithmOracle>, CliError> {
    if let Some(name) = a.oracle.strip_prefix("builtin:") {
        return builtin(name).map(|o| Box::new(o) as Box<dyn AlgorithmOracle>).ok_or_else(|| {
            invalid(format!("unknown builtin {name}; known: {}", builtin_names().join(", ")))
        });
    }
    let path = Path::new(&a.oracle);
    if path.extension().is_some_and(|e| e == "asm") {
        let program = load_program(path)?;
        if a.probe.is_empty() {
            return Err(invalid("a program oracle needs at least one --probe state"));
        }
        let probes = a
            .probe
            .iter()
            .map(|s| load_state(s, Some(&program)))
            .collect::<Result<Vec<_>, _>>()?;
        let universe = ReplyUniverse {
            default: elems(&a.replies),
            ..Default::default()
        };
        let name = path.file_stem().map_or("program".into(), |s| s.to_string_lossy().into_owned());
        let mut o = ProgramOracle::new(&name, program, probes, universe);
        if let Some(b) = a.bound {
            o = o.with_bound(b);
        }
        return Ok(Box::new(o));
    }
    Ok(Box::new(TableOracle::from_json(&read(path)?).map_err(invalid)?))
}

fn cmd_synth(a: SynthArgs) -> Result<u8, CliError> {
    let oracle = load_oracle(&a)?;
    let s = synthesize(oracle.as_ref(), &a.config).map_err(invalid)?;
    let report = check_equivalence(oracle.as_ref(), &s.program, a.config.max_pairs).map_err(invalid)?;
    let source = s.program.to_source();
    if let Some(out) = &a.out {
        std::fs::write(out, &source).map_err(|source| CliError::Io {
            path: out.display().to_string(),
            source,
        })?;
    }
    print_json(&json!({
        "oracle": oracle.name(),
        "program": source,
        "stats": s.stats,
        "equivalence": report,
    }));
    Ok(if report.is_equivalent() { 0 } else { 1 })
}

fn serve_sessions(addr: SocketAddr, preload: Option<(String, Structure)>) -> Result<u8, CliError> {
    let sessions = Arc::new(Sessions::default());
    let preloaded = match preload {
        Some((asm_text, x)) => {
            let (id, s) = sessions.create();
            let state_json = serde_json::to_value(&x).expect("serializable");
            s.lock().expect("session").handle(ClientMessage::LoadProgram { asm_text, state_json });
            Some(id)
        }
        None => None,
    };
    let rt = tokio::runtime::Runtime::new().map_err(invalid)?;
    rt.block_on(iasm_session::serve_with(addr, sessions, |bound| {
        emit(&json!({"listening": bound.to_string(), "session": preloaded}).to_string());
    }))
    .map_err(invalid)?;
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Parse { file, emit_ast } => cmd_parse(&file, emit_ast),
        Command::Run {
            file,
            state,
            env,
            random,
            replies,
            serve,
            steps,
        } => cmd_run(&file, &state, env.as_deref(), random, &replies, serve, steps),
        Command::Check {
            file,
            seed,
            cases,
            max_len,
            elements,
            replies,
        } => cmd_check(
            &file,
            HarnessConfig {
                seed,
                cases,
                max_len,
                elements,
                replies: elems(&replies),
                ..Default::default()
            },
        ),
        Command::Bounds { file, max } => cmd_bounds(&file, max),
        Command::Synth {
            oracle,
            probe,
            replies,
            bound,
            out,
            max_critical_terms,
            max_pairs,
        } => {
            let mut config = SynthConfig::default();
            if let Some(n) = max_critical_terms {
                config.max_critical_terms = n;
            }
            if let Some(n) = max_pairs {
                config.max_pairs = n;
            }
            cmd_synth(SynthArgs {
                oracle,
                probe,
                replies,
                bound,
                out,
                config,
            })
        }
        Command::Serve { addr } => serve_sessions(addr, None),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("iasm: {e}");
            ExitCode::from(1)
        }
    }
}

//! `affine-am`: run, inspect and export affine interactive-proof verifiers.
//!
//! Exit codes: 0 when every bound holds, 2 when a bound is violated (or an inspected
//! spec fails validation), 1 for usage, parse and evaluation errors.

mod config;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use affine_am::engine::{trace, EngineConfig};
use affine_am::machine::{validate, StateRole, VerifierSpec};
use affine_am::protocols::ProtocolBundle;
use affine_am::rational::format_rational;
use affine_am::tm::sample_machines;

use config::{all_words, build_bundle, EvalMode, ExperimentConfig, Inputs, PROTOCOLS};
use report::{evaluate, summarize, write_csv, RunSettings};

#[derive(Parser)]
#[command(name = "affine-am", version, about = "Affine Arthur-Merlin verifier experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a protocol on a set of inputs and check the acceptance bounds.
    Run(RunArgs),
    /// Print a verifier's alphabets, registers, operators and states, then validate it.
    Inspect(InspectArgs),
    /// List the bundled protocols and machines.
    Catalog,
    /// Sample one run against the honest prover and log every step as JSON.
    Trace(TraceArgs),
    /// Write a protocol's verifier as JSON.
    Export(ProtocolArgs),
}

#[derive(Args, Clone)]
struct ProtocolArgs {
    /// Experiment config (JSON); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Protocol name, optionally `name:machine`.
    #[arg(long)]
    protocol: Option<String>,
    /// Bundled machine name or machine JSON file.
    #[arg(long)]
    machine: Option<String>,
    /// Error bound as `p/q`, strictly between 0 and 1/2.
    #[arg(long)]
    epsilon: Option<String>,
    /// Output directory instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    /// Input word (repeatable).
    #[arg(long)]
    input: Vec<String>,
    /// Every word over the input alphabet up to this length.
    #[arg(long, conflicts_with = "input")]
    all_up_to: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<EvalMode>,
    #[command(flatten)]
    engine: EngineArgs,
    /// Monte Carlo trials per input.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// Step budget per run.
    #[arg(long)]
    horizon: Option<u64>,
    /// Node budget of exact evaluation.
    #[arg(long)]
    node_cap: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct InspectArgs {
    /// Verifier JSON file; otherwise the protocol flags select one.
    spec: Option<PathBuf>,
    #[command(flatten)]
    protocol: ProtocolArgs,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long)]
    input: String,
    #[command(flatten)]
    engine: EngineArgs,
}

/// Config file (if any) with the flags layered on top.
fn experiment(p: &ProtocolArgs, inputs: Option<Inputs>) -> Result<ExperimentConfig> {
    let mut cfg = match &p.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig {
            protocol: p.protocol.clone().context("--protocol or --config is required")?,
            machine: None,
            epsilon: p.epsilon.clone().context("--epsilon or --config is required")?,
            alphabet: None,
            continuation: None,
            inputs: Inputs::Words(Vec::new()),
            mode: EvalMode::default(),
            horizon: 100_000,
            node_cap: 5_000_000,
            trials: 10_000,
            seed: 0,
        },
    };
    if let Some(x) = &p.protocol {
        cfg.protocol = x.clone();
    }
    if let Some(x) = &p.machine {
        cfg.machine = Some(x.clone());
    }
    if let Some(x) = &p.epsilon {
        cfg.epsilon = x.clone();
    }
    if let Some(x) = inputs {
        cfg.inputs = x;
    }
    Ok(cfg)
}

fn apply_engine(cfg: &mut ExperimentConfig, e: &EngineArgs) {
    if let Some(x) = e.horizon {
        cfg.horizon = x;
    }
    if let Some(x) = e.node_cap {
        cfg.node_cap = x;
    }
    if let Some(x) = e.seed {
        cfg.seed = x;
    }
}

/// Writes `text` to `dir/name`, or to stdout without a directory.
fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let inputs = match (args.all_up_to, args.input.is_empty()) {
        (Some(n), _) => Some(Inputs::AllUpTo(n)),
        (None, false) => Some(Inputs::Words(args.input.clone())),
        (None, true) => None,
    };
    let mut cfg = experiment(&args.protocol, inputs)?;
    apply_engine(&mut cfg, &args.engine);
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    cfg.validate()?;
    let bundle = build_bundle(&cfg)?;
    let words = match &cfg.inputs {
        Inputs::Words(w) if w.is_empty() => bail!("no inputs: pass --input, --all-up-to or `inputs` in the config"),
        Inputs::Words(w) => w.clone(),
        Inputs::AllUpTo(n) => all_words(&bundle.verifier.input_alphabet, *n),
    };
    let settings = RunSettings {
        mode: cfg.mode,
        engine: EngineConfig {
            horizon: cfg.horizon,
            node_cap: cfg.node_cap,
        },
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let rows = words
        .iter()
        .map(|w| evaluate(&bundle, w, &settings).with_context(|| format!("evaluating {w:?}")))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&bundle, &settings, &rows);

    let mut csv = Vec::new();
    write_csv(&mut csv, &rows)?;
    let json = serde_json::to_string_pretty(&summary)? + "\n";
    match &args.protocol.out {
        Some(dir) => {
            emit(Some(dir), "report.csv", &String::from_utf8(csv)?)?;
            emit(Some(dir), "summary.json", &json)?;
        }
        None => {
            std::io::stdout().write_all(&csv)?;
            eprint!("{json}");
        }
    }
    Ok(if summary.all_bounds_ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn bundle_from(p: &ProtocolArgs) -> Result<ProtocolBundle> {
    let cfg = experiment(p, None)?;
    cfg.validate()?;
    build_bundle(&cfg)
}

fn describe(spec: &VerifierSpec) -> String {
    let mut s = String::new();
    let mut line = |t: String| {
        s.push_str(&t);
        s.push('\n');
    };
    line(format!("name: {}", spec.name));
    line(format!("mode: {:?}", spec.mode));
    line(format!("input alphabet: {}", spec.input_alphabet.iter().collect::<String>()));
    line(format!("communication alphabet: {}", spec.comm_alphabet.join(" ")));
    for (i, reg) in spec.registers.iter().enumerate() {
        line(format!(
            "register {i} {:?}: dim {}, accepting {:?}, {} operators",
            reg.name,
            reg.dim,
            reg.accepting,
            reg.operators.len()
        ));
        for (k, op) in reg.operators.iter().enumerate() {
            line(format!("  operator {k} {:?}", op.name));
            for row in op.matrix.rows() {
                let cells: Vec<String> = row.iter().map(format_rational).collect();
                line(format!("    [{}]", cells.join(", ")));
            }
        }
    }
    line(format!("states: {} (initial {})", spec.states.len(), spec.initial));
    for (i, st) in spec.states.iter().enumerate() {
        let role = match &st.role {
            StateRole::Normal => "normal".to_string(),
            StateRole::Communicating { writes, on_reply } => {
                format!("query {:?} -> {:?}", spec.comm_alphabet.get(*writes as usize), on_reply)
            }
            StateRole::Accept => "accept".into(),
            StateRole::Reject => "reject".into(),
            StateRole::Restart => "restart".into(),
        };
        line(format!("  {i} {}: {role}", st.name));
    }
    let transitions: usize = spec.transitions.iter().flatten().filter(|t| t.is_some()).count();
    line(format!("transitions: {transitions}"));
    s
}

fn inspect(args: InspectArgs) -> Result<ExitCode> {
    let spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            VerifierSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => bundle_from(&args.protocol)?.verifier,
    };
    let mut text = describe(&spec);
    let problems = validate(&spec);
    if problems.is_empty() {
        text.push_str("validation: ok\n");
    } else {
        text.push_str(&format!("validation: {} problem(s)\n", problems.len()));
        for p in &problems {
            text.push_str(&format!("  {p}\n"));
        }
    }
    emit(args.protocol.out.as_deref(), "inspect.txt", &text)?;
    Ok(if problems.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn catalog() -> Result<ExitCode> {
    let mut s = String::from("protocols:\n");
    for (name, about) in PROTOCOLS {
        s.push_str(&format!("  {name:<12} {about}\n"));
    }
    s.push_str("machines:\n");
    for (name, m) in sample_machines() {
        s.push_str(&format!(
            "  {name:<16} {:?}, {} states, {} rules, input {}\n",
            m.flavor,
            m.states.len(),
            m.rules.len(),
            m.input_alphabet.iter().collect::<String>()
        ));
    }
    emit(None, "", &s)?;
    Ok(ExitCode::SUCCESS)
}

fn trace_cmd(args: TraceArgs) -> Result<ExitCode> {
    let mut cfg = experiment(&args.protocol, None)?;
    apply_engine(&mut cfg, &args.engine);
    cfg.validate()?;
    let bundle = build_bundle(&cfg)?;
    let tape = bundle.tape(&args.input)?;
    let prover = bundle.honest_prover(&args.input)?;
    let engine = EngineConfig {
        horizon: cfg.horizon,
        node_cap: cfg.node_cap,
    };
    let t = trace(&bundle.verifier, &tape, &prover, cfg.seed, &engine)?;
    emit(args.protocol.out.as_deref(), "trace.json", &(serde_json::to_string_pretty(&t)? + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn export(args: ProtocolArgs) -> Result<ExitCode> {
    let bundle = bundle_from(&args)?;
    let file = format!("{}.json", bundle.name.replace([':', '/'], "-"));
    emit(args.out.as_deref(), &file, &(bundle.verifier.to_json() + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Inspect(a) => inspect(a),
        Command::Catalog => catalog(),
        Command::Trace(a) => trace_cmd(a),
        Command::Export(a) => export(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}

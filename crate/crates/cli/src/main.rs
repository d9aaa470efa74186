//! `diraclap` batch front-end.
//!
//! Exit codes: 0 success, 1 invalid input (nothing written), 2 numerical
//! non-convergence (artifacts written and flagged).

mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use diraclap::grid::GridSpec;
use diraclap::lap::Sign;
use diraclap::power::NormMethod;
use serde::Serialize;
use serde_json::{json, Value};

use config::{RunConfig, StateKind};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "DIRACLAP_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] diraclap::Error),
    #[error("writing artifacts: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn is_numerical(&self) -> bool {
        use diraclap::Error as E;
        matches!(
            self,
            CliError::Core(
                E::NotConverged { .. } | E::SmallnessViolated(_) | E::NeumannDivergence { .. } | E::BoxExit(_)
            )
        )
    }
}

#[derive(Debug, Parser)]
#[command(name = "diraclap", version, about = "Resolvent, commutator and scattering checks for lattice Dirac operators")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Global {
    /// Flat JSON config; a previous run.json is accepted.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Output directory (default: $DIRACLAP_OUT, else the current directory).
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Lattice as `n,M,L`.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<GridSpec>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Norm-estimate tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true, value_parser = parse_method)]
    method: Option<NormMethod>,
    /// Worker threads; 1 gives the reference deterministic mode.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and verify Clifford generators.
    Clifford(CliffordArgs),
    /// Weighted and unweighted resolvent norms over a (λ, μ) table.
    LapScan(LapScanArgs),
    /// Kato-ratio family, dilation check and optional smoothness integral.
    Kato(KatoArgs),
    /// Commutator identities, resolvent bounds and the ε-derivative.
    #[command(alias = "check")]
    CommutatorCheck(CommutatorArgs),
    /// Norms of the regularized commutators X_m of a first-order operator.
    Section2Check(Section2Args),
    /// Nonlinear Gronwall bound on synthetic instances.
    Gronwall(GronwallArgs),
    /// Smallness, resolvent sandwich and wave operators for a potential.
    Scatter(ScatterArgs),
    /// Norm of an operator product such as `W(-1)*G(l,mu)*W(-1)`.
    OpNorm(OpNormArgs),
}

#[derive(Debug, Args, Serialize)]
struct CliffordArgs {
    /// Dimension; all of 1..=8 when omitted.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct LapScanArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambdas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    mus: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_sign)]
    sign: Option<Sign>,
    /// Exponent s of the weight ⟨Q⟩^s.
    #[arg(long, allow_hyphen_values = true)]
    weight: Option<f64>,
    /// Allow μ below the grid floor.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    force: bool,
}

#[derive(Debug, Args, Serialize)]
struct KatoArgs {
    #[arg(long)]
    members: Option<usize>,
    #[arg(long)]
    dilation: Option<f64>,
    /// Imaginary parts for the smoothness integral (skipped when omitted).
    #[arg(long, value_delimiter = ',')]
    mus: Option<Vec<f64>>,
    #[arg(long)]
    lambda_step: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct CommutatorArgs {
    #[arg(long, value_enum)]
    state: Option<StateKind>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    momentum: Option<Vec<f64>>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    pmin: Option<f64>,
    #[arg(long)]
    pmax: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    fd_step: Option<f64>,
    /// Number of L-doublings in the refinement series.
    #[arg(long)]
    refine: Option<usize>,
    /// Pass threshold for relative residuals.
    #[arg(long)]
    check_tol: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambdas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    mus: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
struct Section2Args {
    #[arg(long = "m", value_delimiter = ',')]
    m_list: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
struct GronwallArgs {
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    points: Option<usize>,
    /// Quadrature tolerance for the pointwise comparison.
    #[arg(long)]
    check_tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct ScatterArgs {
    /// Potential JSON `{kind, c, ...}`.
    #[arg(long)]
    pot: Option<PathBuf>,
    #[arg(long = "T", value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(rename = "T")]
    times: Option<Vec<f64>>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambdas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    mus: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
struct OpNormArgs {
    /// Product of factors, applied right to left.
    #[arg(long)]
    expr: Option<String>,
    /// Variable bindings `name=value`.
    #[arg(long = "var", value_parser = parse_var)]
    #[serde(skip)]
    var: Vec<(String, f64)>,
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err("expected n,M,L".into());
    }
    let n = parts[0].parse().map_err(|e| format!("n: {e}"))?;
    let m = parts[1].parse().map_err(|e| format!("M: {e}"))?;
    let l = parts[2].parse().map_err(|e| format!("L: {e}"))?;
    GridSpec::new(n, m, l).map_err(|e| e.to_string())
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "plus" | "+" => Ok(Sign::Plus),
        "minus" | "-" => Ok(Sign::Minus),
        _ => Err(format!("sign must be plus or minus, got {s}")),
    }
}

fn parse_method(s: &str) -> Result<NormMethod, String> {
    match s {
        "power" => Ok(NormMethod::Power),
        "lanczos" => Ok(NormMethod::Lanczos),
        _ => Err(format!("method must be power or lanczos, got {s}")),
    }
}

fn parse_var(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    Ok((k.trim().to_string(), v.trim().parse().map_err(|e| format!("{k}: {e}"))?))
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Clifford(_) => "clifford",
            Command::LapScan(_) => "lap-scan",
            Command::Kato(_) => "kato",
            Command::CommutatorCheck(_) => "commutator-check",
            Command::Section2Check(_) => "section2-check",
            Command::Gronwall(_) => "gronwall",
            Command::Scatter(_) => "scatter",
            Command::OpNorm(_) => "op-norm",
        }
    }

    fn overrides(&self) -> Value {
        let v = match self {
            Command::Clifford(a) => serde_json::to_value(a),
            Command::LapScan(a) => serde_json::to_value(a),
            Command::Kato(a) => serde_json::to_value(a),
            Command::CommutatorCheck(a) => serde_json::to_value(a),
            Command::Section2Check(a) => serde_json::to_value(a),
            Command::Gronwall(a) => serde_json::to_value(a),
            Command::Scatter(a) => serde_json::to_value(a),
            Command::OpNorm(a) => {
                let mut v = serde_json::to_value(a);
                if let (Ok(Value::Object(m)), false) = (&mut v, a.var.is_empty()) {
                    let vars: BTreeMap<String, f64> = a.var.iter().cloned().collect();
                    m.insert("vars".into(), json!(vars));
                }
                v
            }
        };
        v.expect("argument structs serialize")
    }
}

/// One file to write under the output directory.
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// What a subcommand produced.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// False when some iteration did not converge or a result is flagged invalid.
    pub converged: bool,
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let base = match &cli.global.config {
        Some(p) => config::read_file(p)?,
        None => Default::default(),
    };
    let mut overrides = serde_json::to_value(&cli.global).expect("flags serialize");
    if let (Value::Object(o), Value::Object(sub)) = (&mut overrides, cli.command.overrides()) {
        o.extend(sub);
        o.insert("subcommand".into(), json!(cli.command.name()));
    }
    merge_checked(base, overrides)
}

fn merge_checked(base: serde_json::Map<String, Value>, overrides: Value) -> Result<RunConfig, CliError> {
    let cfg = config::merge(base, overrides)?;
    if let Some(0) = cfg.threads {
        return Err(CliError::Invalid("threads must be at least 1".into()));
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.global
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_all(dir: &Path, outcome: &Outcome, run: &Value) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for a in &outcome.artifacts {
        std::fs::write(dir.join(&a.name), &a.contents)?;
    }
    std::fs::write(dir.join("run.json"), serde_json::to_string_pretty(run).expect("json") + "\n")?;
    Ok(())
}

fn run_record(cfg: &RunConfig, status: &str, error: Option<String>, artifacts: &[String]) -> Value {
    json!({
        "version": diraclap::VERSION,
        "status": status,
        "error": error,
        "artifacts": artifacts,
        "config": cfg,
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(t) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let dir = out_dir(&cli);
    match commands::run(&mut cfg) {
        Ok(outcome) => {
            let names: Vec<String> = outcome.artifacts.iter().map(|a| a.name.clone()).collect();
            let status = if outcome.converged { "ok" } else { "not_converged" };
            let run = run_record(&cfg, status, None, &names);
            if let Err(e) = write_all(&dir, &outcome, &run) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            for n in &names {
                println!("{}", dir.join(n).display());
            }
            if outcome.converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("warning: some iterations did not converge; artifacts are flagged");
                ExitCode::from(2)
            }
        }
        Err(e) if e.is_numerical() => {
            eprintln!("error: {e}");
            let run = run_record(&cfg, "not_converged", Some(e.to_string()), &[]);
            let empty = Outcome {
                artifacts: Vec::new(),
                converged: false,
            };
            let _ = write_all(&dir, &empty, &run);
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

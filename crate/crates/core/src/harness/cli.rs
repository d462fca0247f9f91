//! `ptycho` subcommands: `synth`, `run`, `verify`, `report`, `experiment`.
//!
//! Exit status: 0 on success, 1 when a check or a solver run fails, 2 on
//! usage errors (bad flags, malformed config or problem files).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::{initial_iterate, run_experiment, summarize, summary_table, ExperimentConfig, HarnessError, ProblemConfig, Summary};
use crate::math::ShiftMode;
use crate::model::{NoiseModel, ProblemInstance};
use crate::solvers::{run, Algorithm, IndexSchedule, SgdStepRule, SolverConfig};
use crate::verify::{run_suite, Suite};

#[derive(Debug, Parser)]
#[command(name = "ptycho", version, about = "Blind ptychography solvers and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a problem and write it as JSON.
    Synth(SynthArgs),
    /// Run one solver on a problem file.
    Run(RunArgs),
    /// Run checker suites and write their reports as JSON.
    Verify(VerifyArgs),
    /// Collect run summaries into one CSV table.
    Report(ReportArgs),
    /// Run a solver matrix described by a config file.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
struct ProblemFlags {
    #[arg(long, default_value_t = 8)]
    d: usize,
    /// `all` or a comma-separated list of offsets.
    #[arg(long, default_value = "all", allow_hyphen_values = true)]
    shifts: String,
    #[arg(long, default_value = "circular")]
    mode: ShiftMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `none`, `poisson` or `gaussian:<sigma>`.
    #[arg(long, default_value = "none")]
    noise: NoiseModel,
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    #[arg(long = "alpha-t", default_value_t = 1e-3)]
    alpha_t: f64,
    #[arg(long = "beta-t", default_value_t = 1e-3)]
    beta_t: f64,
    /// Comma-separated sampling probabilities; uniform when absent.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    k: usize,
}

impl ProblemFlags {
    fn to_config(&self) -> Result<ProblemConfig, HarnessError> {
        let offsets = match self.shifts.trim() {
            "all" => None,
            list => Some(
                list.split(',')
                    .map(|s| s.trim().parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| HarnessError::field("shifts", e.to_string()))?,
            ),
        };
        Ok(ProblemConfig {
            d: self.d,
            offsets,
            mode: self.mode,
            seed: self.seed,
            noise: self.noise.clone(),
            epsilon: self.epsilon,
            alpha_t: self.alpha_t,
            beta_t: self.beta_t,
            p: self.p.clone(),
            k: self.k,
        })
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    problem: ProblemFlags,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Solver config JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long = "epie-alpha")]
    epie_alpha: Option<f64>,
    #[arg(long = "epie-beta")]
    epie_beta: Option<f64>,
    #[arg(long = "grad-tol")]
    grad_tol: Option<f64>,
    #[arg(long = "gamma-grid")]
    gamma_grid: Option<usize>,
    #[arg(long = "step-factor")]
    step_factor: Option<f64>,
    /// `theorem` or `epie-mapped`.
    #[arg(long = "sgd-steps", value_parser = parse_step_rule)]
    sgd_steps: Option<SgdStepRule>,
    /// `iid` or `shuffled-loop`.
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<IndexSchedule>,
    /// Trace CSV path.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Summary JSON path; stdout when absent.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn parse_step_rule(s: &str) -> Result<SgdStepRule, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("`{s}` is not theorem | epie-mapped"))
}

fn parse_schedule(s: &str) -> Result<IndexSchedule, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("`{s}` is not iid | shuffled-loop"))
}

impl RunArgs {
    fn solver_config(&self) -> Result<SolverConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(path) => crate::json::from_str(&read(path)?)?,
            None => SolverConfig::default(),
        };
        macro_rules! apply {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(value) = self.$flag { cfg.$field = value; })*
            };
        }
        apply!(
            algo => algorithm, iters => max_iters, seed => seed, theta => theta, kappa => kappa,
            mu => mu, nu => nu, epie_alpha => epie_alpha, epie_beta => epie_beta, grad_tol => grad_tol,
            gamma_grid => gamma_grid, step_factor => gd_step_factor, sgd_steps => sgd_steps, schedule => schedule,
        );
        cfg.validate()
            .map_err(|e| HarnessError::field(solver_field(&e), e.to_string()))?;
        Ok(cfg)
    }
}

fn solver_field(err: &crate::solvers::SolverError) -> String {
    match err {
        crate::solvers::SolverError::InvalidConfig { field, .. } => (*field).to_string(),
        _ => "config".into(),
    }
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: Suite,
    /// Problem file; a synthesized instance from the flags below otherwise.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[command(flatten)]
    synth: ProblemFlags,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Seed of the checkers' sample streams.
    #[arg(long = "check-seed", default_value_t = 0)]
    check_seed: u64,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Summary files, or directories searched for `*.summary.json`.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Table path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Check(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Solver(_) => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match path {
        Some(path) => std::fs::write(path, text).map_err(|e| HarnessError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the
/// exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Run(a) => run_one(a),
        Command::Verify(a) => verify(a),
        Command::Report(a) => report(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let problem = args.problem.to_config()?.synthesize()?;
    emit(args.out.as_deref(), &problem.to_json())?;
    Ok(())
}

fn run_one(args: RunArgs) -> Result<(), Failure> {
    let problem = ProblemInstance::load(&args.problem).map_err(HarnessError::from)?;
    let cfg = args.solver_config()?;
    let start = initial_iterate(problem.dim(), cfg.seed);
    let out = run(&problem, start, &cfg).map_err(HarnessError::from)?;
    if let Some(path) = &args.trace {
        emit(Some(path), &out.trace.to_csv())?;
    }
    let summary = summarize(&problem, &cfg, &out)?;
    emit(args.summary.as_deref(), &summary.to_json())?;
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let problem = match &args.problem {
        Some(path) => ProblemInstance::load(path).map_err(HarnessError::from)?,
        None => args.synth.to_config()?.synthesize()?,
    };
    let reports = run_suite(args.suite, &problem, args.check_seed, args.samples);
    emit(args.out.as_deref(), &crate::json::to_string(&reports).expect("reports serialize"))?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed checks: {}", failed.join(", "))))
    }
}

fn report(args: ReportArgs) -> Result<(), Failure> {
    let mut files = Vec::new();
    for input in &args.inputs {
        if input.is_dir() {
            let entries = std::fs::read_dir(input).map_err(|e| HarnessError::io(input, e))?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.to_string_lossy().ends_with(".summary.json"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    let mut rows = Vec::with_capacity(files.len());
    for path in files {
        let summary = Summary::from_json(&read(&path)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().trim_end_matches(".summary.json").to_string())
            .unwrap_or_default();
        rows.push((name, summary));
    }
    emit(args.out.as_deref(), &summary_table(&rows))?;
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let cfg = ExperimentConfig::from_json(&read(&args.config)?)?;
    let rows = run_experiment(&cfg)?;
    eprintln!("{} runs written to {}", rows.len(), cfg.output_dir.display());
    Ok(())
}

//! Argument parsing and subcommand drivers for `scl-mon`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use scl_core::{monitor, parse_formula_file, rho_trace, Formula, PiecewiseConstantSignal};

use crate::config::{EvaluatorArg, Mode, OutputFormat, RunConfig};
use crate::experiments::{falsify, noise_agreement, FalsifyConfig, NoiseConfig};
use crate::generate::{GlucoseLike, SineQuantized, StepTrain};
use crate::output::{write_result, FormulaResult};
use crate::trace_io::{read_trace, trace_to_string, write_atomic};

/// Exit code when every formula holds at `t = 0`.
pub const EXIT_SATISFIED: i32 = 0;
/// Exit code when some formula is violated at `t = 0`.
pub const EXIT_VIOLATED: i32 = 1;
/// Exit code on any error.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "scl-mon", version, about = "Signal Convolution Logic monitor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Boolean verdicts (and optionally robustness) of every formula in a file.
    Check(CheckArgs),
    /// Robustness traces of every formula in a file.
    Rho(RhoArgs),
    /// Writes a synthetic trace.
    Gen(GenArgs),
    #[command(subcommand)]
    Exp(ExpCommand),
}

#[derive(Debug, Args)]
pub struct Inputs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub spec: PathBuf,
    /// Directory for per-formula output files; without it only the summary is printed.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub oracle_grid: Option<f64>,
    #[arg(long, value_enum, default_value_t = EvaluatorArg::Efficient)]
    pub evaluator: EvaluatorArg,
    #[arg(long, value_enum, default_value_t = Mode::Boolean)]
    pub mode: Mode,
    #[arg(long = "r-tol", default_value_t = 1e-6)]
    pub r_tolerance: f64,
    #[arg(long)]
    pub time_grid: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RhoArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long = "r-tol", default_value_t = 1e-6)]
    pub r_tolerance: f64,
    #[arg(long)]
    pub time_grid: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceKind {
    StepTrain,
    SineQuantized,
    GlucoseLike,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: TraceKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Variable name; defaults to `G` for glucose-like traces and `v` otherwise.
    #[arg(long)]
    pub var: Option<String>,
    #[arg(long, default_value_t = 24.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 2.0)]
    pub period: f64,
    #[arg(long, default_value_t = 0.5)]
    pub duty: f64,
    #[arg(long, default_value_t = 0.0)]
    pub low: f64,
    #[arg(long, default_value_t = 1.0)]
    pub high: f64,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,
    #[arg(long, default_value_t = 0.1)]
    pub quantum: f64,
    #[arg(long, default_value_t = 1.0 / 12.0)]
    pub dt: f64,
}

#[derive(Debug, Subcommand)]
pub enum ExpCommand {
    /// Agreement of `F` and SCL verdicts on noisy traces with the noise-free `F` verdict.
    NoiseAgreement(NoiseArgs),
    /// Random-sampling search for the least robust glucose-like trace.
    Falsify(FalsifyArgs),
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5.0)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 15.0)]
    pub band: f64,
    /// Report file (JSON); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FalsifyArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 24.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_std: f64,
    #[arg(long = "r-tol", default_value_t = 1e-6)]
    pub r_tolerance: f64,
    /// Directory for `report.json` and `witness.csv`; the report goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Check(a) => {
            let cfg = RunConfig {
                delta: a.delta,
                oracle_grid: a.oracle_grid,
                r_tolerance: a.r_tolerance,
                time_grid: a.time_grid,
                mode: a.mode,
                evaluator: a.evaluator,
                format: a.inputs.format,
                ..RunConfig::default()
            };
            run_monitor(&a.inputs, &cfg)
        }
        Command::Rho(a) => {
            let cfg = RunConfig {
                delta: a.delta,
                r_tolerance: a.r_tolerance,
                time_grid: a.time_grid,
                mode: Mode::Robustness,
                format: a.inputs.format,
                ..RunConfig::default()
            };
            run_monitor(&a.inputs, &cfg)
        }
        Command::Gen(a) => {
            let trace = generate(&a)?;
            let text = trace_to_string(&trace);
            emit(a.out.as_deref(), text.as_bytes())?;
            Ok(EXIT_SATISFIED)
        }
        Command::Exp(ExpCommand::NoiseAgreement(a)) => {
            let report = noise_agreement(&NoiseConfig {
                n: a.n,
                seed: a.seed,
                noise_std: a.noise_std,
                band: a.band,
                ..NoiseConfig::default()
            })?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            emit(a.out.as_deref(), text.as_bytes())?;
            Ok(EXIT_SATISFIED)
        }
        Command::Exp(ExpCommand::Falsify(a)) => {
            let formulas: Vec<Formula> = read_formulas(&a.spec)?.into_iter().map(|(_, f)| f).collect();
            let cfg = RunConfig {
                r_tolerance: a.r_tolerance,
                ..RunConfig::default()
            };
            cfg.validate()?;
            let report = falsify(
                &formulas,
                &FalsifyConfig {
                    budget: a.budget,
                    seed: a.seed,
                    duration: a.duration,
                    noise_std: a.noise_std,
                },
                &cfg.robustness(),
            )?;
            let mut text = serde_json::to_string_pretty(&report.to_json())?;
            text.push('\n');
            match &a.out {
                Some(dir) => {
                    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                    write_atomic(&dir.join("report.json"), text.as_bytes())?;
                    write_atomic(&dir.join("witness.csv"), trace_to_string(&report.witness).as_bytes())?;
                }
                None => emit(None, text.as_bytes())?,
            }
            Ok(EXIT_SATISFIED)
        }
    }
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn read_formulas(path: &Path) -> anyhow::Result<Vec<(usize, Formula)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let formulas = parse_formula_file(&text).with_context(|| format!("parse error in {}", path.display()))?;
    if formulas.is_empty() {
        bail!("{} contains no formulas", path.display());
    }
    Ok(formulas)
}

fn evaluate(s: &PiecewiseConstantSignal, line: usize, formula: Formula, cfg: &RunConfig) -> scl_core::Result<FormulaResult> {
    let verdict = monitor(s, &formula, &cfg.monitor())?;
    let satisfied = verdict.satisfied();
    let robustness = match cfg.mode {
        Mode::Boolean => None,
        Mode::Robustness | Mode::Both => Some(rho_trace(s, &formula, &cfg.robustness())?),
    };
    Ok(FormulaResult {
        line,
        formula,
        satisfied,
        verdict: (cfg.mode != Mode::Robustness).then_some(verdict),
        robustness,
    })
}

/// Monitors every formula of the formula file on the trace, writes the
/// per-formula files and prints one summary line per formula in file order.
pub fn run_monitor(inputs: &Inputs, cfg: &RunConfig) -> anyhow::Result<i32> {
    cfg.validate()?;
    let trace = read_trace(&inputs.trace).with_context(|| format!("reading trace {}", inputs.trace.display()))?;
    let formulas = read_formulas(&inputs.spec)?;
    if let Some(dir) = &inputs.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let spec = inputs.spec.display().to_string();
    let results = formulas
        .into_par_iter()
        .map(|(line, f)| -> anyhow::Result<FormulaResult> {
            let text = f.to_string();
            let res = evaluate(&trace, line, f, cfg).with_context(|| format!("{spec}:{line}: formula `{text}`"))?;
            if let Some(dir) = &inputs.out {
                write_result(dir, &res, cfg.format).with_context(|| format!("writing results for {spec}:{line}"))?;
            }
            Ok(res)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut out = std::io::stdout().lock();
    for r in &results {
        let status = if r.satisfied { "satisfied" } else { "violated" };
        match r.robustness.as_ref().and_then(|t| t.values.first()) {
            Some(rho) => writeln!(out, "{spec}:{}: {status} rho(0) = {rho}: {}", r.line, r.formula)?,
            None => writeln!(out, "{spec}:{}: {status}: {}", r.line, r.formula)?,
        }
    }
    Ok(if results.iter().all(|r| r.satisfied) {
        EXIT_SATISFIED
    } else {
        EXIT_VIOLATED
    })
}

fn generate(a: &GenArgs) -> anyhow::Result<PiecewiseConstantSignal> {
    let trace = match a.kind {
        TraceKind::StepTrain => StepTrain {
            period: a.period,
            duty: a.duty,
            low: a.low,
            high: a.high,
            duration: a.duration,
        }
        .generate(a.var.as_deref().unwrap_or("v"))?,
        TraceKind::SineQuantized => SineQuantized {
            period: a.period,
            amplitude: a.amplitude,
            offset: a.offset,
            quantum: a.quantum,
            dt: a.dt,
            duration: a.duration,
        }
        .generate(a.var.as_deref().unwrap_or("v"))?,
        TraceKind::GlucoseLike => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut day = GlucoseLike::random(&mut rng, a.duration, a.noise_std);
            day.dt = a.dt;
            day.generate(a.var.as_deref().unwrap_or("G"), &mut rng)?
        }
    };
    Ok(trace)
}

//! Command-line front end: scenario files in, CSV tables and JSON reports out.
//!
//! Exit codes: 0 on success, 1 when a numerical invariant or the core fails,
//! 2 when the scenario or the flags do not fit the schema.

pub mod error;
pub mod pipeline;
pub mod report;
pub mod scenario;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use excite_core::exec::with_thread_cap;
use excite_core::random::generate_system;
use excite_core::Exec;
use serde::Serialize;

pub use error::CliError;
use report::Emitter;
use scenario::{ExplicitSystem, Output, Scenario, SystemConfig, TimeGrid};

/// Caps the worker threads used with `--parallel`.
pub const THREADS_ENV: &str = "EXCITE_PREP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "excite-prep", version, about = "Excitation-mediated state preparation: dynamics, block-encoding checks and cost estimates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every output listed in the scenario.
    Run(RunArgs),
    /// Exact evolution: evolve.csv
    Evolve(RunArgs),
    /// Truncated perturbation series: perturb.csv
    Perturb(RunArgs),
    /// Exact vs each truncation order: probabilities.csv
    Compare(RunArgs),
    /// Protocol parameters: plan.json
    Plan(RunArgs),
    /// Matrix-level block-encoding check: block_encoding.json
    BlockEncodeCheck(RunArgs),
    /// Both route costs: cost.json, cost.csv
    Cost(RunArgs),
    /// Route comparison and breakeven: routes.json
    CompareRoutes(RunArgs),
    /// Generate a random system and write it as a scenario `system` block.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the generator seed and the block-encoding seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub no_timestamp: bool,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub tsteps: Option<usize>,
    /// Evaluate time grids in parallel.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub gap_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    pub coupling_scale: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub no_timestamp: bool,
}

fn apply_overrides(scenario: &mut Scenario, args: &RunArgs) -> Result<(), CliError> {
    if let Some(seed) = args.seed {
        if let Some(SystemConfig::Generate(g)) = &mut scenario.system {
            g.seed = seed;
        }
        if let Some(b) = &mut scenario.block_encoding {
            b.seed = seed;
        }
    }
    if args.order.is_some() || args.tmax.is_some() || args.tsteps.is_some() {
        let p = scenario
            .perturbation
            .as_mut()
            .ok_or_else(|| CliError::Schema("at `perturbation`: --order/--tmax/--tsteps need a perturbation block".into()))?;
        if let Some(order) = args.order {
            p.order = order;
        }
        if args.tmax.is_some() || args.tsteps.is_some() {
            let (t0, s0) = match &p.t_grid {
                TimeGrid::Uniform { t_max, steps } => (*t_max, *steps),
                TimeGrid::Explicit { times } => (*times.last().unwrap_or(&0.0), times.len()),
            };
            p.t_grid = TimeGrid::Uniform { t_max: args.tmax.unwrap_or(t0), steps: args.tsteps.unwrap_or(s0) };
        }
    }
    scenario.validate()
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Schema(format!("at `{THREADS_ENV}`: expected a positive integer, got {v:?}"))),
        },
    }
}

fn run_outputs(args: &RunArgs, only: Option<Output>) -> Result<Vec<PathBuf>, CliError> {
    let mut scenario = scenario::load(&args.scenario)?;
    if let Some(o) = only {
        scenario.outputs = vec![o];
    }
    apply_overrides(&mut scenario, args)?;
    let exec = if args.parallel { Exec::Parallel } else { Exec::Sequential };
    let threads = thread_cap()?;
    let mut emit = Emitter::new(&args.out, !args.no_timestamp)?;
    let outputs = scenario.outputs.clone();
    with_thread_cap(threads, || pipeline::run(&scenario, &outputs, exec, &mut emit))?;
    Ok(emit.written().to_vec())
}

#[derive(Serialize)]
struct GeneratedSystem<'a> {
    generator: &'a scenario::GeneratorConfig,
    system: SystemConfig,
}

fn gen(args: &GenArgs) -> Result<Vec<PathBuf>, CliError> {
    let cfg = scenario::GeneratorConfig {
        n: args.n,
        seed: args.seed,
        gap_scale: args.gap_scale,
        coupling_scale: args.coupling_scale,
    };
    let sys = generate_system(cfg.n, cfg.seed, cfg.gap_scale, cfg.coupling_scale)
        .map_err(|e| CliError::Schema(format!("at `--n/--gap-scale/--coupling-scale`: {e}")))?;
    let data = GeneratedSystem { generator: &cfg, system: SystemConfig::Explicit(ExplicitSystem::from_system(&sys)) };
    let mut emit = Emitter::new(&args.out, !args.no_timestamp)?;
    emit.json("system.json", "system", &data)?;
    Ok(emit.written().to_vec())
}

pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    match &cli.command {
        Command::Run(a) => run_outputs(a, None),
        Command::Evolve(a) => run_outputs(a, Some(Output::Evolve)),
        Command::Perturb(a) => run_outputs(a, Some(Output::Perturb)),
        Command::Compare(a) => run_outputs(a, Some(Output::Compare)),
        Command::Plan(a) => run_outputs(a, Some(Output::Plan)),
        Command::BlockEncodeCheck(a) => run_outputs(a, Some(Output::BlockEncodeCheck)),
        Command::Cost(a) => run_outputs(a, Some(Output::Cost)),
        Command::CompareRoutes(a) => run_outputs(a, Some(Output::CompareRoutes)),
        Command::Gen(a) => gen(a),
    }
}

/// Parses `args`, runs, prints written files or the error, and returns the
/// exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

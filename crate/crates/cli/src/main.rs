//! `lastiter` command-line front end.
//!
//! Exit codes: 0 success, 1 config error, 2 verification failure, 3 solver
//! failure.

mod commands;
mod config;
mod instances;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Config, ConfigError};

/// Caps the worker pool used by sweeps and multi-seed runs.
pub const WORKERS_ENV: &str = "LASTITER_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "lastiter", version, about = "Last-iterate experiments for extragradient-type methods")]
struct Cli {
    /// TOML config file with one table per command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for sweeps and seeded runs.
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a method on seeded instances; write trajectory and metric CSVs.
    Simulate(InstanceArgs),
    /// Check potential decrease and the per-step inequalities on seeded instances.
    PotentialCheck(InstanceArgs),
    /// Solve a grid of performance-estimation problems into one CSV.
    PepSweep(SweepArgs),
    /// Verify the potential-decrease certificates in exact arithmetic.
    Certify(CertifyArgs),
    /// Solve one PEP and realize its worst case as explicit vectors.
    Reconstruct(PepArgs),
    /// Write one PEP in SDPA sparse format.
    ExportSdpa(PepArgs),
    /// Anchored vs. unanchored methods on the deep linear toy problem.
    EagDemo(EagArgs),
    /// Print every config default as TOML.
    Defaults,
}

#[derive(Args, Debug, Default)]
struct InstanceArgs {
    #[arg(long)]
    operator: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long)]
    skew: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    init_scale: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Skip the per-instance CSVs and write only the summary.
    #[arg(long)]
    summary_only: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    distances: Option<Vec<usize>>,
    #[arg(long)]
    class: Option<String>,
    #[arg(long, value_delimiter = ',')]
    objectives: Option<Vec<String>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Skip dual certification of each value.
    #[arg(long)]
    no_certify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// Replace the Lemma 1 weights, e.g. `2,31/10`, to see a rejection.
    #[arg(long)]
    lemma1_weights: Option<String>,
}

#[derive(Args, Debug)]
struct PepArgs {
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    distance: Option<usize>,
    #[arg(long)]
    class: Option<String>,
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EagArgs {
    #[arg(long, allow_negative_numbers = true)]
    init_offset: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Verification(String),
    Solver(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("output: {e}"))
    }
}

macro_rules! set {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

fn merge_instance(cfg: &mut config::InstanceConfig, a: InstanceArgs) {
    set!(cfg.operator, a.operator);
    set!(cfg.method, a.method);
    set!(cfg.dim, a.dim);
    set!(cfg.lipschitz, a.lipschitz);
    set!(cfg.skew, a.skew);
    set!(cfg.gamma, a.gamma);
    set!(cfg.iterations, a.iterations);
    set!(cfg.seed, a.seed);
    set!(cfg.seeds, a.seeds);
    set!(cfg.set, a.set);
    set!(cfg.radius, a.radius);
    set!(cfg.init_scale, a.init_scale);
    set!(cfg.out_dir, a.out_dir);
    if a.summary_only {
        cfg.per_instance = false;
    }
}

fn merge_pep(cfg: &mut config::PepConfig, a: PepArgs) {
    set!(cfg.method, a.method);
    set!(cfg.gamma, a.gamma);
    set!(cfg.lipschitz, a.lipschitz);
    set!(cfg.n, a.n);
    set!(cfg.distance, a.distance);
    set!(cfg.class, a.class);
    set!(cfg.objective, a.objective);
    set!(cfg.tol, a.tol);
    set!(cfg.max_iter, a.max_iter);
    set!(cfg.out, a.out);
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let n = match workers {
        Some(0) => return Err(CliError::Config(format!("{WORKERS_ENV}/--workers must be at least 1"))),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(a) => {
            merge_instance(&mut cfg.simulate, a);
            commands::simulate(&cfg.simulate, &pool(cli.workers)?)
        }
        Command::PotentialCheck(a) => {
            merge_instance(&mut cfg.potential_check, a);
            commands::potential_check(&cfg.potential_check, &pool(cli.workers)?)
        }
        Command::PepSweep(a) => {
            let s = &mut cfg.pep_sweep;
            set!(s.methods, a.methods);
            set!(s.gammas, a.gammas);
            set!(s.lipschitz, a.lipschitz);
            set!(s.ns, a.ns);
            set!(s.distances, a.distances);
            set!(s.class, a.class);
            set!(s.objectives, a.objectives);
            set!(s.tol, a.tol);
            set!(s.max_iter, a.max_iter);
            set!(s.out, a.out);
            if a.no_certify {
                s.certify = false;
            }
            commands::pep_sweep(s, &pool(cli.workers)?)
        }
        Command::Certify(a) => commands::certify(a.lemma1_weights.as_deref()),
        Command::Reconstruct(a) => {
            merge_pep(&mut cfg.reconstruct, a);
            commands::reconstruct(&cfg.reconstruct)
        }
        Command::ExportSdpa(a) => {
            merge_pep(&mut cfg.export_sdpa, a);
            commands::export_sdpa(&cfg.export_sdpa)
        }
        Command::EagDemo(a) => {
            let e = &mut cfg.eag_demo;
            set!(e.init_offset, a.init_offset);
            set!(e.gamma, a.gamma);
            set!(e.iterations, a.iterations);
            set!(e.out, a.out);
            commands::eag_demo(e)
        }
        Command::Defaults => {
            print!("{}", Config::defaults_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, msg) = match &e {
                CliError::Config(m) => ("config error", m),
                CliError::Verification(m) => ("verification failed", m),
                CliError::Solver(m) => ("solver failure", m),
            };
            eprintln!("lastiter: {kind}: {msg}");
            ExitCode::from(e.code())
        }
    }
}

//! Command-line front end: raw simulation, sweeps, closed-form tables and
//! the oracle suite, all writing CSV.
//!
//! Exit status: 0 on success, 1 when verification fails (or a run aborts),
//! 2 on configuration errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pcaska::channel::SystemConfig;
use pcaska::harness::{
    emit_analytics, map_trials, parse_analytic_file, parse_verify_file, raw_table, run_sweep,
    run_trial_with, verify_oracles, SimulateSpec, SweepSpec, Table, VerifyOptions,
};
use pcaska::Error;

#[derive(Parser)]
#[command(
    name = "pcaska",
    version,
    about = "Secret key agreement under pilot contamination: simulation and analytics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte-Carlo trials at one configuration; one CSV row per trial and user.
    Simulate(Common),
    /// Sweep one parameter; one CSV row per axis value.
    Sweep(Common),
    /// Closed-form curves over a grid; no sampling.
    Analytic(Common),
    /// Check closed forms against brute-force and Monte-Carlo oracles.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Verification,
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn read_config(path: Option<&Path>, required: bool) -> Result<String, Failure> {
    match path {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display()))),
        None if required => Err(Failure::Config("--config is required".into())),
        None => Ok(String::new()),
    }
}

fn check_trials(t: Option<u64>) -> Result<Option<u64>, Failure> {
    match t {
        Some(0) => Err(Failure::Config("--trials must be at least 1".into())),
        other => Ok(other),
    }
}

fn write_table(table: &Table, out: Option<&Path>) -> Result<(), Failure> {
    let io_err = |e: Error| Failure::Runtime(e.to_string());
    match out {
        Some(p) => {
            let file = fs::File::create(p)
                .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", p.display())))?;
            let mut w = io::BufWriter::new(file);
            table.write_to(&mut w).map_err(io_err)?;
            w.flush().map_err(|e| Failure::Runtime(e.to_string()))
        }
        None => table.write_to(io::stdout().lock()).map_err(io_err),
    }
}

fn apply_seed(cfg: &mut SystemConfig, seed: Option<u64>) {
    if let Some(s) = seed {
        cfg.seed = s;
    }
}

fn simulate(args: &Common) -> Result<(), Failure> {
    let text = read_config(args.config.as_deref(), false)?;
    let mut spec = SimulateSpec::parse(&text)?;
    apply_seed(&mut spec.config, args.seed);
    let trials = check_trials(args.trials)?.unwrap_or(spec.trials);
    let recs = map_trials(trials, args.workers, |t| {
        run_trial_with(&spec.config, t, spec.plug_in)
    })?;
    write_table(&raw_table(&recs), args.out.as_deref())
}

fn sweep(args: &Common) -> Result<(), Failure> {
    let text = read_config(args.config.as_deref(), true)?;
    let mut spec = SweepSpec::parse(&text)?;
    apply_seed(&mut spec.base, args.seed);
    if let Some(t) = check_trials(args.trials)? {
        spec.trials = t;
    }
    let table = run_sweep(&spec, args.workers)?;
    write_table(&table, args.out.as_deref())
}

fn analytic(args: &Common) -> Result<(), Failure> {
    let text = read_config(args.config.as_deref(), true)?;
    let (cfg, grid) = parse_analytic_file(&text)?;
    write_table(&emit_analytics(&cfg, &grid)?, args.out.as_deref())
}

fn verify(args: &Common) -> Result<(), Failure> {
    let text = read_config(args.config.as_deref(), false)?;
    let (mut cfg, mut opts): (SystemConfig, VerifyOptions) = parse_verify_file(&text)?;
    apply_seed(&mut cfg, args.seed);
    if let Some(t) = check_trials(args.trials)? {
        opts.trials = t;
    }
    opts.workers = args.workers;
    let report = verify_oracles(&cfg, &opts);
    write_table(&report.to_table(), args.out.as_deref())?;
    for c in &report.checks {
        eprintln!(
            "{} {} value={:.4e} tol={:.4e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Analytic(a) => analytic(a),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}

//! Command-line front end: each subcommand runs one named experiment, writes
//! CSV data plus a verdict JSON under the output directory, and prints a
//! one-line summary.
//!
//! Exit codes: 0 when the experiment verdict is PASS, 2 on FAIL, 1 on any
//! error (bad config, I/O, numerical failure).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qthermo::experiments::{
    run_bounds, run_cp_check, run_fig1, run_nonmarkov, run_sigma_map, run_sweep, run_witness,
    ExperimentConfig, Verdict,
};

#[derive(Parser)]
#[command(
    name = "qthermo",
    about = "Entropy production and Markovianity experiments for open quantum systems",
    version
)]
struct Cli {
    /// JSON experiment configuration; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides config and QTHERMO_OUT_DIR).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// RNG seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Horizon override.
    #[arg(long, global = true)]
    t_end: Option<f64>,

    /// Integration step override.
    #[arg(long, global = true)]
    dt: Option<f64>,

    /// Worker pool size for initial-state sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy-production sweep over initial states.
    Fig1,
    /// Complete-positivity indicator functions on a time grid.
    CpCheck,
    /// Reachable-radius bounds and containment checks.
    Bounds,
    /// Eigenvalue-sign witness for second-law violations.
    Witness,
    /// Map-level binary entropy production probe.
    SigmaMap,
    /// Sampled trace-distance backflow measure.
    Nonmarkov,
    /// Unital three-way equivalence sweep.
    Sweep,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, qthermo::Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = Some(out.clone());
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t_end) = cli.t_end {
        cfg.t_end = t_end;
    }
    if let Some(dt) = cli.dt {
        cfg.dt = dt;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    Ok(cfg)
}

fn dispatch(cmd: &Command, cfg: &ExperimentConfig) -> Result<Verdict, qthermo::Error> {
    match cmd {
        Command::Fig1 => run_fig1(cfg),
        Command::CpCheck => run_cp_check(cfg),
        Command::Bounds => run_bounds(cfg),
        Command::Witness => run_witness(cfg),
        Command::SigmaMap => run_sigma_map(cfg),
        Command::Nonmarkov => run_nonmarkov(cfg),
        Command::Sweep => run_sweep(cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(&cli.command, &cfg) {
        Ok(verdict) => {
            let status = if verdict.pass { "PASS" } else { "FAIL" };
            let stats: Vec<String> = verdict
                .stats
                .iter()
                .map(|(k, v)| format!("{k}={v:.6e}"))
                .collect();
            println!("{} {} ({})", verdict.experiment, status, stats.join(", "));
            if verdict.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

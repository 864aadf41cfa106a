//! Command-line front end: build wavepacket families, run the built-in
//! self-check suite, run scaling sweeps, and merge sweep reports into a
//! verdict matrix. All physics parameters come from a versioned TOML config;
//! every output file is written atomically.

mod build;
mod check;
mod config;
mod merge;
mod output;
mod scan;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "collapse-cli",
    version,
    about = "Wavepacket family builder and mixed-norm scaling scanner"
)]
struct Cli {
    /// TOML run configuration (schema documented in the README).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides the config's `out-dir` (default "out").
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker pool size; defaults to the number of cores. Results are
    /// bit-identical at any setting.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Override every job's construction seed.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the families named in the config and write summary records.
    Build {
        /// Run only this job (default: every build job).
        #[arg(long, value_name = "NAME")]
        job: Option<String>,
    },
    /// Run the built-in oracle fixtures and invariant checks.
    Check {
        /// Keep only checks whose name contains this substring.
        #[arg(long, value_name = "FILTER")]
        only: Option<String>,
        /// Corrupt the path under test, to prove the checks can fail.
        #[arg(long, value_enum, value_name = "FAULT")]
        inject_fault: Option<Fault>,
    },
    /// Run the scaling sweeps named in the config.
    Scan {
        /// Run only this job (default: every scan job).
        #[arg(long, value_name = "NAME")]
        job: Option<String>,
    },
    /// Merge sweep reports into a verdict matrix with a suite status.
    ReportMerge {
        /// Merge only this job's report (default: every scan job).
        #[arg(long, value_name = "NAME")]
        job: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    /// Flip the conjugate-branch sign in the evolution under test.
    BranchSign,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot size the worker pool")?;
    }
    match &cli.command {
        Command::Build { job } => {
            let cfg = load_config(&cli)?;
            let out = output::out_dir(&cli, Some(&cfg));
            build::run(&cfg, job.as_deref(), &out, cli.seed)
        }
        Command::Check { only, inject_fault } => {
            // The check fixtures are built in; a config only supplies out-dir.
            let cfg = cli.config.as_deref().map(config::load).transpose()?;
            let out = output::out_dir(&cli, cfg.as_ref());
            let fault = inject_fault.map(|Fault::BranchSign| check::Fault::BranchSign);
            check::run(only.as_deref(), fault, &out)
        }
        Command::Scan { job } => {
            let cfg = load_config(&cli)?;
            let out = output::out_dir(&cli, Some(&cfg));
            scan::run(&cfg, job.as_deref(), &out, cli.seed)
        }
        Command::ReportMerge { job } => {
            let cfg = load_config(&cli)?;
            let out = output::out_dir(&cli, Some(&cfg));
            merge::run(&cfg, job.as_deref(), &out)
        }
    }
}

fn load_config(cli: &Cli) -> Result<config::RunConfig> {
    let path = cli
        .config
        .as_deref()
        .context("this command needs --config PATH")?;
    config::load(path)
}

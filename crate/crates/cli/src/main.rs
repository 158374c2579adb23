//! `evcharge`: synthesize, cluster, fit, simulate, validate and run the
//! regional ADMD study from the command line.

mod commands;
mod config;
mod error;
mod inputs;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{admd, cluster, fit, simulate, synth, validate};
use config::RunConfig;
use error::CliResult;
use manifest::Run;

#[derive(Debug, Parser)]
#[command(name = "evcharge", version, about = "Stochastic EV charging demand model")]
struct Cli {
    /// Root seed; every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic survey and trial with known ground truth.
    Synth(synth::SynthArgs),
    /// Cluster survey days into travel archetypes.
    Cluster(cluster::ClusterArgs),
    /// Fit charging probability tables from a trial.
    Fit(fit::FitArgs),
    /// Monte Carlo aggregate charging demand.
    Simulate(simulate::SimulateArgs),
    /// Leave-one-out validation against a trial.
    Validate(validate::ValidateArgs),
    /// Regional ADMD increase study.
    Admd(admd::AdmdArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Cluster(_) => "cluster",
            Command::Fit(_) => "fit",
            Command::Simulate(_) => "simulate",
            Command::Validate(_) => "validate",
            Command::Admd(_) => "admd",
        }
    }
}

fn configure(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match &cli.command {
        Command::Synth(_) | Command::Fit(_) => {}
        Command::Cluster(a) => a.apply(&mut cfg),
        Command::Simulate(a) => a.sim.apply(&mut cfg.sim),
        Command::Validate(a) => {
            a.sim.apply(&mut cfg.sim);
            a.apply(&mut cfg);
        }
        Command::Admd(a) => a.sim.apply(&mut cfg.sim),
    }
    if let Command::Fit(a) = &cli.command {
        a.apply(&mut cfg);
    }
    cfg.finish(cli.seed)
}

#[cfg(feature = "parallel")]
fn set_threads(n: Option<usize>) -> CliResult<()> {
    match n {
        Some(0) => Err(error::CliError::config("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(error::internal),
        None => Ok(()),
    }
}

#[cfg(not(feature = "parallel"))]
fn set_threads(n: Option<usize>) -> CliResult<()> {
    if n.is_some_and(|n| n != 1) {
        eprintln!("warning: built without the parallel feature; --threads is ignored");
    }
    Ok(())
}

fn execute(cli: &Cli) -> CliResult<()> {
    set_threads(cli.threads)?;
    let cfg = configure(cli)?;
    let mut run = Run::new(&cli.out)?;
    let args = match &cli.command {
        Command::Synth(a) => synth::run(a, &cfg, &mut run)?,
        Command::Cluster(a) => cluster::run(a, &cfg, &mut run)?,
        Command::Fit(a) => fit::run(a, &cfg, &mut run)?,
        Command::Simulate(a) => simulate::run(a, &cfg, &mut run)?,
        Command::Validate(a) => validate::run(a, &cfg, &mut run)?,
        Command::Admd(a) => admd::run(a, &cfg, &mut run)?,
    };
    run.finish(cli.command.name(), &cfg, args)
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
    let outcome = std::panic::catch_unwind(|| execute(&cli));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("evcharge {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
        // The panic hook has already printed the message.
        Err(_) => ExitCode::from(3),
    }
}

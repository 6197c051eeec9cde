//! Batch CLI over the experiment harness. Every subcommand reads a config
//! file, runs deterministically and writes CSV.
//!
//! Exit codes: 0 success, 2 configuration/validation failure, 3 numerical or
//! I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use atomem::config::{Mode, RunConfig};
use atomem::harness::{self, SweepControl};
use atomem::Error;

#[derive(Parser)]
#[command(name = "atomem", version, about = "atom-membrane coupling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Run configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the ensemble seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the sample count of the subcommand being run
    #[arg(long)]
    samples: Option<usize>,
    /// Override the model mode: homogeneous | ensemble
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived model parameters
    Params(CommonArgs),
    /// Membrane ringdown with and without atoms
    Ringdown(CommonArgs),
    /// Membrane dissipation vs lattice power
    SweepPower(CommonArgs),
    /// Membrane dissipation vs atom number
    SweepAtoms(CommonArgs),
    /// Atom heating under a continuously driven membrane
    Heating(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Params(a)
            | Command::Ringdown(a)
            | Command::SweepPower(a)
            | Command::SweepAtoms(a)
            | Command::Heating(a) => a,
        }
    }
}

fn load_config(args: &CommonArgs, is_heating: bool) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.ensemble.seed = seed;
    }
    if let Some(samples) = args.samples {
        if is_heating {
            cfg.experiment.heating.samples = samples;
        } else {
            cfg.ensemble.sample_count = samples;
        }
    }
    if let Some(mode) = &args.mode {
        cfg.experiment.mode = mode.parse::<Mode>()?;
    }
    cfg.validate()?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn emit(args: &CommonArgs, contents: String) -> Result<(), Error> {
    match &args.out {
        Some(path) => harness::write_csv(path, &contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let args = cli.command.common();
    match &cli.command {
        Command::Params(_) => {
            let cfg = load_config(args, false)?;
            let rows = harness::emit_params(&cfg)?;
            match &args.out {
                Some(_) => emit(args, harness::params_csv(&rows, cfg.ensemble.seed, cfg.config_hash))?,
                None => {
                    println!("{:<16} {:>16} {:>8} {:>16}", "name", "value_si", "unit", "value_hz");
                    for r in &rows {
                        match r.hz {
                            Some(hz) => println!("{:<16} {:>16.9e} {:>8} {:>16.9e}", r.name, r.value, r.unit, hz),
                            None => println!("{:<16} {:>16.9e} {:>8} {:>16}", r.name, r.value, r.unit, ""),
                        }
                    }
                }
            }
        }
        Command::Ringdown(_) => {
            let cfg = load_config(args, false)?;
            let pair = harness::run_ringdown(&cfg)?;
            eprintln!(
                "gamma_with = {:.6} /s, gamma_without = {:.6} /s, delta_gamma = {:.6} /s",
                pair.with_atoms.fitted_gamma, pair.without_atoms.fitted_gamma, pair.delta_gamma
            );
            emit(args, harness::ringdown_csv(&pair, cfg.ensemble.seed, cfg.config_hash))?;
        }
        Command::SweepPower(_) => {
            let cfg = load_config(args, false)?;
            let sweep = harness::run_sweep(&cfg, SweepControl::Power)?;
            emit(args, harness::sweep_csv(&sweep))?;
        }
        Command::SweepAtoms(_) => {
            let cfg = load_config(args, false)?;
            let sweep = harness::run_sweep(&cfg, SweepControl::AtomNumber)?;
            emit(args, harness::sweep_csv(&sweep))?;
        }
        Command::Heating(_) => {
            let cfg = load_config(args, true)?;
            let sweep = harness::run_heating(&cfg)?;
            emit(args, harness::heating_csv(&sweep))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

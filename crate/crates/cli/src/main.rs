//! `gravikern`: command-line driver for the gravitational inverse-problem
//! toolkit. Every subcommand reads one JSON experiment config (see
//! `docs/formats.md`) and writes its results next to it.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Loaded;
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "gravikern", version, about = "Forward maps, null spaces and inversions for Newtonian gravity")]
struct Cli {
    /// Worker threads for parallel evaluation (1 gives bitwise-reproducible runs).
    #[arg(long, global = true, env = "GRAVIKERN_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ConfigArg {
    /// Experiment configuration (JSON).
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exterior potential and gradient observables of a density at receiver points.
    Forward(ConfigArg),
    /// Check that a density is invisible to the potential or to the gradient observable V.
    KernelVerify(ConfigArg),
    /// Recover a star-shaped body of known radial density from its multipoles.
    InvertShape(ConfigArg),
    /// Singular values, conditioning and approximate null space of point-mass lattices.
    SvdAnalyze(ConfigArg),
    /// Sample a continuum kernel density on lattices and locate it in the SVD picture.
    ProbeKernelDiscrete(ConfigArg),
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot configure {n} threads: {e}")))?;
    }
    let (arg, handler): (&ConfigArg, fn(&Loaded) -> CliResult<()>) = match &cli.command {
        Command::Forward(a) => (a, commands::forward::run),
        Command::KernelVerify(a) => (a, commands::kernel_verify::run),
        Command::InvertShape(a) => (a, commands::invert_shape::run),
        Command::SvdAnalyze(a) => (a, commands::svd_analyze::run),
        Command::ProbeKernelDiscrete(a) => (a, commands::probe::run),
    };
    handler(&Loaded::load(&arg.config)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scatter_cli::{load_config, run_command, thread_count, CliError, Command};

#[derive(Parser)]
#[command(name = "scatter", about = "Synthesize, propagate and Floquet-analyse oscillating potential wells")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// INI file; its keys override the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Built-in preset (fig2a, fig3a, sweep1, ...).
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample potential slices over one period.
    Synth(Common),
    /// Propagate a Gaussian packet and analyse its Floquet content.
    Propagate(Common),
    /// Compare free, family-1 and family-2 packets at a common time.
    Delay(Common),
    /// Coupled-channel S-matrix sweep over energies.
    Smatrix(Common),
    /// Packet analysis against the packet-averaged S-matrix.
    Crossval(Common),
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (command, common) = match cli.command {
        Cmd::Synth(c) => (Command::Synth, c),
        Cmd::Propagate(c) => (Command::Propagate, c),
        Cmd::Delay(c) => (Command::Delay, c),
        Cmd::Smatrix(c) => (Command::Smatrix, c),
        Cmd::Crossval(c) => (Command::Crossval, c),
    };
    if let Some(n) = thread_count()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let (cfg, label) = load_config(common.preset.as_deref(), common.config.as_deref())?;
    cfg.validate()?;
    let outcome = run_command(command, &cfg, &common.out, &label)?;
    print!("{}", outcome.render(&label));
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("scatter: {e}");
            ExitCode::from(1)
        }
    }
}

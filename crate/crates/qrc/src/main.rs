//! `qrc`: drive the reservoir benchmarks from the command line. All real
//! work lives in the library; this binary only parses arguments, dispatches,
//! and maps errors onto exit-code categories (config 2, solver 3, ridge 4,
//! i/o 5).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qrc::app::{self, RunOptions};

#[derive(Parser)]
#[command(name = "qrc", version, about = "Single-qudit reservoir computing benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for result files and the run manifest.
    #[arg(long)]
    out: PathBuf,
    /// Override the master seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count; defaults to all hardware threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Also print the result JSON to standard output.
    #[arg(long)]
    stdout: bool,
}

impl From<CommonArgs> for RunOptions {
    fn from(a: CommonArgs) -> Self {
        RunOptions {
            config: a.config,
            out: a.out,
            seed: a.seed,
            workers: a.workers,
            stdout: a.stdout,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and emit its samples.
    Simulate(CommonArgs),
    /// Run a benchmark task once.
    #[command(subcommand)]
    Task(TaskCommand),
    /// Run a parameter sweep over reservoir realizations.
    Sweep(CommonArgs),
    /// Re-derive plot CSVs from a previous run's results JSON.
    Export(CommonArgs),
}

#[derive(Subcommand)]
enum TaskCommand {
    /// Amplitude and phase estimation of a sinusoidal input.
    Signal(CommonArgs),
    /// Short-term memory capacity under a piecewise-constant input.
    Stmc(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => app::run_simulate(&args.into()),
        Command::Task(TaskCommand::Signal(args)) => app::run_task_signal(&args.into()),
        Command::Task(TaskCommand::Stmc(args)) => app::run_task_stmc(&args.into()),
        Command::Sweep(args) => app::run_sweep_cmd(&args.into()),
        Command::Export(args) => app::run_export(&args.into()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("[qrc] error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

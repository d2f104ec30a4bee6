use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qcertify_cli::{run, CliError, CommandKind, RunOptions};

#[derive(Parser)]
#[command(name = "qcertify", version, about = "Chernoff bounds and Bayesian certification of single-qubit channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a Chernoff bound over one parameter.
    Chernoff(RunArgs),
    /// Estimate certification success probabilities.
    Certify(RunArgs),
    /// Track posterior variance against the action budget.
    Convergence(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of trials; overrides the config.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Chernoff(a) => (CommandKind::Chernoff, a),
        Command::Certify(a) => (CommandKind::Certify, a),
        Command::Convergence(a) => (CommandKind::Convergence, a),
    };
    let result = configure_threads(args.threads).and_then(|()| {
        run(
            kind,
            &RunOptions {
                config: args.config,
                out: args.out,
                seed: args.seed,
                trials: args.trials,
            },
        )
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Config("--threads must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

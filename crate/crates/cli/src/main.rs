use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ltn_cli::{run_config, CliError, Command, Options};

#[derive(Parser)]
#[command(name = "ltn-lab", version, about = "One-dimensional local-to-nonlocal coupling lab")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Run config (JSON).
    #[arg(value_name = "CONFIG", required_unless_present = "config")]
    path: Option<PathBuf>,
    #[arg(long, conflicts_with = "path")]
    config: Option<PathBuf>,
    /// Output directory; defaults to `output.dir` in the config, then `ltn-out`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the diagnostic selected in the config.
    Run(Common),
    /// Polynomial patch test.
    PatchTest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Residual of the linear field under zero load.
    GhostForce(Common),
    /// Convergence study over the configured deltas.
    Converge(Common),
    /// Robin coefficient sweep for the partitioned solver.
    SweepRobin(Common),
    /// Difference between two coupling methods on the same grid.
    Compare(Common),
}

/// `LTN_LAB_THREADS`: worker cap, 0 = serial; unset uses the available cores.
fn threads() -> Result<usize, CliError> {
    match std::env::var("LTN_LAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("[LTN_LAB_THREADS] not a count: {v:?}"))),
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, degree) = match cli.command {
        Cmd::Run(c) => (Command::Run, c, None),
        Cmd::PatchTest { common, degree } => (Command::PatchTest, common, degree),
        Cmd::GhostForce(c) => (Command::GhostForce, c, None),
        Cmd::Converge(c) => (Command::Converge, c, None),
        Cmd::SweepRobin(c) => (Command::SweepRobin, c, None),
        Cmd::Compare(c) => (Command::Compare, c, None),
    };
    let path = common.config.or(common.path).expect("clap requires a config");
    let result = threads().and_then(|threads| {
        let opts = Options {
            out: common.out,
            csv: matches!(common.format, Format::Csv),
            seed: common.seed,
            threads,
            degree,
        };
        run_config(command, &path, &opts)
    });
    match result {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ltn-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

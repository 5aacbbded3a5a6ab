use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use harmonic_groups::{execute, Context, Operation, EXIT_CHECK, EXIT_OTHER};

#[derive(Parser)]
#[command(name = "harmonic-groups", version, about = "Lipschitz harmonic functions on groups of polynomial growth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random stream; required by stochastic operations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for the CSV and manifest.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Evaluate the operation's acceptance check and exit 5 if it fails.
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Residuals of the mean-value property at ball points.
    Verify,
    /// Lipschitz seminorm, exact and over balls.
    Lipnorm,
    /// Dimension of the degree-one harmonic functions.
    Dimension,
    /// Growth of a function along cyclic subgroups.
    Liouville,
    /// First-return distribution on a finite-index subgroup.
    HittingMeasure,
    /// Harmonic induction from a subgroup.
    Induce,
    /// Constants of the induction estimate.
    Constants,
    /// Abelian defect growth of a coarse map.
    Defect,
    /// Doubling homogenization of one coordinate.
    Homogenize,
    /// Linear part of a coarse map.
    Linearize,
    /// Harmonic-coordinate straightening.
    Straighten,
    /// Runs every acceptance criterion.
    CheckAll,
}

impl From<Command> for Operation {
    fn from(c: Command) -> Self {
        match c {
            Command::Verify => Operation::Verify,
            Command::Lipnorm => Operation::Lipnorm,
            Command::Dimension => Operation::Dimension,
            Command::Liouville => Operation::Liouville,
            Command::HittingMeasure => Operation::HittingMeasure,
            Command::Induce => Operation::Induce,
            Command::Constants => Operation::Constants,
            Command::Defect => Operation::Defect,
            Command::Homogenize => Operation::Homogenize,
            Command::Linearize => Operation::Linearize,
            Command::Straighten => Operation::Straighten,
            Command::CheckAll => Operation::CheckAll,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let op = Operation::from(cli.command);
    let text = match &cli.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: {}: {e}", p.display());
                return ExitCode::from(EXIT_OTHER as u8);
            }
        },
        None => None,
    };
    let ctx = Context {
        seed: cli.seed,
        check: cli.check || op == Operation::CheckAll,
    };
    match execute(op, text.as_deref(), &ctx, &cli.out) {
        Ok(summary) => {
            println!("csv: {}", summary.csv_path.display());
            println!("manifest: {}", summary.manifest_path.display());
            println!("sha256: {}", summary.sha256);
            match summary.check_passed {
                Some(false) => {
                    println!("check: FAIL");
                    ExitCode::from(EXIT_CHECK as u8)
                }
                Some(true) => {
                    println!("check: PASS");
                    ExitCode::SUCCESS
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}

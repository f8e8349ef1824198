use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::Outcome;

/// Verify C∞-structures, convert factors and run Pfaffian reductions from
/// JSON scenario files.
#[derive(Parser, Debug)]
#[command(name = "cinf", version)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalOpts {
    /// Seed for the sampled zero tests.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sample points per zero test.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Relative tolerance for inexact evaluations.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the JSON report here and the text report next to it.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check involutivity, independence or a full C∞-structure.
    Check { scenario: PathBuf, what: CheckKind },
    /// Run the reduction script and report the integral manifolds.
    Reduce { scenario: PathBuf },
    /// Certify the scenario's per-level factors and their conversions.
    Factors {
        scenario: PathBuf,
        /// Also build and certify the solvable structure Y_k = f_k X_k.
        #[arg(long)]
        emit_solvable: bool,
    },
    /// Verify a single object.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Convert between symmetrizing and integrating factors.
    Convert {
        #[command(subcommand)]
        what: ConvertCmd,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    Factor {
        scenario: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long, value_enum)]
        kind: FactorKindArg,
        #[arg(long)]
        expr: String,
    },
}

#[derive(Subcommand, Debug)]
enum ConvertCmd {
    Factor {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long)]
        level: usize,
        /// Defaults to the scenario's factor at this level.
        #[arg(long)]
        expr: Option<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum CheckKind {
    Involutive,
    CinfStructure,
    Independence,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FactorKindArg {
    Symmetrizing,
    RelativeIntegrating,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Direction {
    F2mu,
    Mu2f,
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let o = &cli.opts;
    match &cli.cmd {
        Command::Check { scenario, what } => commands::check(&commands::load(scenario, o)?, *what),
        Command::Reduce { scenario } => commands::reduce(&commands::load(scenario, o)?),
        Command::Factors { scenario, emit_solvable } => commands::factors(&commands::load(scenario, o)?, *emit_solvable),
        Command::Verify { what: VerifyCmd::Factor { scenario, level, kind, expr } } => {
            commands::verify_factor(&commands::load(scenario, o)?, *level, *kind, expr)
        }
        Command::Convert { what: ConvertCmd::Factor { scenario, direction, level, expr } } => {
            commands::convert_factor(&commands::load(scenario, o)?, *direction, *level, expr.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            for l in &out.lines {
                println!("{l}");
            }
            if let Some(path) = &cli.opts.report {
                if let Err(e) = commands::write_report(path, &out) {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

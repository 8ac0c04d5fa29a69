use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bvpkit_cli::report::Output;
use bvpkit_cli::{analyze, family, load, oracle, solve, CliError, Format, Settings, Status};
use clap::{Parser, Subcommand};

/// Solvability analysis and solution of linear ODE boundary-value problems.
#[derive(Debug, Parser)]
#[command(name = "bvpkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Grid nodes on the problem interval.
    #[arg(long, global = true, default_value_t = bvpkit::grid::DEFAULT_NODES)]
    nodes: usize,
    /// Absolute singular-value cutoff for the numerical rank.
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
    /// Comma-separated parameter values, e.g. 1e-1,1e-2,1e-3.
    #[arg(long, global = true, value_delimiter = ',')]
    eps_schedule: Option<Vec<f64>>,
    /// Largest number of points in one multipoint series.
    #[arg(long, global = true, default_value_t = bvpkit::limits::multipoint::DEFAULT_SERIES_CAP)]
    series_cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Characteristic matrix, index, kernel and cokernel dimensions.
    Analyze { file: PathBuf },
    /// Solve the problem and report the solution on the grid.
    Solve { file: PathBuf },
    /// Run the convergence experiment of the document's family.
    Family { file: PathBuf },
    /// Compare with the closed-form characteristic matrix (file or example1..example5).
    OracleCheck { target: String },
}

fn run(cli: &Cli) -> Result<(Output, Status), CliError> {
    let settings = Settings { nodes: cli.nodes, rank_tol: cli.rank_tol, schedule: cli.eps_schedule.clone(), series_cap: cli.series_cap };
    let read = |p: &Path| load(p);
    match &cli.command {
        Command::Analyze { file } => analyze(&read(file)?, &settings),
        Command::Solve { file } => solve(&read(file)?, &settings),
        Command::Family { file } => family(&read(file)?, &settings),
        Command::OracleCheck { target } => oracle::run(target, &settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((output, status)) => {
            let text = output.render(cli.format);
            let written = match &cli.out {
                Some(path) => std::fs::write(path, text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

//! `disca`: command-line front end for the DISCA simulator.

mod commands;
mod job;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status for failed checks; usage errors exit with 2 (clap), other
/// errors with 3.
const EXIT_VALIDATION: u8 = 1;
const EXIT_ERROR: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "disca",
    version,
    about = "In-SRAM stochastic-computing MatMul simulator"
)]
struct Cli {
    /// Code table file; defaults to the built-in derived table.
    #[arg(long, global = true, env = "DISCA_TABLE")]
    table: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive, inspect, or check code tables.
    #[command(subcommand)]
    Codes(commands::codes::CodesCommand),
    /// Print the codes of digits, or decode a bit string.
    Encode(commands::encode::EncodeArgs),
    /// Run a MatMul job and report outputs, accuracy, cycles and energy.
    Matmul(commands::matmul::MatmulArgs),
    /// Engine-level energy, efficiency and throughput figures.
    Bench(commands::bench::BenchArgs),
    /// Dump the address trace of an L-major sweep.
    Trace(commands::trace::TraceArgs),
    /// Run the invariant suite.
    Verify(commands::verify::VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Csv,
}

/// Energy inputs shared by several commands.
#[derive(Args, Debug, Default, Clone)]
struct EnergyArgs {
    /// Energy constants file (TOML); missing keys keep their defaults.
    #[arg(long)]
    constants: Option<PathBuf>,
    /// Technology scaling table (TOML).
    #[arg(long)]
    scaling: Option<PathBuf>,
    /// Report figures scaled to this technology node as well.
    #[arg(long)]
    node: Option<String>,
    #[arg(long, value_name = "FJ")]
    write_fj: Option<f64>,
    #[arg(long, value_name = "FJ")]
    read_fj: Option<f64>,
    #[arg(long, value_name = "FJ")]
    scmul_fj: Option<f64>,
    #[arg(long, value_name = "FJ")]
    decode_fj: Option<f64>,
    #[arg(long, value_name = "FJ")]
    accum_fj: Option<f64>,
}

pub enum Outcome {
    Success,
    ValidationFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let table = cli.table.as_deref();
    let result = match cli.command {
        Command::Codes(c) => commands::codes::run(c, table),
        Command::Encode(a) => commands::encode::run(a, table),
        Command::Matmul(a) => commands::matmul::run(a, table),
        Command::Bench(a) => commands::bench::run(a),
        Command::Trace(a) => commands::trace::run(a),
        Command::Verify(a) => commands::verify::run(a, table),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => ExitCode::from(EXIT_VALIDATION),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

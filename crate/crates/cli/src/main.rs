//! Entry point: parse the command line, run the pipeline, map the outcome
//! onto the exit contract (0 pass, 1 negative result, 2 usage/config/IO,
//! 3 numeric failure). Usage errors from the argument parser itself also
//! exit 2, clap's native convention.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lockkey::run::{execute, Command, Invocation};
use lockkey_core::Error;

#[derive(Parser)]
#[command(
    name = "lockkey",
    version,
    about = "Constructs and verifies selective lock/key charge distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration file (`section.key = value` lines, `#` comments).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Override the configured output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Also write the assembled operator matrix (lower-triangle CSV) to PATH.
    #[arg(long, value_name = "PATH")]
    dump_operator: Option<PathBuf>,

    /// Also write the four fields as CSV into DIR (construct/verify only).
    #[arg(long, value_name = "DIR")]
    dump_fields: Option<PathBuf>,

    /// Seed for the seeded random fields of oracle-check.
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Commands {
    /// Compute the full spectrum and write spectrum.csv.
    Spectrum(CommonArgs),
    /// Build the four-field construction and write its interaction report.
    Construct(CommonArgs),
    /// Like construct, but exit 0 only if the ten-sign pattern holds.
    Verify(CommonArgs),
    /// Sweep domain scales and fit the interaction-bound scaling law.
    ScanSize(CommonArgs),
    /// Sweep the mixing weight over alpha.grid at fixed mode indices.
    ScanAlpha(CommonArgs),
    /// Cross-check direct vs spectral-sum interactions on random fields.
    OracleCheck(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Commands::Spectrum(args) => (Command::Spectrum, args),
        Commands::Construct(args) => (Command::Construct, args),
        Commands::Verify(args) => (Command::Verify, args),
        Commands::ScanSize(args) => (Command::ScanSize, args),
        Commands::ScanAlpha(args) => (Command::ScanAlpha, args),
        Commands::OracleCheck(args) => (Command::OracleCheck, args),
    };
    let invocation = Invocation {
        command,
        config_path: args.config,
        out_dir: args.out,
        dump_operator: args.dump_operator,
        dump_fields: args.dump_fields,
        seed: args.seed,
    };
    match execute(&invocation) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Numeric(_) => ExitCode::from(3),
                Error::Input(_) | Error::Contract(_) | Error::Resource(_) => ExitCode::from(2),
            }
        }
    }
}

//! `modval`: scenario files in, numbers and CSV out.
//!
//! Exit codes: 0 success, 2 malformed input, 3 domain error.

mod commands;
mod scenario;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "modval",
    version,
    about = "Weak values, modular values and pointer profiles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `hbar` from the scenario.
    #[arg(long)]
    hbar: Option<f64>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Cross-check against the joint-space oracle; prints the largest
    /// amplitude deviation on stderr.
    #[arg(long)]
    oracle: bool,
    /// Trotter steps for the oracle. Without it the oracle is spectral.
    #[arg(long, requires = "oracle")]
    oracle_steps: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prints the weak value as `re, im`.
    WeakValue {
        #[command(flatten)]
        common: Common,
    },
    /// Prints the modular value at `coupling.gamma` as `re, im`.
    ModularValue {
        #[command(flatten)]
        common: Common,
        /// Also recover the weak value from a central difference at zero
        /// coupling.
        #[arg(long)]
        derivative: bool,
        /// Step for `--derivative`.
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
    },
    /// Pointer state and intensity at `coupling.gamma` as CSV.
    Profile {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Centroid, M and interference coefficient per coupling as CSV.
    Persistence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Overlap of the two pointer basis states per coupling as CSV.
    Orthogonality {
        #[command(flatten)]
        common: Common,
    },
    /// Real weak value candidates from a two-lobe intensity profile.
    FauxRead {
        #[command(flatten)]
        common: Common,
        /// CSV with `q` and `intensity` columns on the scenario grid. Without
        /// it the profile is simulated from the scenario.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Interferometer response curve, or one camera image with `--camera`.
    Mzi {
        #[command(flatten)]
        common: Common,
        /// Emit the camera image at `coupling.gamma` instead of the curve.
        #[arg(long)]
        camera: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(modval::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_domain() => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "InputError: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<modval::Error> for CliError {
    fn from(e: modval::Error) -> Self {
        CliError::Core(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! `sqkd`: key-rate sweeps, thresholds, CAD comparisons, loss curves,
//! protocol simulation and oracle verification, written as CSV or TSV.

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sqkd_core::bb84cad::BasisMode;
use sqkd_core::keyrate::ChannelKind;
use sqkd_core::Mode;

use table::Format;

/// Overrides the rayon worker count.
pub const WORKERS_ENV: &str = "SQKD_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "sqkd", version, about = "Semi-quantum key distribution key-rate toolkit")]
struct Cli {
    #[command(flatten)]
    output: OutputArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file (written atomically); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Key rate at one noise level, or a sweep over Q.
    Keyrate(commands::KeyrateArgs),
    /// Largest Q with a positive key rate.
    Threshold(commands::ThresholdArgs),
    /// BB84 with repetition-code advantage distillation.
    Cad(commands::CadArgs),
    /// Key rate over lossy fiber.
    Loss(commands::LossArgs),
    /// Iteration-level Monte Carlo run of the protocol.
    Simulate(commands::SimulateArgs),
    /// Fuzz the estimators against the exact attack oracle.
    Verify(commands::VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Two => Mode::Mode2,
            ModeArg::Three => Mode::Mode3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Independent,
    Dependent,
    Custom,
}

impl From<ChannelArg> for ChannelKind {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Independent => ChannelKind::Independent,
            ChannelArg::Dependent => ChannelKind::Dependent,
            ChannelArg::Custom => ChannelKind::Custom,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    #[value(name = "4")]
    Four,
    #[value(name = "6")]
    Six,
}

impl From<BasisArg> for BasisMode {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Four => BasisMode::FourState,
            BasisArg::Six => BasisMode::SixState,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sqkd_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use sqkd_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Core(E::Domain(_)) => 2,
            CliError::Core(E::Infeasible(_) | E::DegenerateSearch(_) | E::DegenerateAttack(_)) => 3,
            _ => 1,
        }
    }
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV}={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Failed(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_workers()?;
    let out = cli.output.out.as_deref();
    let format = cli.output.format;
    match cli.command {
        Command::Keyrate(a) => commands::keyrate(&a, out, format),
        Command::Threshold(a) => commands::threshold(&a, out, format),
        Command::Cad(a) => commands::cad(&a, out, format),
        Command::Loss(a) => commands::loss(&a, out, format),
        Command::Simulate(a) => commands::simulate(&a, out, format),
        Command::Verify(a) => commands::verify(&a, out, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sqkd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! Command-line front end: the analytical model, the event-driven simulator,
//! the model-vs-simulation comparison, and scenario sweeps, with JSON/CSV/
//! human output.

mod compare;
mod error;
mod model;
mod render;
mod sim;
mod sweep;

pub use compare::{CompareOutput, CompareRow};
pub use error::CliError;
pub use model::{ModelRow, ModelTable};
pub use sim::{SimOutput, SimSummary, SummaryStation, SummaryTotals};
pub use sweep::{SweepOutput, SweepRow};

use std::path::PathBuf;

use airfair_core::scenario::Scheme;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Schema version stamped on every CLI output document.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Human,
}

fn parse_scheme(text: &str) -> Result<Scheme, String> {
    text.parse::<Scheme>().map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "airfair",
    version,
    about = "Airtime-fair queueing for 802.11n access points: analytical model and event-driven simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the analytical airtime/throughput model for a station list.
    Model(ModelArgs),
    /// Run the event-driven simulation described by a scenario file.
    Sim(SimArgs),
    /// Run one simulation and compare it against the analytical model.
    Compare(CompareArgs),
    /// Expand a scenario into scheme x seed variants, optionally running them.
    Sweep(SweepArgs),
}

/// Output destination and format, shared by every subcommand.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// One station as `aggregation,payload_bytes,rate_mbps`; repeatable.
    #[arg(long = "station", value_name = "N,L,R", required = true)]
    pub stations: Vec<String>,
    /// Split airtime equally across stations instead of per-frame FIFO shares.
    #[arg(long)]
    pub fairness: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Override the scenario's queueing scheme.
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<Scheme>,
    /// Override the scenario's RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Repetitions, seeded seed, seed+1, ... (runs fan out across threads).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub reps: u32,
    /// Write a JSONL per-packet trace of the first repetition to this file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Override the scenario's queueing scheme.
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<Scheme>,
    /// Override the scenario's RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Base scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Directory that receives the generated scenario files.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Schemes to expand, comma-separated; defaults to all four.
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme)]
    pub schemes: Vec<Scheme>,
    /// Number of seeds per scheme (seed, seed+1, ...).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub seeds: u32,
    /// Override the base seed before enumerating.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run every generated variant and write its report next to it.
    #[arg(long)]
    pub run: bool,
    /// Output format for the sweep manifest (printed to stdout).
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Model(args) => {
            let inputs = args
                .stations
                .iter()
                .enumerate()
                .map(|(i, text)| model::parse_station_arg(i, text))
                .collect::<Result<Vec<_>, _>>()?;
            let table = model::model_table(&inputs, args.fairness)?;
            render::emit(&args.output.out, |w| {
                render::model_out(w, args.output.format, &table)
            })
        }
        Command::Sim(args) => {
            let output = sim::run_sim(&args)?;
            render::emit(&args.output.out, |w| {
                render::sim_out(w, args.output.format, &output)
            })
        }
        Command::Compare(args) => {
            let output = compare::run_compare(&args)?;
            render::emit(&args.output.out, |w| {
                render::compare_out(w, args.output.format, &output)
            })
        }
        Command::Sweep(args) => {
            let output = sweep::run_sweep(&args)?;
            render::emit(&None, |w| render::sweep_out(w, args.format, &output))
        }
    }
}

/// Parse arguments and run; returns the process exit code.
///
/// Errors print one `error[<category>]: <message>` line to stderr, where the
/// category is one of `usage`, `config`, `model`, `io`, or `internal`.
pub fn main_entry<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            if code != 0 {
                eprintln!("error[usage]: invalid command line (see above)");
            }
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error[{}]: {}", err.category, err.message);
            1
        }
    }
}

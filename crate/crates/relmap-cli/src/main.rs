//! Command-line front end: map network parameters to application metrics,
//! invert requirements into parameter bounds, simulate seeded channels,
//! analyze recorded traces, and sweep metric curves.

mod commands;
mod report;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "relmap",
    version,
    about = "Map network packet-loss parameters to application availability/reliability and back"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map channel parameters to application-level metrics
    Map(MapArgs),
    /// Derive network parameter bounds from application requirements
    Invert(InvertArgs),
    /// Run a seeded Monte Carlo simulation of a synthetic channel
    Simulate(SimulateArgs),
    /// Estimate metrics from a recorded trace or packet log
    Analyze(AnalyzeArgs),
    /// Emit a metric curve over a swept parameter as plot-ready data
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Report format (default: json, except sweep which defaults to csv)
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Write the report to this file instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    /// Packet error ratio in (0, 1)
    #[arg(long)]
    per: f64,
    /// Mean down time as a duration with unit suffix (e.g. 4ms or 0.004s);
    /// requires --cycle-ms for the conversion to cycles
    #[arg(long, conflicts_with = "tau_dn_cycles")]
    tau_dn: Option<String>,
    /// Mean down time in cycles (>= 1)
    #[arg(long)]
    tau_dn_cycles: Option<f64>,
    /// Survival tolerance in whole cycles
    #[arg(long)]
    nsv: u32,
    /// Cycle period in milliseconds; enables second-based outputs
    #[arg(long)]
    cycle_ms: Option<f64>,
    /// Debug dump of the chain's transition matrix and steady state as CSV
    #[arg(long)]
    dump_chain: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct InvertArgs {
    /// Availability target in (0, 1)
    #[arg(long, conflicts_with = "nines")]
    availability: Option<f64>,
    /// Availability target as a count of nines (6 means 0.999999)
    #[arg(long)]
    nines: Option<u32>,
    /// Reliability target in cycles
    #[arg(long)]
    reliability_cycles: Option<f64>,
    /// Fixed packet error ratio
    #[arg(long, conflicts_with = "tau_dn_cycles")]
    per: Option<f64>,
    /// Fixed mean down time in cycles
    #[arg(long)]
    tau_dn_cycles: Option<f64>,
    /// Survival tolerance in whole cycles
    #[arg(long)]
    nsv: u32,
    /// Upper end of the searched mean-down-time range, in cycles
    #[arg(long, default_value_t = relmap::translate::DEFAULT_TAU_CAP)]
    tau_cap_cycles: f64,
    /// Cycle period in milliseconds; enables second-based outputs
    #[arg(long)]
    cycle_ms: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Packet error ratio in [0, 1)
    #[arg(long)]
    per: f64,
    /// Mean down time in cycles (bursty channel); omit with --independent
    #[arg(long, required_unless_present = "independent", conflicts_with = "independent")]
    tau_dn_cycles: Option<f64>,
    /// Simulate independent per-cycle loss instead of the bursty channel
    #[arg(long)]
    independent: bool,
    /// Cycles per replication (>= 10000)
    #[arg(long)]
    cycles: u64,
    /// Number of replications (>= 2)
    #[arg(long)]
    reps: u32,
    /// RNG seed
    #[arg(long)]
    seed: u64,
    /// Survival tolerance in whole cycles
    #[arg(long)]
    nsv: u32,
    /// Cycle period in milliseconds; enables second-based outputs
    #[arg(long)]
    cycle_ms: Option<f64>,
    /// Also write the first replication's trace to this file
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Binary trace file: one 0/1 per line, # starts a comment
    #[arg(
        long,
        conflicts_with_all = ["packet_log", "expected", "delay_bound_ms"]
    )]
    trace: Option<PathBuf>,
    /// Packet log CSV with header seq,delay_us (empty delay = never received)
    #[arg(long, requires = "expected", requires = "delay_bound_ms")]
    packet_log: Option<PathBuf>,
    /// Number of transmitted packets covered by the log
    #[arg(long)]
    expected: Option<usize>,
    /// Delay bound in milliseconds for a packet to count as delivered
    #[arg(long)]
    delay_bound_ms: Option<f64>,
    /// Survival tolerance in whole cycles
    #[arg(long)]
    nsv: u32,
    /// Cycle period in milliseconds; enables second-based outputs and the CDF
    #[arg(long)]
    cycle_ms: Option<f64>,
    /// Write the packet-weighted downtime CDF as CSV (needs --cycle-ms)
    #[arg(long)]
    cdf_out: Option<PathBuf>,
    /// Leave a loss burst at the very start of the trace unfiltered
    #[arg(long)]
    no_leading_filter: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepVar {
    #[value(name = "tau_dn")]
    TauDn,
    Nsv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    Availability,
    Unavailability,
    Reliability,
}

#[derive(Args)]
struct SweepArgs {
    /// Swept variable
    #[arg(long, value_enum)]
    var: SweepVar,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    /// Number of grid points
    #[arg(long)]
    steps: u64,
    /// Packet error ratio, fixed across the sweep
    #[arg(long)]
    per: f64,
    /// Fixed mean down time in cycles (required when sweeping nsv)
    #[arg(long)]
    tau_dn_cycles: Option<f64>,
    /// Fixed survival tolerance (required when sweeping tau_dn)
    #[arg(long)]
    nsv: Option<u32>,
    /// Metric emitted in the analytic/empirical columns
    #[arg(long, value_enum, default_value_t = Metric::Availability)]
    metric: Metric,
    /// Overlay seeded Monte Carlo estimates (needs --cycles, --reps, --seed)
    #[arg(long)]
    monte_carlo: bool,
    /// Cycles per replication for --monte-carlo
    #[arg(long)]
    cycles: Option<u64>,
    /// Replications per point for --monte-carlo
    #[arg(long)]
    reps: Option<u32>,
    /// Base RNG seed for --monte-carlo; point i uses seed + i
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

/// Errors carrying the documented process exit codes.
#[derive(Debug)]
enum CliError {
    /// Exit 2: argument or file contents outside the documented domain.
    Invalid(String),
    /// Exit 3: requirements that no per-cycle channel can meet.
    Infeasible(String),
    /// Exit 4: filesystem failure.
    Io(String),
    /// Exit 1: internal numerical failure (a bug for in-domain inputs).
    Internal(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(msg) => write!(f, "invalid input: {msg}"),
            CliError::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            CliError::Io(msg) => write!(f, "i/o failure: {msg}"),
            CliError::Internal(msg) => write!(f, "internal failure: {msg}"),
        }
    }
}

impl From<relmap::Error> for CliError {
    fn from(err: relmap::Error) -> Self {
        match err {
            relmap::Error::InvalidInput(msg) => CliError::Invalid(msg),
            relmap::Error::Infeasible(msg) => CliError::Infeasible(msg),
            relmap::Error::Numerical(msg) => CliError::Internal(msg),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Map(args) => commands::map(args),
        Command::Invert(args) => commands::invert(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Sweep(args) => commands::sweep(args),
    };
    if let Err(err) = result {
        eprintln!("relmap: {err}");
        std::process::exit(err.code());
    }
}

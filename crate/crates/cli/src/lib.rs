//! `fractune` command line: identification, reduction, tuning, simulation
//! and Bode analysis as reproducible batch runs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod inputs;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, CliResult};

use config::ProjectConfig;
use output::Run;

#[derive(Debug, Parser)]
#[command(
    name = "fractune",
    version,
    about = "Fractional-order identification, model reduction and FOPID tuning"
)]
pub struct Cli {
    /// TOML project configuration; unknown keys are rejected.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for every random stream; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving the output files.
    #[arg(long, global = true, default_value = ".", value_name = "DIR")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit ARX/ARMAX/BJ/OE models to t,u,y data and rank them by AIC.
    Identify(IdentifyArgs),
    /// Reduce integer-order models to FOPTD/SOPTD/NIOPTD templates.
    Reduce(ReduceArgs),
    /// Tune a FOPID or PID controller to a frequency-domain spec.
    Tune(TuneArgs),
    /// Closed-loop step-back transients under loop-gain scaling.
    Simulate(SimulateArgs),
    /// Magnitude and phase over a log frequency grid.
    Bode(BodeArgs),
    /// Synthesize step-back or random-binary data from a plant.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    /// t,u,y CSV file, or fixture:<id> for synthetic data.
    pub data: String,
    /// Structures to fit: arx, armax, bj, oe or all (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub structure: Vec<String>,
    #[arg(long)]
    pub na: Option<usize>,
    #[arg(long)]
    pub nb: Option<usize>,
    #[arg(long)]
    pub nc: Option<usize>,
    #[arg(long)]
    pub nd: Option<usize>,
    #[arg(long)]
    pub nf: Option<usize>,
    /// Input delay in samples.
    #[arg(long)]
    pub nk: Option<usize>,
    /// Sweep every order from 1 to N instead of using fixed orders.
    #[arg(long, value_name = "N")]
    pub sweep: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Model JSON files or fixture references (fixture:all for all eight).
    #[arg(required = true)]
    pub models: Vec<String>,
    /// foptd, soptd, nioptd1, nioptd2 or all.
    #[arg(long, default_value = "all")]
    pub template: String,
    /// Number of optimizer starts per template.
    #[arg(long)]
    pub starts: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControllerKind {
    Fopid,
    Pid,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Plant model JSON or fixture reference.
    pub plant: String,
    /// Spec JSON, or fixture:fopid / fixture:pid to back out the spec that
    /// published controller achieves on this plant.
    pub spec: String,
    #[arg(long, value_enum, default_value = "fopid")]
    pub controller: ControllerKind,
    /// Starting controller (JSON or fixture:fopid / fixture:pid).
    #[arg(long)]
    pub initial: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    Stepback,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Plant model JSON files or fixture references.
    #[arg(required = true)]
    pub plants: Vec<String>,
    /// Controller JSON or fixture:fopid / fixture:pid.
    #[arg(long)]
    pub controller: String,
    #[arg(long, value_enum, default_value = "stepback")]
    pub scenario: Scenario,
    /// Setpoint reduction as a fraction of full power.
    #[arg(long)]
    pub drop: Option<f64>,
    /// Loop-gain scale factors (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub gains: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BodeMode {
    /// The systems themselves.
    System,
    /// Controller times plant.
    Open,
    /// Sensitivity and complementary sensitivity magnitudes.
    St,
}

#[derive(Debug, Args)]
pub struct BodeArgs {
    /// Model JSON files or fixture references.
    #[arg(required = true)]
    pub systems: Vec<String>,
    /// Controller closing the loop (required for open, st and --flatness).
    #[arg(long)]
    pub controller: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<BodeMode>,
    /// Annotate the phase flatness of each loop at the crossover target.
    #[arg(long)]
    pub flatness: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Plant model JSON or fixture reference.
    pub plant: String,
    #[arg(long, value_enum)]
    pub input: Option<config::InputKind>,
    #[arg(long, value_enum)]
    pub noise: Option<config::NoiseKind>,
    #[arg(long, value_enum)]
    pub sampling: Option<SamplingArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Zoh,
    Tustin,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Identify(_) => "identify",
            Command::Reduce(_) => "reduce",
            Command::Tune(_) => "tune",
            Command::Simulate(_) => "simulate",
            Command::Bode(_) => "bode",
            Command::Generate(_) => "generate",
        }
    }
}

/// Run one parsed invocation, returning the output context on success.
/// Flags are folded into the configuration before it is hashed, so the hash
/// embedded in every output describes the run that produced it.
pub fn run(cli: Cli) -> CliResult<Run> {
    let mut cfg = ProjectConfig::load(cli.config.as_deref(), cli.seed)?;
    match &cli.command {
        Command::Identify(a) => commands::identify::configure(&mut cfg, a)?,
        Command::Reduce(a) => commands::reduce::configure(&mut cfg, a)?,
        Command::Simulate(a) => commands::simulate::configure(&mut cfg, a)?,
        Command::Generate(a) => commands::generate::configure(&mut cfg, a)?,
        Command::Tune(_) | Command::Bode(_) => {}
    }
    cfg.validate()?;
    let mut run = Run::new(cfg, cli.command.name(), &cli.out_dir)?;
    match &cli.command {
        Command::Identify(a) => commands::identify::run(&mut run, a)?,
        Command::Reduce(a) => commands::reduce::run(&mut run, a)?,
        Command::Tune(a) => commands::tune::run(&mut run, a)?,
        Command::Simulate(a) => commands::simulate::run(&mut run, a)?,
        Command::Bode(a) => commands::bode::run(&mut run, a)?,
        Command::Generate(a) => commands::generate::run(&mut run, a)?,
    }
    run.write_resolved_config()?;
    Ok(run)
}

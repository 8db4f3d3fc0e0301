//! Command-line driver: computes joint spectra, labellings, invariants, the
//! polygon and the DH profile, and writes them as CSV and JSON.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use semitoric::ErrorClass;

#[derive(Debug, Parser)]
#[command(name = "semitoric", version, about = "Spectral recovery of semitoric invariants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Joint spectrum per k, as CSV.
    Spectrum,
    /// Column labelling glued into one global labelling per k.
    Label,
    /// Focus-focus value, Taylor invariants and convergence figures.
    Invariants,
    /// Polygon from the labelled spectrum and its Hausdorff distance to theory.
    Polygon,
    /// Duistermaat-Heckman profile of J and its kinks.
    Dh,
    /// Random synthetic chart, labelled and compared with ground truth.
    Synth,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Opts {
    /// spin or coupled
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub r1: Option<f64>,
    #[arg(long, global = true)]
    pub r2: Option<f64>,
    #[arg(long, global = true)]
    pub t: Option<f64>,
    /// Semiclassical levels, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub k: Vec<u32>,
    /// Expand the first --k into the schedule k, 2k, ... up to this value.
    #[arg(long, global = true)]
    pub k_max: Option<u32>,
    /// Probe offsets from the focus-focus value, strictly decreasing.
    #[arg(long, global = true, value_delimiter = ',')]
    pub x: Vec<f64>,
    /// Probe slopes; the first drives g_mu, the second the mixed derivative.
    #[arg(long, global = true, value_delimiter = ',')]
    pub mu: Vec<f64>,
    /// Counting window exponent: strips of width c hbar^delta.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// synth: generate a half-lattice chart.
    #[arg(long, global = true)]
    pub half: bool,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(semitoric::Error),
}

impl From<semitoric::Error> for CliError {
    fn from(e: semitoric::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e.class() {
                ErrorClass::Configuration => 2,
                ErrorClass::Numerical => 3,
                ErrorClass::Labelling => 4,
                ErrorClass::Io => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = config::resolve(&cli.command, &cli.opts)?;
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", cfg.output_dir.display())))?;
    let result = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Label => commands::label(&cfg),
        Command::Invariants => commands::invariants(&cfg),
        Command::Polygon => commands::polygon(&cfg),
        Command::Dh => commands::dh(&cfg),
        Command::Synth => commands::synth(&cfg),
    };
    result?;
    let path = cfg.output_dir.join("config.json");
    let text = serde_json::to_string_pretty(&cfg).expect("config serialises") + "\n";
    std::fs::write(&path, text).map_err(|e| CliError::Core(e.into()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

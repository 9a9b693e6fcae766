//! Command-line front end.
//!
//! Every flag may also be given in a JSON config file (`--config`), using the
//! flag name with dashes turned into underscores. Flags win over the file.
//! Exit status is 0 on success, 2 for configuration errors and 3 for bad or
//! missing input data.

pub mod commands;
pub mod config;
pub mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use config::{RunConfig, Settings, WeightMode, CALIBRATION_ENV};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

impl From<Toggle> for bool {
    fn from(t: Toggle) -> bool {
        matches!(t, Toggle::On)
    }
}

#[derive(Debug, Parser)]
#[command(name = "surface-lab", version, about = "Surface-code memory and XEB experiments on a simulated device")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON file with default values for any of the flags below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[arg(long, global = true)]
    pub calibration: Option<PathBuf>,
    #[arg(long, global = true)]
    pub distance: Option<usize>,
    /// z or x.
    #[arg(long, global = true)]
    pub basis: Option<String>,
    /// Cycles to run; `analyze` sweeps 1 through this value.
    #[arg(long, global = true)]
    pub cycles: Option<usize>,
    #[arg(long, global = true)]
    pub shots: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// frame, tableau or statevector.
    #[arg(long, global = true)]
    pub engine: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub noise: Option<Toggle>,
    #[arg(long, global = true, value_enum)]
    pub gate_noise: Option<Toggle>,
    #[arg(long, global = true, value_enum)]
    pub idle_noise: Option<Toggle>,
    #[arg(long, global = true, value_enum)]
    pub readout_noise: Option<Toggle>,
    /// average_infidelity or pauli_error.
    #[arg(long, global = true)]
    pub convention: Option<String>,
    /// Post-selection: none, data, ancilla or both.
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    /// wald or wilson.
    #[arg(long, global = true)]
    pub error_bar: Option<String>,
    /// Matching weights: calibration, correlation or uniform.
    #[arg(long, global = true)]
    pub weights: Option<String>,
    /// XEB samples per circuit.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// XEB noise trajectories per circuit.
    #[arg(long, global = true)]
    pub trajectories: Option<usize>,
    /// Number of XEB circuits, seeded seed, seed+1, ...
    #[arg(long, global = true)]
    pub xeb_seeds: Option<usize>,
    #[arg(short, long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Command {
    /// Print or write the code layout as JSON.
    Layout,
    /// Run a memory experiment and write the shot file.
    Simulate,
    /// Detection-event fractions and correlations of a simulation directory.
    Detect,
    /// Decode a simulation directory with minimum-weight matching.
    Decode,
    /// Fidelity curves, fits and lifetimes over cycles 1..=N.
    Analyze,
    /// Cross-entropy benchmarking of random circuits.
    Xeb,
    /// Fit (k, fidelity) points from a CSV file.
    Fit,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Layout => "layout",
            Command::Simulate => "simulate",
            Command::Detect => "detect",
            Command::Decode => "decode",
            Command::Analyze => "analyze",
            Command::Xeb => "xeb",
            Command::Fit => "fit",
        }
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(v: &Option<String>) -> Result<Option<T>> {
    v.as_deref().map(str::parse).transpose()
}

fn parse_json<T: serde::de::DeserializeOwned>(what: &str, v: &Option<String>) -> Result<Option<T>> {
    v.as_deref()
        .map(|s| {
            serde_json::from_value(serde_json::Value::String(s.to_string()))
                .map_err(|_| Error::invalid(format!("unknown {what} {s:?}")))
        })
        .transpose()
}

impl Cli {
    fn flags(&self) -> Result<RunConfig> {
        Ok(RunConfig {
            calibration: self.calibration.clone(),
            distance: self.distance,
            basis: parse(&self.basis)?,
            cycles: self.cycles,
            shots: self.shots,
            seed: self.seed,
            engine: parse(&self.engine)?,
            noise: self.noise.map(bool::from),
            gate_noise: self.gate_noise.map(bool::from),
            idle_noise: self.idle_noise.map(bool::from),
            readout_noise: self.readout_noise.map(bool::from),
            convention: parse_json("convention", &self.convention)?,
            scheme: parse(&self.scheme)?,
            error_bar: parse_json("error bar", &self.error_bar)?,
            weights: parse::<WeightMode>(&self.weights)?,
            samples: self.samples,
            trajectories: self.trajectories,
            xeb_seeds: self.xeb_seeds,
            input: self.input.clone(),
            out: self.out.clone(),
        })
    }

    pub fn settings(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let env = std::env::var_os(CALIBRATION_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        Settings::resolve(self.command.name(), self.flags()?.over(file), env)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::invalid("--workers must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    }
    let s = cli.settings()?;
    log::info!("{} with {:?}", s.command, s);
    match cli.command {
        Command::Layout => commands::layout(&s),
        Command::Simulate => commands::simulate(&s),
        Command::Detect => commands::detect(&s),
        Command::Decode => commands::decode(&s),
        Command::Analyze => commands::analyze(&s),
        Command::Xeb => commands::xeb(&s),
        Command::Fit => commands::fit(&s),
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_data_error() {
        EXIT_DATA
    } else {
        EXIT_CONFIG
    }
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

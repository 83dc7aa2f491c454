//! `ghzsim` command-line front end.

mod commands;
mod config;
mod units;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ghzsim::experiments::Axis;
use ghzsim::observables::Observable;
use ghzsim::pulses::ScheduleKind;
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigFile, Flags, OutputFormat, Preset, RawValue, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ghzsim::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
            CliError::Usage(_) => "usage",
        }
    }

    /// The reader closed stdout (e.g. `| head`); not worth reporting.
    fn is_broken_pipe(&self) -> bool {
        let kind = match self {
            CliError::Io(e) => Some(e.kind()),
            CliError::Json(e) => e.io_error_kind(),
            CliError::Core(ghzsim::Error::Io(e)) => Some(e.kind()),
            _ => None,
        };
        kind == Some(std::io::ErrorKind::BrokenPipe)
    }

    fn to_json(&self) -> serde_json::Value {
        let mut err = json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::Core(ghzsim::Error::InvalidParams(v)) = self {
            err["violations"] = json!(v);
        }
        json!({ "error": err })
    }
}

#[derive(Parser)]
#[command(name = "ghzsim", version, about = "GHZ-state generation in fiber-coupled cavities")]
struct Cli {
    /// Worker threads for sweeps (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand. Parameters accept plain numbers in
/// units of g or physical values such as "2pi*750 MHz", "1.52e5 Hz",
/// "100 ns" or "45 deg".
#[derive(Args, Debug, Default)]
struct Common {
    /// JSON configuration file; flags take precedence over it.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t0_frac: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tc_frac: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tf: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    kappa_c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    kappa_f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    n_atoms: Option<String>,
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<ScheduleKind>,
    /// Use the open-system basis with decay channels.
    #[arg(long, conflicts_with = "closed")]
    open: bool,
    #[arg(long)]
    closed: bool,
    #[arg(long)]
    steps: Option<usize>,
    /// Write every n-th step of a trajectory.
    #[arg(long)]
    record_every: Option<usize>,
    /// Comma-separated: pop:phi1, pop:phiLast, pop:bright, fidelity, leakage.
    #[arg(long, value_delimiter = ',', value_parser = parse_observable)]
    observables: Option<Vec<Observable>>,
    /// Output directory for files.
    #[arg(long, env = "GHZSIM_OUT")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn parse_schedule(s: &str) -> Result<ScheduleKind, String> {
    s.parse().map_err(|e: ghzsim::Error| e.to_string())
}

fn parse_observable(s: &str) -> Result<Observable, String> {
    s.trim().parse().map_err(|e: ghzsim::Error| e.to_string())
}

impl Common {
    fn flags(&self) -> Flags {
        let pairs = [
            ("g", &self.g),
            ("v", &self.v),
            ("omega0", &self.omega0),
            ("t0_frac", &self.t0_frac),
            ("tc_frac", &self.tc_frac),
            ("tf", &self.tf),
            ("delta", &self.delta),
            ("alpha", &self.alpha),
            ("gamma", &self.gamma),
            ("kappa_c", &self.kappa_c),
            ("kappa_f", &self.kappa_f),
            ("n_atoms", &self.n_atoms),
        ];
        let params: BTreeMap<String, RawValue> = pairs
            .into_iter()
            .filter_map(|(k, v)| {
                let v = v.as_ref()?;
                let raw = v.trim().parse::<f64>().map(RawValue::Number).unwrap_or_else(|_| RawValue::Text(v.clone()));
                Some((k.to_string(), raw))
            })
            .collect();
        let open = match (self.open, self.closed) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        };
        Flags {
            preset: self.preset,
            params,
            schedule: self.schedule,
            open,
            steps: self.steps,
            record_every: self.record_every,
            observables: self.observables.clone(),
            output_dir: self.out.clone(),
            format: self.format,
        }
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Ok(config::resolve(file, self.flags())?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the basis states in canonical order as JSON.
    Basis(Common),
    /// Print the coupling and detuning Hamiltonians (and the laser term at
    /// --time) as dense JSON matrices.
    Hamiltonian {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        time: Option<f64>,
    },
    /// Compare the closed-form and numerical spectra of the coupling
    /// Hamiltonian.
    Eigen(Common),
    /// Tabulate a pulse schedule.
    Pulses {
        #[command(flatten)]
        common: Common,
        /// Same as --schedule.
        #[arg(long, value_parser = parse_schedule, conflicts_with = "schedule")]
        kind: Option<ScheduleKind>,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Evolve one configuration and write observables along the trajectory.
    Simulate(Common),
    /// Run a registered scenario.
    Scenario {
        name: Option<String>,
        #[command(flatten)]
        common: Common,
        /// List the registered scenarios.
        #[arg(long)]
        list: bool,
        /// Points per resampled axis.
        #[arg(long)]
        points: Option<usize>,
        /// Replace an axis range: name=lo:hi (repeatable).
        #[arg(long = "range", value_parser = commands::parse_range, allow_hyphen_values = true)]
        ranges: Vec<(String, (f64, f64))>,
        /// Run on the calling thread only.
        #[arg(long)]
        serial: bool,
    },
    /// Sweep up to two axes over the configured operating point.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// name=lo:hi:n or name=a,b,c (repeatable).
        #[arg(long = "axis", value_parser = commands::parse_axis, allow_hyphen_values = true)]
        axes: Vec<Axis>,
        /// Sweep each axis separately instead of on a grid.
        #[arg(long)]
        lines: bool,
        /// File-name prefix.
        #[arg(long, default_value = "sweep")]
        name: String,
        #[arg(long)]
        serial: bool,
    },
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    match cli.command {
        Command::Basis(c) => commands::basis(&c.resolve()?, out),
        Command::Hamiltonian { common, time } => commands::hamiltonian(&common.resolve()?, time, out),
        Command::Eigen(c) => commands::eigen(&c.resolve()?, out),
        Command::Pulses { common, kind, points } => {
            let mut cfg = common.resolve()?;
            cfg.schedule = kind.or(cfg.schedule);
            commands::pulses(&cfg, points, out)
        }
        Command::Simulate(c) => commands::simulate(&c.resolve()?, out),
        Command::Scenario { name, common, list, points, ranges, serial } => {
            let args = commands::ScenarioArgs { name, list, points, ranges, serial };
            commands::run_registered(&common.resolve()?, args, out)
        }
        Command::Sweep { common, axes, lines, name, serial } => {
            commands::sweep(&common.resolve()?, commands::SweepArgs { name, axes, lines, serial }, out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}

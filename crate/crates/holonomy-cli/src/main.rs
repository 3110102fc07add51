//! Experiment runner for the holonomic trapped-ion gate simulator.
//!
//! One subcommand per experiment; a TOML config file supplies defaults and
//! command-line flags override individual fields. Exit codes: 0 success,
//! 2 validation error, 3 numerical failure.

mod config;
mod experiments;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{Experiment, LoopShape, Orientation, RunConfig};
use experiments::{describe_outputs, execute, RunError};
use holonomy::model::GateKind;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "holonomy",
    about = "Simulate and verify holonomic (geometric) trapped-ion quantum gates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct CommonArgs {
    /// TOML run-configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for result files.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Check the configuration and exit without running.
    #[arg(long, global = true)]
    validate_only: bool,
    /// Worker threads for sweep fan-out (0 = all processors).
    #[arg(long, global = true)]
    parallel: Option<usize>,
    /// Random seed for Haar-random synthesis targets.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit static SVG plots for sweep experiments.
    #[arg(long, global = true)]
    plot: bool,
    /// Gate kind: u1, u2 or u3.
    #[arg(long, value_parser = parse_gate)]
    gate: Option<GateKind>,
    /// Loop shape: latitude or sector.
    #[arg(long, value_parser = parse_shape)]
    shape: Option<String>,
    /// Sweep latitude theta0 (rad).
    #[arg(long)]
    theta0: Option<f64>,
    /// Longitude span for sector loops (rad).
    #[arg(long)]
    phi_span: Option<f64>,
    /// Fraction of the loop spent in each theta ramp.
    #[arg(long)]
    ramp_fraction: Option<f64>,
    /// Traverse the loop backwards.
    #[arg(long)]
    reversed: bool,
    /// Overall Rabi magnitude Omega (rad/s).
    #[arg(long)]
    omega_scale: Option<f64>,
    /// Dimensionless gap * T product for single runs.
    #[arg(long)]
    omega_t: Option<f64>,
    /// Integration steps (0 = automatic from steps-per-unit).
    #[arg(long)]
    steps: Option<usize>,
    /// Wilson-line oracle resolution.
    #[arg(long)]
    oracle_steps: Option<usize>,
    /// Lamb-Dicke parameter for the two-ion gate.
    #[arg(long)]
    eta: Option<f64>,
    /// Additional detuning for the two-ion gate (rad/s).
    #[arg(long)]
    delta: Option<f64>,
    /// U1 phase for circuit/non-abelian experiments (rad).
    #[arg(long)]
    phi1: Option<f64>,
    /// U2 phase (rad).
    #[arg(long)]
    phi2: Option<f64>,
    /// Number of Haar-random synthesis targets.
    #[arg(long)]
    n_haar_targets: Option<usize>,
    /// Ascending gap * T list for sweeps (comma-separated).
    #[arg(long, value_delimiter = ',')]
    omega_t_list: Option<Vec<f64>>,
}

fn parse_gate(s: &str) -> Result<GateKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "u1" => Ok(GateKind::U1),
        "u2" => Ok(GateKind::U2),
        "u3" => Ok(GateKind::U3),
        other => Err(format!(
            "unknown gate kind '{other}' (expected u1, u2 or u3)"
        )),
    }
}

fn parse_shape(s: &str) -> Result<String, String> {
    match s.to_ascii_lowercase().as_str() {
        "latitude" | "sector" => Ok(s.to_ascii_lowercase()),
        other => Err(format!(
            "unknown loop shape '{other}' (expected latitude or sector)"
        )),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Drive one gate around its loop and compare phase, leakage and oracle.
    SimulateGate(CommonArgs),
    /// Sweep the traversal time and fit the leakage scaling exponent.
    SweepAdiabaticity(CommonArgs),
    /// Full report: simulated holonomy vs Wilson-line oracle vs analytic gate.
    HolonomyCompare(CommonArgs),
    /// Evaluate the closed-form decoherence/adiabaticity budgets.
    NoiseBudget(CommonArgs),
    /// Haar-random synthesis statistics and the CNOT construction.
    Circuit(CommonArgs),
    /// Order dependence of composed U1/U2 holonomies.
    NonabelianDemo(CommonArgs),
    /// Run whichever experiment the config file selects.
    Run(CommonArgs),
}

impl Command {
    fn experiment(&self) -> Option<Experiment> {
        match self {
            Command::SimulateGate(_) => Some(Experiment::SimulateGate),
            Command::SweepAdiabaticity(_) => Some(Experiment::SweepAdiabaticity),
            Command::HolonomyCompare(_) => Some(Experiment::HolonomyCompare),
            Command::NoiseBudget(_) => Some(Experiment::NoiseBudget),
            Command::Circuit(_) => Some(Experiment::Circuit),
            Command::NonabelianDemo(_) => Some(Experiment::NonabelianDemo),
            Command::Run(_) => None,
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::SimulateGate(a)
            | Command::SweepAdiabaticity(a)
            | Command::HolonomyCompare(a)
            | Command::NoiseBudget(a)
            | Command::Circuit(a)
            | Command::NonabelianDemo(a)
            | Command::Run(a) => a,
        }
    }
}

fn resolve_config(command: &Command) -> Result<RunConfig, String> {
    let args = command.args();
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(experiment) = command.experiment() {
        config.experiment = experiment;
    }
    if let Some(dir) = &args.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(parallel) = args.parallel {
        config.parallel = parallel;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.plot {
        config.plot = true;
    }
    if let Some(gate) = args.gate {
        config.gate.kind = gate;
    }
    if let Some(shape) = &args.shape {
        config.loop_section.shape = if shape == "sector" {
            LoopShape::Sector
        } else {
            LoopShape::Latitude
        };
    }
    if let Some(theta0) = args.theta0 {
        config.loop_section.theta0 = theta0;
    }
    if let Some(phi_span) = args.phi_span {
        config.loop_section.phi_span = phi_span;
    }
    if let Some(ramp) = args.ramp_fraction {
        config.loop_section.ramp_fraction = ramp;
    }
    if args.reversed {
        config.loop_section.orientation = Orientation::Reversed;
    }
    if let Some(omega_scale) = args.omega_scale {
        config.loop_section.omega_scale = omega_scale;
    }
    if let Some(omega_t) = args.omega_t {
        config.timing.omega_t = omega_t;
    }
    if let Some(steps) = args.steps {
        config.timing.steps = steps;
    }
    if let Some(oracle_steps) = args.oracle_steps {
        config.timing.oracle_steps = oracle_steps;
    }
    if let Some(eta) = args.eta {
        config.gate.eta = eta;
    }
    if let Some(delta) = args.delta {
        config.gate.delta = delta;
    }
    if let Some(phi1) = args.phi1 {
        config.phases.phi1 = phi1;
    }
    if let Some(phi2) = args.phi2 {
        config.phases.phi2 = phi2;
    }
    if let Some(n) = args.n_haar_targets {
        config.phases.n_haar_targets = n;
    }
    if let Some(list) = &args.omega_t_list {
        config.timing.omega_t_list = list.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    // Single-threaded BLAS keeps runs byte-reproducible and leaves the
    // parallelism to the sweep fan-out.
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }

    let config = match resolve_config(&cli.command) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("config error: {message}");
            return ExitCode::from(2);
        }
    };

    let errors = config.validate();
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("config error: {e}");
        }
        return ExitCode::from(2);
    }
    if cli.command.args().validate_only {
        println!("config ok: experiment = {}", config.experiment.name());
        return ExitCode::SUCCESS;
    }

    if config.parallel > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallel)
            .build_global()
        {
            eprintln!("warning: could not size thread pool: {e}");
        }
    }

    match execute(&config) {
        Ok(()) => {
            println!("{}", describe_outputs(&config));
            ExitCode::SUCCESS
        }
        Err(RunError::Validation(errors)) => {
            for e in &errors {
                eprintln!("config error: {e}");
            }
            ExitCode::from(2)
        }
        Err(RunError::Other(e)) => {
            eprintln!("error: {e:#}");
            let numerical = format!("{e:#}").contains("numerical failure");
            ExitCode::from(if numerical { 3 } else { 1 })
        }
    }
}

//! `nematic` — command-line runs of the mean-field nematic solvers.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical-invariant
//! violation.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{load_config, PotentialArgs, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config file, unusable parameters (exit 2).
    Config(String),
    /// A numerical invariant failed on otherwise valid input (exit 3).
    Invariant(String),
    /// I/O and other runtime failures (exit 1).
    Other(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
    pub fn invariant(msg: impl Into<String>) -> Self {
        CliError::Invariant(msg.into())
    }
    pub fn other(msg: impl Into<String>) -> Self {
        CliError::Other(msg.into())
    }
}

#[derive(Parser)]
#[command(
    name = "nematic",
    about = "Equilibrium solvers for mean-field nematic liquid crystals",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the linearized operator, bifurcation temperatures and
    /// the transcriticality coefficient (JSON).
    Spectrum(CommonArgs),
    /// Trace solution branches over a beta range; writes <out>.branches.csv
    /// and <out>.events.json.
    PhaseDiagram(PhaseDiagramArgs),
    /// Solve the self-consistency equation for the orientation density at one
    /// beta (JSON).
    Solve(SolveArgs),
    /// Run the low-temperature expansion verification harness (JSON).
    LaplaceCheck(CommonArgs),
    /// Metropolis estimate of the finite-N order parameter (JSON).
    Mc(McArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Potential type: maier-saupe or legendre.
    #[arg(long)]
    potential: Option<String>,
    /// Maier-Saupe coupling constant.
    #[arg(long)]
    w: Option<f64>,
    /// Legendre coefficients as "0:1.0,2:-1.0".
    #[arg(long)]
    coeffs: Option<String>,
    /// Gauss-Legendre quadrature order.
    #[arg(long)]
    quad_order: Option<usize>,
    /// Solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Picard damping in (0, 1].
    #[arg(long)]
    damping: Option<f64>,
    /// RNG seed for stochastic commands.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker pool size for beta-grid scans (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output path (prefix for phase-diagram); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Read a previously emitted run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the fully resolved configuration instead of running.
    #[arg(long)]
    emit_config: bool,
}

#[derive(Args)]
struct PhaseDiagramArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    #[arg(long)]
    beta_steps: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    beta: Option<f64>,
    /// Initial density: uniform, prolate or oblate.
    #[arg(long)]
    seed_density: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    n_particles: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
}

/// Layer command-line flags over a config file over defaults.
fn resolve_common(command: &str, args: &CommonArgs) -> Result<RunConfig, CliError> {
    let file = args.config.as_ref().map(load_config).transpose()?;
    let mut cfg = RunConfig::base(command, file)?;
    let pot_args = PotentialArgs {
        potential: args.potential.clone(),
        w: args.w,
        coeffs: args.coeffs.clone(),
    };
    if pot_args.any_given() {
        cfg.potential = pot_args.to_spec()?;
    }
    if let Some(v) = args.quad_order {
        cfg.quad_order = v;
    }
    if let Some(v) = args.tol {
        if !(v > 0.0) {
            return Err(CliError::config("--tol must be positive"));
        }
        cfg.tol = v;
    }
    if let Some(v) = args.damping {
        if !(v > 0.0 && v <= 1.0) {
            return Err(CliError::config("--damping must lie in (0, 1]"));
        }
        cfg.damping = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = &args.out {
        cfg.out = Some(v.clone());
    }
    Ok(cfg)
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Spectrum(args) => {
            let cfg = resolve_common("spectrum", args)?;
            if args.emit_config {
                println!("{}", cfg.to_json());
                return Ok(());
            }
            commands::cmd_spectrum(&cfg)
        }
        Command::PhaseDiagram(args) => {
            let mut cfg = resolve_common("phase-diagram", &args.common)?;
            if let Some(v) = args.beta_min {
                cfg.beta_min = Some(v);
            }
            if let Some(v) = args.beta_max {
                cfg.beta_max = Some(v);
            }
            if let Some(v) = args.beta_steps {
                cfg.beta_steps = Some(v);
            }
            if args.common.emit_config {
                println!("{}", cfg.to_json());
                return Ok(());
            }
            commands::cmd_phase_diagram(&cfg)
        }
        Command::Solve(args) => {
            let mut cfg = resolve_common("solve", &args.common)?;
            if let Some(v) = args.beta {
                cfg.beta = Some(v);
            }
            if let Some(v) = &args.seed_density {
                cfg.seed_density = Some(v.clone());
            }
            if let Some(v) = args.max_iter {
                cfg.max_iter = Some(v);
            }
            if args.common.emit_config {
                println!("{}", cfg.to_json());
                return Ok(());
            }
            commands::cmd_solve(&cfg)
        }
        Command::LaplaceCheck(args) => {
            let cfg = resolve_common("laplace-check", args)?;
            if args.emit_config {
                println!("{}", cfg.to_json());
                return Ok(());
            }
            commands::cmd_laplace_check(&cfg)
        }
        Command::Mc(args) => {
            let mut cfg = resolve_common("mc", &args.common)?;
            if let Some(v) = args.beta {
                cfg.beta = Some(v);
            }
            if let Some(v) = args.n_particles {
                cfg.n_particles = Some(v);
            }
            if let Some(v) = args.sweeps {
                cfg.sweeps = Some(v);
            }
            if let Some(v) = args.burnin {
                cfg.burnin = Some(v);
            }
            if args.common.emit_config {
                println!("{}", cfg.to_json());
                return Ok(());
            }
            commands::cmd_mc(&cfg)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Invariant(msg)) => {
            eprintln!("numerical invariant violated: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

//! Command-line front end: every verification and solve in the library as a
//! reproducible command with JSON configs, flag overrides, and
//! machine-readable output.
//!
//! Exit codes: 0 success, 1 invariant breach, 2 non-convergence,
//! 3 regime rejection, 4 config error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{
    load_config, override_field, BasisCheckConfig, CriticalIntervalConfig, DispersiveScanConfig,
    StrichartzScanConfig,
};
use output::{ensure_dir, resolve_out_dir};

#[derive(Debug)]
pub enum CliError {
    /// Exit 1: a certified inequality or residual bound failed.
    Invariant(String),
    /// Exit 2: an iteration or search exhausted its budget.
    NonConvergence(String),
    /// Exit 3: the requested regime is out of the supported range.
    Regime(String),
    /// Exit 4: unusable configuration or input document.
    Config(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::NonConvergence(_) => 2,
            CliError::Regime(_) => 3,
            CliError::Config(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invariant(m)
            | CliError::NonConvergence(m)
            | CliError::Regime(m)
            | CliError::Config(m) => m,
        }
    }
}

/// Spectral diagnostics and NLS solves for the Ornstein-Uhlenbeck
/// Schrödinger group.
#[derive(Parser)]
#[command(name = "ou-spectral", version, about)]
struct Cli {
    /// Output directory (default: $OU_SPECTRAL_OUTDIR or ./ou-spectral-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Row output format for scans.
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the basis invariant suite: orthonormality, eigenrelation,
    /// quadrature moments, transform round trip.
    BasisCheck(BasisCheckArgs),
    /// Scan the normalized weighted dispersive ratio over an ensemble.
    DispersiveScan(DispersiveArgs),
    /// Scan homogeneous Strichartz quotients over an admissible-pair family.
    StrichartzScan(StrichartzArgs),
    /// Solve the nonlinear equation from a JSON problem document.
    NlsSolve(NlsArgs),
    /// Search the critical smallness interval for a problem document.
    CriticalInterval(CriticalArgs),
}

#[derive(Args)]
struct BasisCheckArgs {
    /// JSON config document; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    nodes_per_axis: Option<usize>,
}

#[derive(Args)]
struct DispersiveArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    nodes_per_axis: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// random-coefficient | gaussian-bump | hermite-mode
    #[arg(long)]
    profile: Option<String>,
    /// Mode order for --profile hermite-mode.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_nodes: Option<usize>,
    /// Re-run at doubled nodes_per_axis and record the delta.
    #[arg(long)]
    refine: bool,
}

#[derive(Args)]
struct StrichartzArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    nodes_per_axis: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of admissible pairs sampled from the sharp line.
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    time_nodes: Option<usize>,
    /// Double degree, nodes and time resolution; appends the delta column.
    #[arg(long)]
    refine: bool,
}

#[derive(Args)]
struct NlsArgs {
    /// JSON problem document (see configs/ for bundled examples).
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    /// Pick the interval by the smallness search (critical regime).
    #[arg(long)]
    auto_interval: bool,
}

#[derive(Args)]
struct CriticalArgs {
    /// JSON problem document providing the datum and the power.
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    time_nodes: Option<usize>,
    #[arg(long)]
    n_max: Option<u32>,
}

fn load_problem(path: &PathBuf) -> Result<ou_spectral::NlsProblemDoc, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ou_spectral::NlsProblemDoc::from_json_slice(&bytes)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let out = resolve_out_dir(cli.out);
    ensure_dir(&out)?;
    match cli.command {
        Command::BasisCheck(args) => {
            let mut cfg: BasisCheckConfig = load_config(args.config.as_deref())?;
            override_field!(cfg.dimension, args.dimension);
            override_field!(cfg.max_degree, args.max_degree);
            override_field!(cfg.nodes_per_axis, args.nodes_per_axis);
            commands::basis_check(&cfg, &out)
        }
        Command::DispersiveScan(args) => {
            let mut cfg: DispersiveScanConfig = load_config(args.config.as_deref())?;
            override_field!(cfg.dimension, args.dimension);
            override_field!(cfg.max_degree, args.max_degree);
            override_field!(cfg.nodes_per_axis, args.nodes_per_axis);
            override_field!(cfg.count, args.count);
            override_field!(cfg.seed, args.seed);
            override_field!(cfg.profile, args.profile);
            override_field!(cfg.k, args.k);
            override_field!(cfg.t_min, args.t_min);
            override_field!(cfg.t_max, args.t_max);
            override_field!(cfg.t_nodes, args.t_nodes);
            cfg.refine |= args.refine;
            commands::dispersive(&cfg, &out, &cli.format)
        }
        Command::StrichartzScan(args) => {
            let mut cfg: StrichartzScanConfig = load_config(args.config.as_deref())?;
            override_field!(cfg.dimension, args.dimension);
            override_field!(cfg.max_degree, args.max_degree);
            override_field!(cfg.nodes_per_axis, args.nodes_per_axis);
            override_field!(cfg.count, args.count);
            override_field!(cfg.seed, args.seed);
            override_field!(cfg.pairs, args.pairs);
            override_field!(cfg.time_nodes, args.time_nodes);
            cfg.refine |= args.refine;
            commands::strichartz(&cfg, &out, &cli.format)
        }
        Command::NlsSolve(args) => {
            let mut doc = load_problem(&args.problem)?;
            override_field!(doc.tol, args.tol);
            override_field!(doc.max_iter, args.max_iter);
            if args.eta.is_some() {
                doc.eta = args.eta;
            }
            doc.auto_interval |= args.auto_interval;
            commands::nls_solve(&doc, &out)
        }
        Command::CriticalInterval(args) => {
            let doc = load_problem(&args.problem)?;
            let mut cfg: CriticalIntervalConfig = load_config(args.config.as_deref())?;
            override_field!(cfg.eta, args.eta);
            override_field!(cfg.time_nodes, args.time_nodes);
            override_field!(cfg.n_max, args.n_max);
            commands::critical_interval(&doc, &cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

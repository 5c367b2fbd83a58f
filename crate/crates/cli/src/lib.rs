//! Command-line driver for the abcd-Boussinesq experiments.
//!
//! Every subcommand accepts the same flags; they override the values of an
//! optional TOML file given with `--config` (see [`config`] for its keys).
//! Exit codes: 0 on success, 1 on invalid input or I/O failure, 2 when a
//! `simulate` run is stopped by a blow-up.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod suite;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{DtSetting, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "abcd", version, about = "Finite-volume experiments for abcd-Boussinesq systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// March one case and write field snapshots.
    Simulate(Flags),
    /// Error and rate table over a halving ladder of meshes.
    Converge(Flags),
    /// Head-on collision of two solitary waves with crest tracking.
    Collide(Flags),
    /// Long run of a single wave; crest position and amplitude errors.
    Longtime(Flags),
    /// Energy drift of the linear scheme.
    LinearEnergy(Flags),
    /// One-step defect of the exact solution under mesh halving.
    Consistency(Flags),
    /// Randomised check of the discrete calculus identities.
    Identities(Flags),
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    /// TOML file with default values for the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name: A..F, longtime-B, longtime-C, longtime-F, G, H, I, I-long, J, linear.
    #[arg(long)]
    case: Option<String>,
    /// Coefficients "a,b,c,d" (fractions allowed); must match the case.
    #[arg(long)]
    abcd: Option<String>,
    /// Domain length.
    #[arg(long = "L")]
    length: Option<f64>,
    /// Left end of the domain.
    #[arg(long)]
    origin: Option<f64>,
    /// Number of cells, a power of two.
    #[arg(long = "J")]
    cells: Option<usize>,
    /// Cell width (alternative to --J).
    #[arg(long)]
    dx: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    t_final: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// "adaptive", "dx", "dx2" or a fixed step.
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    cfl_safety: Option<f64>,
    /// Upper bound on the adaptive step.
    #[arg(long)]
    dt_cap: Option<f64>,
    /// "off", "adaptive" or "fixed".
    #[arg(long)]
    rusanov: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tau1: Option<f64>,
    #[arg(long)]
    tau2: Option<f64>,
    /// Distance from the centre to each crest of a colliding pair.
    #[arg(long)]
    half_separation: Option<f64>,
    /// Gauss-Legendre points per cell for cell averages.
    #[arg(long)]
    quadrature: Option<usize>,
    #[arg(long)]
    blowup_threshold: Option<f64>,
    /// "from:to" (doubling) or a comma-separated list of cell counts.
    #[arg(long)]
    ladder: Option<String>,
    /// Number of evenly spaced snapshots.
    #[arg(long)]
    snapshots: Option<usize>,
    /// Write a snapshot after every step (simulate).
    #[arg(long)]
    every_step: bool,
    /// Output directory (default: $ABCD_OUTPUT_DIR, else ./output).
    #[arg(long = "out")]
    output_dir: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    /// Cell counts for the identity suite, e.g. "8,64,1024".
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Flags {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let dt = self.dt.map(|s| match s.trim().parse::<f64>() {
            Ok(v) => DtSetting::Number(v),
            Err(_) => DtSetting::Text(s),
        });
        let over = RunConfig {
            case: self.case,
            abcd: self.abcd,
            origin: self.origin,
            length: self.length,
            cells: self.cells,
            dx: self.dx,
            t_final: self.t_final,
            theta: self.theta,
            dt,
            cfl_safety: self.cfl_safety,
            dt_cap: self.dt_cap,
            rusanov: self.rusanov,
            alpha: self.alpha,
            tau1: self.tau1,
            tau2: self.tau2,
            half_separation: self.half_separation,
            quadrature: self.quadrature,
            blowup_threshold: self.blowup_threshold,
            ladder: self.ladder,
            snapshots: self.snapshots,
            every_step: self.every_step.then_some(true),
            output_dir: self.output_dir,
            samples: self.samples,
            sizes: self.sizes,
            seed: self.seed,
        };
        Ok(base.merged(over))
    }
}

fn describe(err: &CliError) -> String {
    match err {
        CliError::Core(abcd_core::Error::CflViolation { .. }) => {
            format!("{err}; lower --dt or use --dt adaptive")
        }
        _ => err.to_string(),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (name, flags) = match cli.command {
        Command::Simulate(f) => ("simulate", f),
        Command::Converge(f) => ("converge", f),
        Command::Collide(f) => ("collide", f),
        Command::Longtime(f) => ("longtime", f),
        Command::LinearEnergy(f) => ("linear-energy", f),
        Command::Consistency(f) => ("consistency", f),
        Command::Identities(f) => ("identities", f),
    };
    let result = flags.into_config().and_then(|cfg| commands::dispatch(name, &cfg));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            1
        }
    }
}

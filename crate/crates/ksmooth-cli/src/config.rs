//! Command line schema and option validation.
//!
//! `clap` handles the surface syntax; the `validated_*` helpers enforce the
//! numeric preconditions (coverage fraction in (0, 1], positive sizes) and
//! translate name lists into engine types, returning [`CliError::Config`]
//! so violations exit with code 2.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ksmooth::{Estimator, KernelKind};

use crate::{CliError, CliResult};

/// Fast kernel smoothing: density estimation, kernel regression, and a
/// fast-versus-naive benchmark harness.
#[derive(Debug, Parser)]
#[command(name = "ksmooth", version, about)]
pub struct Cli {
    /// Which command to run.
    #[command(subcommand)]
    pub command: Command,
}

/// The three subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the sample density on a fitted grid.
    Density(RunArgs),
    /// Fit kernel regressions (Nadaraya-Watson and locally linear) of y on x.
    Regress(RunArgs),
    /// Time the fast engine against the naive oracle on synthetic data.
    Bench(BenchArgs),
}

/// Engine selection: the fast sliding engine, the naive oracle, or both
/// (which adds naive and relative-error columns to the output).
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineChoice {
    /// Fast sum-updating engine only.
    Fast,
    /// Naive direct-summation oracle only.
    Naive,
    /// Both engines, with per-point relative errors.
    Both,
}

/// On/off switch rendered as explicit words on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    /// Enabled.
    On,
    /// Disabled.
    Off,
}

impl Switch {
    /// The switch as a plain boolean.
    pub fn is_on(self) -> bool {
        matches!(self, Switch::On)
    }
}

/// Options shared by `density` and `regress`.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Input sample CSV: header x1..xd with an optional y column.
    #[arg(long)]
    pub input: PathBuf,

    /// Output CSV path.
    #[arg(long)]
    pub output: PathBuf,

    /// Optional query-point CSV (header x1..xd); estimates are interpolated
    /// from the grid to these points instead of reporting the grid itself.
    #[arg(long)]
    pub query: Option<PathBuf>,

    /// Estimators to compute: kde, nw, loclin (comma separated or repeated).
    /// Defaults to kde for density and nw,loclin for regress.
    #[arg(long, value_delimiter = ',')]
    pub estimator: Vec<String>,

    /// Kernel name. The univariate fast engine supports any kernel with an
    /// exact sliding decomposition; the multivariate fast engine is fixed to
    /// the additive epanechnikov kernel; the naive engine supports all ten.
    #[arg(long, default_value = "epanechnikov")]
    pub kernel: String,

    /// Coverage fraction p in (0, 1]: each window holds about p·N sample
    /// points (split across axes in the multivariate case).
    #[arg(long, default_value_t = 0.15)]
    pub bandwidth_fraction: f64,

    /// Target number of grid points (the per-axis sizes are fitted to the
    /// data spread). Defaults to the sample size.
    #[arg(long)]
    pub grid_size: Option<usize>,

    /// Rotate the sample to its principal axes before gridding.
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub rotate: Switch,

    /// Use compensated (stabilized) summation in the fast engine.
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub stable_sum: Switch,

    /// Compute engine.
    #[arg(long, value_enum, default_value_t = EngineChoice::Fast)]
    pub engine: EngineChoice,
}

/// Options for `bench`.
#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Sample sizes to benchmark (comma separated or repeated).
    #[arg(long = "bench-sizes", value_delimiter = ',', default_value = "20000")]
    pub bench_sizes: Vec<usize>,

    /// Dimensions to benchmark (comma separated or repeated).
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub dims: Vec<usize>,

    /// Coverage fraction p in (0, 1].
    #[arg(long, default_value_t = 0.15)]
    pub bandwidth_fraction: f64,

    /// Kernel for the univariate rows; multivariate rows always use the
    /// additive epanechnikov kernel.
    #[arg(long, default_value = "epanechnikov")]
    pub kernel: String,

    /// Estimators to benchmark (kde, nw, loclin). Defaults to all three.
    #[arg(long, value_delimiter = ',')]
    pub estimator: Vec<String>,

    /// Rotate the sample to its principal axes before gridding.
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub rotate: Switch,

    /// Summation mode for the timed fast run; both modes are always run for
    /// the accuracy columns when the naive engine is included.
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub stable_sum: Switch,

    /// fast: time the fast engine only (no accuracy columns);
    /// naive: time the oracle only; both: time both and report accuracy.
    #[arg(long, value_enum, default_value_t = EngineChoice::Both)]
    pub engine: EngineChoice,

    /// Seed for the synthetic data generator.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Report format written to stdout. When --output is given, the file
    /// always receives the machine-readable CSV.
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,

    /// Optional path for the CSV report.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Benchmark report format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    /// Aligned human-readable table.
    Text,
    /// Machine-readable CSV.
    Csv,
}

/// Parses an estimator name list, or substitutes the per-command default
/// when the list is empty.
pub fn validated_estimators(names: &[String], default: &[Estimator]) -> CliResult<Vec<Estimator>> {
    if names.is_empty() {
        return Ok(default.to_vec());
    }
    let mut out = Vec::new();
    for name in names {
        let e = match name.as_str() {
            "kde" => Estimator::Kde,
            "nw" => Estimator::Nw,
            "loclin" => Estimator::Loclin,
            other => {
                return Err(CliError::Config(format!(
                    "unknown estimator {other:?}; expected kde, nw, or loclin"
                )))
            }
        };
        if !out.contains(&e) {
            out.push(e);
        }
    }
    Ok(out)
}

/// Parses a kernel name into the engine's kernel kind.
pub fn validated_kernel(name: &str) -> CliResult<KernelKind> {
    name.parse().map_err(CliError::Config)
}

/// Checks the coverage fraction precondition p in (0, 1].
pub fn validated_fraction(p: f64) -> CliResult<f64> {
    if p.is_finite() && p > 0.0 && p <= 1.0 {
        Ok(p)
    } else {
        Err(CliError::Config(format!(
            "--bandwidth-fraction must lie in (0, 1], got {p}"
        )))
    }
}

/// Checks grid and bench size preconditions (all at least 1).
pub fn validated_sizes(what: &str, sizes: &[usize]) -> CliResult<()> {
    if sizes.is_empty() {
        return Err(CliError::Config(format!("{what} must not be empty")));
    }
    if let Some(bad) = sizes.iter().find(|&&s| s == 0) {
        return Err(CliError::Config(format!("{what} must be positive, got {bad}")));
    }
    Ok(())
}

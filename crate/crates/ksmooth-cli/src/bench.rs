//! The fast-versus-naive benchmark on the synthetic Gaussian protocol.
//!
//! For every (dimension, sample size) pair the harness draws inputs from a
//! centered Gaussian with variance 0.6 per coordinate and responses
//! `y = Σ x_k + exp(−16 (Σ x_k)²) + noise`, builds the shared geometry with
//! about as many grid points as samples, and times the engines selected by
//! the configuration. When both engines run, the report carries worst and
//! average relative errors for the plain and the stabilized summation modes
//! side by side. Timing covers sorting, grid and bandwidth construction,
//! box precomputation, and the sweep; sample generation and I/O are never
//! timed. All work is single threaded (worker count 1).

use std::fmt::Write as _;

use ksmooth::{Estimator, KernelKind, SumPolicy};

use crate::config::EngineChoice;
use crate::pipeline::{error_stats, prepare, run_fast, run_naive, Prepared};
use crate::rng::protocol_sample;
use crate::{CliError, CliResult};

/// Benchmark configuration, independent of command line parsing.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Dimensions to run.
    pub dims: Vec<usize>,
    /// Sample sizes to run (grid size is matched to each).
    pub sizes: Vec<usize>,
    /// Coverage fraction in (0, 1].
    pub p: f64,
    /// Kernel for univariate rows; multivariate rows use the additive
    /// Epanechnikov kernel.
    pub kernel: KernelKind,
    /// Estimators to compute.
    pub estimators: Vec<Estimator>,
    /// Principal-axis rotation switch.
    pub rotate: bool,
    /// Summation mode of the timed fast run.
    pub timing_policy: SumPolicy,
    /// Which engines to run.
    pub engine: EngineChoice,
    /// Data generator seed.
    pub seed: u64,
    /// Timed repetitions per row; the minimum is reported.
    pub repeats: usize,
}

/// One benchmark row.
#[derive(Debug, Clone)]
pub struct BenchRow {
    /// Dimension.
    pub d: usize,
    /// Sample size (and approximate grid size).
    pub n: usize,
    /// Fast engine seconds (geometry plus smoothing), when run.
    pub fast_seconds: Option<f64>,
    /// Naive engine seconds (geometry plus smoothing), when run.
    pub naive_seconds: Option<f64>,
    /// Worst relative error of the plain-summation fast run.
    pub worst: Option<f64>,
    /// Worst relative error of the stabilized fast run.
    pub worst_stable: Option<f64>,
    /// Average relative error of the plain-summation fast run.
    pub avg: Option<f64>,
    /// Average relative error of the stabilized fast run.
    pub avg_stable: Option<f64>,
}

/// A full benchmark report.
#[derive(Debug, Clone)]
pub struct BenchReport {
    /// The configuration echo printed in the header.
    pub header: String,
    /// One row per (dimension, size) pair.
    pub rows: Vec<BenchRow>,
}

/// Seed for one benchmark row, derived so every (d, n) pair gets an
/// independent, reproducible stream.
fn row_seed(seed: u64, d: usize, n: usize) -> u64 {
    seed ^ ((d as u64) << 48) ^ ((n as u64) << 8)
}

/// Runs the benchmark.
///
/// # Errors
///
/// Configuration errors for kernels the requested engines cannot evaluate,
/// and engine errors surfaced from the pipeline.
pub fn run_bench(config: &BenchConfig) -> CliResult<BenchReport> {
    let repeats = config.repeats.max(1);
    let mut rows = Vec::new();
    for &d in &config.dims {
        let kernel = row_kernel(config, d)?;
        for &n in &config.sizes {
            let (inputs, outputs) = protocol_sample(row_seed(config.seed, d, n), n, d);
            let constant_h = d == 1 && crate::pipeline::needs_constant_bandwidth(kernel);
            let prep = prepare(&inputs, d, config.p, n, config.rotate, constant_h)?;

            let run_fast_timed = |prep: &Prepared, policy| -> CliResult<(f64, _)> {
                let mut best = f64::INFINITY;
                let mut last = None;
                for _ in 0..repeats {
                    let run = run_fast(prep, Some(&outputs), kernel, &config.estimators, policy)?;
                    best = best.min(run.seconds);
                    last = Some(run.result);
                }
                Ok((best, last.expect("at least one repeat")))
            };

            let mut fast_seconds = None;
            let mut naive_seconds = None;
            let (mut worst, mut worst_stable, mut avg, mut avg_stable) = (None, None, None, None);

            match config.engine {
                EngineChoice::Fast => {
                    let (secs, _) = run_fast_timed(&prep, config.timing_policy)?;
                    fast_seconds = Some(prep.seconds + secs);
                }
                EngineChoice::Naive => {
                    let mut best = f64::INFINITY;
                    for _ in 0..repeats {
                        let run = run_naive(&prep, Some(&outputs), kernel, &config.estimators)?;
                        best = best.min(run.seconds);
                    }
                    naive_seconds = Some(prep.seconds + best);
                }
                EngineChoice::Both => {
                    let (plain_secs, plain) = run_fast_timed(&prep, SumPolicy::Plain)?;
                    let (stable_secs, stable) = run_fast_timed(&prep, SumPolicy::Compensated)?;
                    let timed = match config.timing_policy {
                        SumPolicy::Plain => plain_secs,
                        SumPolicy::Compensated => stable_secs,
                    };
                    fast_seconds = Some(prep.seconds + timed);
                    let naive = run_naive(&prep, Some(&outputs), kernel, &config.estimators)?;
                    naive_seconds = Some(prep.seconds + naive.seconds);
                    let plain_stats = error_stats(&plain, &naive.result);
                    let stable_stats = error_stats(&stable, &naive.result);
                    worst = Some(plain_stats.worst);
                    worst_stable = Some(stable_stats.worst);
                    avg = Some(plain_stats.avg);
                    avg_stable = Some(stable_stats.avg);
                }
            }
            rows.push(BenchRow {
                d,
                n,
                fast_seconds,
                naive_seconds,
                worst,
                worst_stable,
                avg,
                avg_stable,
            });
        }
    }
    let header = format!(
        "protocol: gaussian inputs (variance 0.6), bump regression, noise variance 0.7\n\
         p = {}, kernel = {}, seed = {}, workers = 1, timed mode = {}",
        config.p,
        config.kernel,
        config.seed,
        match config.timing_policy {
            SumPolicy::Plain => "plain",
            SumPolicy::Compensated => "stabilized",
        },
    );
    Ok(BenchReport { header, rows })
}

/// Kernel used for a row of dimension `d`, enforcing the multivariate fast
/// path's fixed additive Epanechnikov kernel.
fn row_kernel(config: &BenchConfig, d: usize) -> CliResult<KernelKind> {
    if d >= 2 && config.engine != EngineChoice::Naive && config.kernel != KernelKind::Epanechnikov
    {
        return Err(CliError::Config(format!(
            "the multivariate fast engine evaluates the additive epanechnikov kernel; \
             --kernel {} is only available with --engine naive or in one dimension",
            config.kernel
        )));
    }
    if d >= 2 {
        Ok(KernelKind::Epanechnikov)
    } else {
        Ok(config.kernel)
    }
}

/// Formats an optional statistic for the text table.
fn cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.3e}"),
        None => "-".to_string(),
    }
}

impl BenchReport {
    /// Renders the aligned text table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header);
        out.push('\n');
        let names = [
            "d", "N", "fast_s", "naive_s", "worst", "worst_stab", "avg", "avg_stab",
        ];
        let mut table: Vec<[String; 8]> = vec![names.map(str::to_string)];
        for r in &self.rows {
            table.push([
                r.d.to_string(),
                r.n.to_string(),
                cell(r.fast_seconds),
                cell(r.naive_seconds),
                cell(r.worst),
                cell(r.worst_stable),
                cell(r.avg),
                cell(r.avg_stable),
            ]);
        }
        let widths: Vec<usize> = (0..8)
            .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
            .collect();
        for row in &table {
            for (c, value) in row.iter().enumerate() {
                if c > 0 {
                    out.push_str("  ");
                }
                let _ = write!(out, "{value:>width$}", width = widths[c]);
            }
            out.push('\n');
        }
        out
    }

    /// Renders the machine-readable CSV (full float precision).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,n,fast_s,naive_s,worst,worst_stab,avg,avg_stab\n");
        let field = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.d,
                r.n,
                field(r.fast_seconds),
                field(r.naive_seconds),
                field(r.worst),
                field(r.worst_stable),
                field(r.avg),
                field(r.avg_stable),
            );
        }
        out
    }
}

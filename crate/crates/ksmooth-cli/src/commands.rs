//! Implementations of the `density`, `regress`, and `bench` subcommands.
//!
//! `density` and `regress` share one flow: read and split the input table,
//! build the shared geometry, run the requested engines, map results back to
//! the original coordinates, and write a CSV of either the grid nodes or the
//! interpolated query points. `bench` delegates to [`crate::bench`] and
//! routes the report to stdout and the optional output file.

use ksmooth::{decompose, Estimator, KernelKind, PointStatus, SmoothResultGrid, SumPolicy};

use crate::bench::{run_bench, BenchConfig};
use crate::config::{
    validated_estimators, validated_fraction, validated_kernel, validated_sizes, BenchArgs,
    EngineChoice, ReportFormat, RunArgs,
};
use crate::io::{read_table, split_inputs, write_table, TableBuilder};
use crate::pipeline::{
    densities_to_original, grid_nodes_original, interpolate_result, needs_constant_bandwidth,
    prepare, relative_error_column, run_fast, run_naive,
};
use crate::{CliError, CliResult};

/// Runs the `density` subcommand (default estimator: kde).
pub fn cmd_density(args: &RunArgs) -> CliResult<()> {
    run_smooth(args, &[Estimator::Kde])
}

/// Runs the `regress` subcommand (default estimators: nw and loclin); the
/// input must carry a `y` column.
pub fn cmd_regress(args: &RunArgs) -> CliResult<()> {
    run_smooth(args, &[Estimator::Nw, Estimator::Loclin])
}

/// Column name of an estimator in output files.
fn estimator_column(e: Estimator) -> &'static str {
    match e {
        Estimator::Kde => "kde",
        Estimator::Nw => "nw",
        Estimator::Loclin => "loclin",
    }
}

/// Extracts one estimator's column from a result.
fn estimate_of(result: &SmoothResultGrid, e: Estimator) -> Option<&Vec<f64>> {
    match e {
        Estimator::Kde => result.density.as_ref(),
        Estimator::Nw => result.nw.as_ref(),
        Estimator::Loclin => result.loclin.as_ref(),
    }
}

/// Checks that the requested kernel/engine/dimension combination is one the
/// engines can evaluate, before any heavy work.
fn validate_kernel_choice(kernel: KernelKind, engine: EngineChoice, d: usize) -> CliResult<()> {
    if engine == EngineChoice::Naive {
        return Ok(());
    }
    if d >= 2 && kernel != KernelKind::Epanechnikov {
        return Err(CliError::Config(format!(
            "the multivariate fast engine evaluates the additive epanechnikov kernel; \
             --kernel {kernel} is only available with --engine naive or in one dimension"
        )));
    }
    if d == 1 {
        decompose(kernel)?;
    }
    Ok(())
}

fn run_smooth(args: &RunArgs, default_estimators: &[Estimator]) -> CliResult<()> {
    let estimators = validated_estimators(&args.estimator, default_estimators)?;
    let kernel = validated_kernel(&args.kernel)?;
    let p = validated_fraction(args.bandwidth_fraction)?;
    if let Some(m) = args.grid_size {
        validated_sizes("--grid-size", &[m])?;
    }

    let table = read_table(&args.input)?;
    let (coords, d, response) = split_inputs(&table);
    if d == 0 {
        return Err(CliError::Config(format!(
            "{}: no coordinate columns in header",
            args.input.display()
        )));
    }
    let needs_response = estimators.iter().any(|&e| e != Estimator::Kde);
    if needs_response && response.is_none() {
        return Err(CliError::Config(format!(
            "{}: regression estimators need a y column in the input",
            args.input.display()
        )));
    }
    validate_kernel_choice(kernel, args.engine, d)?;

    let target_m = args.grid_size.unwrap_or(table.rows());
    let constant_h =
        d == 1 && args.engine != EngineChoice::Naive && needs_constant_bandwidth(kernel);
    let prep = prepare(&coords, d, p, target_m, args.rotate.is_on(), constant_h)?;

    let policy = if args.stable_sum.is_on() {
        SumPolicy::Compensated
    } else {
        SumPolicy::Plain
    };
    let outputs = response.as_deref();
    let (mut fast, mut naive) = (None, None);
    if args.engine != EngineChoice::Naive {
        let run = run_fast(&prep, outputs, kernel, &estimators, policy)?;
        let mut result = run.result;
        densities_to_original(&prep.frame, &mut result);
        fast = Some(result);
    }
    if args.engine != EngineChoice::Fast {
        let run = run_naive(&prep, outputs, kernel, &estimators)?;
        let mut result = run.result;
        densities_to_original(&prep.frame, &mut result);
        naive = Some(result);
    }

    // Interpolate to query points, or report the grid itself.
    let (point_coords, fast, naive) = match &args.query {
        Some(query_path) => {
            let query = read_table(query_path)?;
            if query.columns.len() != d {
                return Err(CliError::Config(format!(
                    "{}: query header has {} coordinate columns, the input has {d}",
                    query_path.display(),
                    query.columns.len()
                )));
            }
            let queries_frame = prep.frame.to_frame_batch(&query.values);
            let lift = |r: Option<SmoothResultGrid>| {
                r.map(|r| interpolate_result(&prep.grid, &r, &queries_frame, d))
            };
            (query.values.clone(), lift(fast), lift(naive))
        }
        None => (grid_nodes_original(&prep), fast, naive),
    };

    let mut builder = TableBuilder::new();
    let points = point_coords.len() / d;
    for k in 0..d {
        let column: Vec<f64> = (0..points).map(|i| point_coords[i * d + k]).collect();
        builder.push(&format!("x{}", k + 1), column);
    }
    let primary = fast.as_ref().or(naive.as_ref()).expect("an engine ran");
    for &e in &estimators {
        let name = estimator_column(e);
        match (fast.as_ref(), naive.as_ref()) {
            (Some(f), Some(nv)) => {
                let fv = estimate_of(f, e).expect("estimator computed");
                let nvv = estimate_of(nv, e).expect("estimator computed");
                builder.push(name, fv.clone());
                builder.push(&format!("{name}_naive"), nvv.clone());
                builder.push(
                    &format!("{name}_relerr"),
                    relative_error_column(fv, nvv, &f.status, &nv.status),
                );
            }
            (Some(only), None) | (None, Some(only)) => {
                builder.push(name, estimate_of(only, e).expect("estimator computed").clone());
            }
            (None, None) => unreachable!("an engine ran"),
        }
    }
    builder.push(
        "status",
        primary
            .status
            .iter()
            .map(|s| match s {
                PointStatus::Ok => 0.0,
                PointStatus::SingularFallback => 1.0,
                PointStatus::EmptyWindow => 2.0,
            })
            .collect(),
    );
    write_table(&args.output, &builder.finish())
}

/// Runs the `bench` subcommand.
pub fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    let estimators = validated_estimators(
        &args.estimator,
        &[Estimator::Kde, Estimator::Nw, Estimator::Loclin],
    )?;
    let kernel = validated_kernel(&args.kernel)?;
    let p = validated_fraction(args.bandwidth_fraction)?;
    validated_sizes("--bench-sizes", &args.bench_sizes)?;
    validated_sizes("--dims", &args.dims)?;

    let config = BenchConfig {
        dims: args.dims.clone(),
        sizes: args.bench_sizes.clone(),
        p,
        kernel,
        estimators,
        rotate: args.rotate.is_on(),
        timing_policy: if args.stable_sum.is_on() {
            SumPolicy::Compensated
        } else {
            SumPolicy::Plain
        },
        engine: args.engine,
        seed: args.seed,
        repeats: 1,
    };
    let report = run_bench(&config)?;
    match args.report {
        ReportFormat::Text => print!("{}", report.to_text()),
        ReportFormat::Csv => print!("{}", report.to_csv()),
    }
    if let Some(path) = &args.output {
        std::fs::write(path, report.to_csv()).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(())
}

/// Dispatches a parsed command line.
pub fn run(cli: &crate::config::Cli) -> CliResult<()> {
    match &cli.command {
        crate::config::Command::Density(args) => cmd_density(args),
        crate::config::Command::Regress(args) => cmd_regress(args),
        crate::config::Command::Bench(args) => cmd_bench(args),
    }
}

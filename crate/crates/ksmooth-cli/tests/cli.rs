//! End-to-end tests of the `ksmooth` binary.
//!
//! Each test launches the compiled binary as a subprocess on CSV files in a
//! temporary directory and checks the produced tables, report formats, and
//! exit codes, covering the full path from command line to output file.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ksmooth_cli::io::{format_table, read_table, write_table, TableBuilder};
use ksmooth_cli::rng::SplitMix64;
use tempfile::TempDir;

/// The locally linear estimator reproduces an affine response exactly up to
/// solver rounding, and interpolating affine node values between grid nodes
/// is itself exact, so end-to-end recovery only carries rounding noise.
const AFFINE_TOL: f64 = 1e-6;

/// A kernel density estimate integrates to 1 over the whole line; the fitted
/// grid truncates the tails and the trapezoid rule adds discretization, so
/// the mass captured on the grid is allowed to run a little short or over.
const MASS_RANGE: (f64, f64) = (0.9, 1.05);

fn ksmooth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksmooth"))
        .args(args)
        .output()
        .expect("failed to launch the ksmooth binary")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn write_columns(path: &Path, columns: Vec<(&str, Vec<f64>)>) {
    let mut builder = TableBuilder::new();
    for (name, values) in columns {
        builder.push(name, values);
    }
    write_table(path, &builder.finish()).expect("write test input");
}

fn gaussian_sample(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    (0..n).map(|_| rng.normal()).collect()
}

#[test]
fn density_on_a_gaussian_sample_is_nonnegative_and_integrates_to_one() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("in.csv");
    let output = dir.path().join("out.csv");
    write_columns(&input, vec![("x1", gaussian_sample(11, 1000))]);

    // A small coverage fraction keeps the trapezoid mass near one across
    // seeds: balloon windows widen in the tails and inflate the integral
    // roughly linearly in the fraction.
    let run = ksmooth(&[
        "density",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--bandwidth-fraction",
        "0.05",
    ]);
    assert!(run.status.success(), "stderr: {}", stderr_of(&run));

    let table = read_table(&output).unwrap();
    assert_eq!(table.columns, ["x1", "kde", "status"]);
    let x = table.column(0);
    let f = table.column(1);
    assert!(f.iter().all(|&v| v >= 0.0), "negative density value");

    // The principal-axis rotation may flip the sign of a 1D grid, so order
    // the nodes by coordinate before integrating.
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mass: f64 = order
        .windows(2)
        .map(|w| 0.5 * (f[w[0]] + f[w[1]]) * (x[w[1]] - x[w[0]]))
        .sum();
    assert!(
        mass >= MASS_RANGE.0 && mass <= MASS_RANGE.1,
        "density mass {mass} outside {MASS_RANGE:?}"
    );
}

#[test]
fn regress_recovers_an_affine_surface_in_two_dimensions() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("in.csv");
    let output = dir.path().join("out.csv");
    let n = 400;
    let mut rng = SplitMix64::new(5);
    let (mut x1, mut x2, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let (a, b) = (rng.normal(), rng.normal());
        x1.push(a);
        x2.push(b);
        y.push(1.0 + 2.0 * a - 3.0 * b);
    }
    write_columns(&input, vec![("x1", x1), ("x2", x2), ("y", y)]);

    let run = ksmooth(&[
        "regress",
        "--estimator",
        "loclin",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "stderr: {}", stderr_of(&run));

    let table = read_table(&output).unwrap();
    assert_eq!(table.columns, ["x1", "x2", "loclin", "status"]);
    let mut checked = 0;
    for i in 0..table.rows() {
        let row = table.row(i);
        if row[3] != 0.0 {
            continue;
        }
        let truth = 1.0 + 2.0 * row[0] - 3.0 * row[1];
        assert!(
            (row[2] - truth).abs() <= AFFINE_TOL,
            "node ({}, {}): loclin {} but surface {}",
            row[0],
            row[1],
            row[2],
            truth
        );
        checked += 1;
    }
    assert!(checked > table.rows() / 2, "too few well-posed grid nodes");
}

#[test]
fn both_engines_add_naive_and_relative_error_columns() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("in.csv");
    let output = dir.path().join("out.csv");
    let n = 300;
    let mut rng = SplitMix64::new(21);
    let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let y: Vec<f64> = x.iter().map(|&v| v.sin() + 0.1 * rng.normal()).collect();
    write_columns(&input, vec![("x1", x), ("y", y)]);

    let run = ksmooth(&[
        "regress",
        "--estimator",
        "nw,loclin",
        "--engine",
        "both",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "stderr: {}", stderr_of(&run));

    let table = read_table(&output).unwrap();
    assert_eq!(
        table.columns,
        [
            "x1",
            "nw",
            "nw_naive",
            "nw_relerr",
            "loclin",
            "loclin_naive",
            "loclin_relerr",
            "status"
        ]
    );
    for name in ["nw_relerr", "loclin_relerr"] {
        let col = table.column(table.column_index(name).unwrap());
        let finite: Vec<f64> = col.into_iter().filter(|v| v.is_finite()).collect();
        assert!(!finite.is_empty(), "{name} has no comparable points");
        let worst = finite.iter().fold(0.0_f64, |m, &v| m.max(v));
        assert!(worst <= 1e-9, "{name} worst relative error {worst}");
    }
}

#[test]
fn output_files_round_trip_bit_exactly() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("in.csv");
    let output = dir.path().join("out.csv");
    write_columns(&input, vec![("x1", gaussian_sample(3, 200))]);

    let run = ksmooth(&[
        "density",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "stderr: {}", stderr_of(&run));

    let text = fs::read_to_string(&output).unwrap();
    let table = read_table(&output).unwrap();
    assert_eq!(
        format_table(&table),
        text,
        "re-serializing the parsed output changed its bytes"
    );
}

#[test]
fn query_interpolation_is_exact_on_affine_data() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("in.csv");
    let query = dir.path().join("query.csv");
    let output = dir.path().join("out.csv");
    let n = 400;
    let mut rng = SplitMix64::new(77);
    let x: Vec<f64> = (0..n).map(|_| 4.0 * rng.uniform() - 2.0).collect();
    let y: Vec<f64> = x.iter().map(|&v| 3.0 - 0.5 * v).collect();
    write_columns(&input, vec![("x1", x), ("y", y)]);
    let probes = vec![-1.5, -0.75, 0.0, 0.3, 1.2, 1.9];
    write_columns(&query, vec![("x1", probes.clone())]);

    let run = ksmooth(&[
        "regress",
        "--estimator",
        "loclin",
        "--input",
        input.to_str().unwrap(),
        "--query",
        query.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "stderr: {}", stderr_of(&run));

    let table = read_table(&output).unwrap();
    assert_eq!(table.columns, ["x1", "loclin", "status"]);
    assert_eq!(table.rows(), probes.len());
    for (i, &probe) in probes.iter().enumerate() {
        let row = table.row(i);
        assert_eq!(row[0], probe, "query coordinates must be echoed verbatim");
        if row[2] != 0.0 {
            continue;
        }
        let truth = 3.0 - 0.5 * probe;
        assert!(
            (row[1] - truth).abs() <= AFFINE_TOL,
            "query {probe}: interpolated {} but surface {truth}",
            row[1]
        );
    }
}

#[test]
fn missing_input_file_exits_with_io_code() {
    let dir = TempDir::new().unwrap();
    let run = ksmooth(&[
        "density",
        "--input",
        dir.path().join("absent.csv").to_str().unwrap(),
        "--output",
        dir.path().join("out.csv").to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(1), "stderr: {}", stderr_of(&run));
    assert!(stderr_of(&run).starts_with("error:"));
}

#[test]
fn malformed_row_exits_with_io_code_and_line_number() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(&input, "x1\n1.0\noops\n4.0\n").unwrap();
    let run = ksmooth(&[
        "density",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().join("out.csv").to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(1), "stderr: {}", stderr_of(&run));
    let err = stderr_of(&run);
    assert!(err.contains(":3:"), "no 1-based line number in {err:?}");
    assert!(err.contains("oops"), "offending field missing from {err:?}");
}

#[test]
fn configuration_mistakes_exit_with_usage_code() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("in.csv");
    let out = dir.path().join("out.csv");
    write_columns(
        &input,
        vec![
            ("x1", vec![0.0, 1.0, 2.0, 3.0]),
            ("x2", vec![0.0, 1.0, 0.0, 1.0]),
            ("y", vec![1.0, 2.0, 3.0, 4.0]),
        ],
    );
    let base = [
        "--input",
        input.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ];

    // Unknown estimator name.
    let mut args = vec!["density", "--estimator", "quux"];
    args.extend_from_slice(&base);
    let run = ksmooth(&args);
    assert_eq!(run.status.code(), Some(2), "stderr: {}", stderr_of(&run));
    assert!(stderr_of(&run).contains("quux"));

    // The multivariate fast engine only evaluates the additive epanechnikov
    // kernel; other kernels need --engine naive.
    let mut args = vec!["density", "--kernel", "triangular"];
    args.extend_from_slice(&base);
    let run = ksmooth(&args);
    assert_eq!(run.status.code(), Some(2), "stderr: {}", stderr_of(&run));
    assert!(stderr_of(&run).contains("epanechnikov"));

    // Regression needs a response column.
    let density_only = dir.path().join("no_y.csv");
    write_columns(&density_only, vec![("x1", vec![0.0, 1.0, 2.0, 3.0])]);
    let run = ksmooth(&[
        "regress",
        "--input",
        density_only.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2), "stderr: {}", stderr_of(&run));
    assert!(stderr_of(&run).contains("y column"));

    // Unknown flags are usage errors from the argument parser itself.
    let run = ksmooth(&["density", "--no-such-flag"]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn bench_error_columns_are_reproducible_for_a_fixed_seed() {
    let args = [
        "bench",
        "--bench-sizes",
        "300",
        "--dims",
        "1",
        "--seed",
        "9",
        "--bandwidth-fraction",
        "0.3",
        "--report",
        "csv",
    ];
    let first = ksmooth(&args);
    let second = ksmooth(&args);
    assert!(first.status.success(), "stderr: {}", stderr_of(&first));
    assert!(second.status.success(), "stderr: {}", stderr_of(&second));

    let accuracy_fields = |raw: &[u8]| -> Vec<Vec<String>> {
        let text = String::from_utf8_lossy(raw).into_owned();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("d,n,fast_s,naive_s,worst,worst_stab,avg,avg_stab"),
            "unexpected bench CSV header"
        );
        lines
            .map(|line| {
                line.split(',')
                    .skip(4)
                    .map(str::to_string)
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let a = accuracy_fields(&first.stdout);
    let b = accuracy_fields(&second.stdout);
    assert_eq!(a.len(), 1, "expected one bench row");
    assert_eq!(a, b, "error columns changed between identical runs");
    assert!(
        a[0].iter().all(|f| !f.is_empty()),
        "missing accuracy fields in {a:?}"
    );
}

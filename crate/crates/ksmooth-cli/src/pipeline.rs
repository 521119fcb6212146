//! The full smoothing pipeline shared by the run commands and the benchmark.
//!
//! [`prepare`] builds everything both engines consume: the rotated frame,
//! the evaluation grid, and per-axis balloon bandwidths. [`run_fast`] and
//! [`run_naive`] then evaluate the estimates on that shared geometry, each
//! reporting its own wall time; geometry construction time is reported
//! separately and charged to both engines, since neither can produce the
//! adaptive-bandwidth estimates without it. Timing never includes file I/O
//! or sample generation.
//!
//! Densities from both engines are per unit volume of the whitened frame;
//! [`densities_to_original`] rescales them to the caller's coordinates.

use std::time::Instant;

use ksmooth::{
    allocate_fractions, build_grid, cell_weights, decompose, fit_frame, interpolate,
    knn_bandwidth_1d, naive_smooth, smooth1d, smooth_grid, Estimator, EvalGrid, EvalSpec,
    KernelKind, MultivariateForm, PointStatus, RotatedFrame, SmoothResultGrid, SortedSample1D,
    SumPolicy,
};

use crate::CliResult;

/// Shared evaluation geometry: frame, grid, and balloon bandwidths.
#[derive(Debug)]
pub struct Prepared {
    /// Input dimension.
    pub d: usize,
    /// Sample size.
    pub n: usize,
    /// Centering, rotation, and scaling fitted to the sample.
    pub frame: RotatedFrame,
    /// Rectilinear evaluation grid in frame coordinates.
    pub grid: EvalGrid,
    /// Balloon half-widths per axis and grid coordinate, frame units.
    pub axis_bandwidths: Vec<Vec<f64>>,
    /// Row-major sample in frame coordinates.
    pub inputs_frame: Vec<f64>,
    /// Frame axis-0 coordinates in nondecreasing order.
    pub sorted_axis0: Vec<f64>,
    /// Permutation sorting the sample by frame axis 0.
    pub order0: Vec<usize>,
    /// Wall time spent building this geometry, in seconds.
    pub seconds: f64,
}

/// Builds the shared geometry: frame fit, per-axis sorts, grid, neighbor
/// allocation, and KNN bandwidths.
///
/// `constant_bandwidth_axis0` replaces the axis-0 balloon bandwidths with
/// their median, for univariate kernels whose sliding decomposition embeds
/// the bandwidth in its source factors. Axes with zero spread get unit
/// bandwidths, so their single grid coordinate sees every sample point.
///
/// # Errors
///
/// [`crate::CliError::Engine`] when the sample is degenerate or the coverage
/// fraction is infeasible for this sample size.
pub fn prepare(
    inputs: &[f64],
    d: usize,
    p: f64,
    target_m: usize,
    rotate: bool,
    constant_bandwidth_axis0: bool,
) -> CliResult<Prepared> {
    let start = Instant::now();
    let n = inputs.len() / d.max(1);
    let frame = fit_frame(inputs, d, rotate)?;
    let inputs_frame = frame.to_frame_batch(inputs);

    let mut sorted_axes: Vec<Vec<f64>> = Vec::with_capacity(d);
    for k in 0..d {
        let mut axis: Vec<f64> = (0..n).map(|i| inputs_frame[i * d + k]).collect();
        axis.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite frame coordinates"));
        sorted_axes.push(axis);
    }
    let mut order0: Vec<usize> = (0..n).collect();
    order0.sort_unstable_by(|&a, &b| {
        inputs_frame[a * d]
            .partial_cmp(&inputs_frame[b * d])
            .expect("finite frame coordinates")
    });

    let grid = build_grid(&sorted_axes, target_m, &frame.singular_values);
    let alloc = allocate_fractions(&frame.singular_values, p, n)?;

    let mut axis_bandwidths = Vec::with_capacity(d);
    for k in 0..d {
        if frame.singular_values[k] == 0.0 {
            axis_bandwidths.push(vec![1.0; grid.sizes[k]]);
            continue;
        }
        let knn = knn_bandwidth_1d(&sorted_axes[k], &grid.axes[k], alloc.neighbors[k])?;
        axis_bandwidths.push(knn.h);
    }
    if constant_bandwidth_axis0 {
        let mut sorted_h = axis_bandwidths[0].clone();
        sorted_h.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite bandwidths"));
        let median = sorted_h[sorted_h.len() / 2];
        axis_bandwidths[0] = vec![median; axis_bandwidths[0].len()];
    }

    let sorted_axis0 = sorted_axes.swap_remove(0);
    Ok(Prepared {
        d,
        n,
        frame,
        grid,
        axis_bandwidths,
        inputs_frame,
        sorted_axis0,
        order0,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// One engine's estimates plus the wall time of the smoothing pass alone.
#[derive(Debug)]
pub struct EngineRun {
    /// Estimates on the prepared grid, in frame density units.
    pub result: SmoothResultGrid,
    /// Seconds spent smoothing (geometry time not included).
    pub seconds: f64,
}

/// Runs the fast engine on the prepared geometry: the sliding univariate
/// engine in one dimension, the boxed multivariate sweep otherwise.
///
/// In one dimension any kernel with an exact sliding decomposition is
/// accepted; the multivariate path always evaluates the additive
/// Epanechnikov kernel and `kernel` must be [`KernelKind::Epanechnikov`].
///
/// # Errors
///
/// [`crate::CliError::Engine`] for kernels the fast path cannot evaluate.
pub fn run_fast(
    prep: &Prepared,
    outputs: Option<&[f64]>,
    kernel: KernelKind,
    estimators: &[Estimator],
    policy: SumPolicy,
) -> CliResult<EngineRun> {
    let start = Instant::now();
    let result = if prep.d == 1 {
        let ys = outputs.map(|ys| prep.order0.iter().map(|&i| ys[i]).collect::<Vec<f64>>());
        let sample = SortedSample1D::new(prep.sorted_axis0.clone(), ys)?;
        let r = smooth1d(
            &sample,
            &prep.grid.axes[0],
            &prep.axis_bandwidths[0],
            kernel,
            policy,
        )?;
        let want = |e: Estimator| estimators.contains(&e);
        SmoothResultGrid {
            density: want(Estimator::Kde).then_some(r.density),
            nw: want(Estimator::Nw).then_some(r.nw),
            loclin: want(Estimator::Loclin).then_some(r.loclin),
            status: r.status,
        }
    } else {
        let zeros;
        let ys = match outputs {
            Some(ys) => ys,
            None => {
                zeros = vec![0.0; prep.n];
                &zeros
            }
        };
        smooth_grid(
            &prep.inputs_frame,
            ys,
            &prep.grid,
            &prep.axis_bandwidths,
            estimators,
            policy,
        )?
    };
    Ok(EngineRun {
        result,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Multivariate kernel form the naive engine uses so that it estimates the
/// same quantity as the fast engine: the plain univariate kernel in one
/// dimension, the additive (average) form for finite-support kernels
/// otherwise. Infinite-support kernels fall back to the product form, the
/// only multivariate form defined for them.
pub fn naive_form(d: usize, kernel: KernelKind) -> MultivariateForm {
    if d >= 2 && kernel.has_finite_support() {
        MultivariateForm::Average
    } else {
        MultivariateForm::Product
    }
}

/// Runs the naive oracle on the prepared geometry.
///
/// # Errors
///
/// [`crate::CliError::Engine`] on shape or bandwidth violations.
pub fn run_naive(
    prep: &Prepared,
    outputs: Option<&[f64]>,
    kernel: KernelKind,
    estimators: &[Estimator],
) -> CliResult<EngineRun> {
    let zeros;
    let ys = match outputs {
        Some(ys) => ys,
        None => {
            zeros = vec![0.0; prep.n];
            &zeros
        }
    };
    let start = Instant::now();
    let result = naive_smooth(
        &prep.inputs_frame,
        ys,
        EvalSpec::Grid {
            grid: &prep.grid,
            axis_bandwidths: &prep.axis_bandwidths,
        },
        kernel,
        naive_form(prep.d, kernel),
        estimators,
    )?;
    Ok(EngineRun {
        result,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Rescales densities from frame volume units to original coordinates.
pub fn densities_to_original(frame: &RotatedFrame, result: &mut SmoothResultGrid) {
    if let Some(density) = result.density.as_mut() {
        let scale = frame.volume_scale();
        for v in density.iter_mut() {
            *v /= scale;
        }
    }
}

/// Grid node coordinates mapped back to the original frame, row-major
/// `total_points × d`.
pub fn grid_nodes_original(prep: &Prepared) -> Vec<f64> {
    let d = prep.d;
    let m = prep.grid.total_points();
    let mut frame_coords = vec![0.0; d];
    let mut original = vec![0.0; d];
    let mut out = Vec::with_capacity(m * d);
    for j in 0..m {
        prep.grid.node_into(j, &mut frame_coords);
        prep.frame.from_frame_into(&frame_coords, &mut original);
        out.extend_from_slice(&original);
    }
    out
}

/// Interpolates grid estimates to arbitrary frame-coordinate query points.
///
/// Each estimate column is interpolated multilinearly; a query's status is
/// the worst status among the grid corners of its cell, so degenerate
/// windows are never silently averaged away.
pub fn interpolate_result(
    grid: &EvalGrid,
    result: &SmoothResultGrid,
    queries_frame: &[f64],
    d: usize,
) -> SmoothResultGrid {
    let q = queries_frame.len() / d.max(1);
    let lift = |vals: &Option<Vec<f64>>| {
        vals.as_ref()
            .map(|v| interpolate(grid, v, queries_frame))
    };
    let mut status = Vec::with_capacity(q);
    for i in 0..q {
        let corners = cell_weights(grid, &queries_frame[i * d..(i + 1) * d]);
        let worst = corners
            .iter()
            .map(|&(idx, _)| result.status[idx])
            .max()
            .unwrap_or(PointStatus::Ok);
        status.push(worst);
    }
    SmoothResultGrid {
        density: lift(&result.density),
        nw: lift(&result.nw),
        loclin: lift(&result.loclin),
        status,
    }
}

/// Pooled relative-error statistics of a fast result against the oracle.
#[derive(Debug, Clone, Copy, Default)]
pub struct ErrorStats {
    /// Largest relative error over all compared values.
    pub worst: f64,
    /// Mean relative error over all compared values.
    pub avg: f64,
    /// Number of compared values.
    pub compared: usize,
}

/// Compares every requested estimator at every point both engines flagged
/// ok, skipping exact oracle zeros (where relative error is undefined).
pub fn error_stats(fast: &SmoothResultGrid, reference: &SmoothResultGrid) -> ErrorStats {
    let pairs = [
        (&fast.density, &reference.density),
        (&fast.nw, &reference.nw),
        (&fast.loclin, &reference.loclin),
    ];
    let mut stats = ErrorStats::default();
    let mut total = 0.0;
    for (f, r) in pairs {
        let (Some(f), Some(r)) = (f, r) else { continue };
        for j in 0..f.len() {
            if fast.status[j] != PointStatus::Ok || reference.status[j] != PointStatus::Ok {
                continue;
            }
            if r[j] == 0.0 {
                continue;
            }
            let rel = (f[j] - r[j]).abs() / r[j].abs();
            stats.worst = stats.worst.max(rel);
            total += rel;
            stats.compared += 1;
        }
    }
    if stats.compared > 0 {
        stats.avg = total / stats.compared as f64;
    }
    stats
}

/// Per-point relative errors `|fast − naive| / |naive|` for one estimate
/// column; NaN where either value is missing, the oracle value is zero, or
/// either point is degenerate.
pub fn relative_error_column(
    fast: &[f64],
    naive: &[f64],
    fast_status: &[PointStatus],
    naive_status: &[PointStatus],
) -> Vec<f64> {
    (0..fast.len())
        .map(|j| {
            if fast_status[j] != PointStatus::Ok
                || naive_status[j] != PointStatus::Ok
                || naive[j] == 0.0
            {
                f64::NAN
            } else {
                (fast[j] - naive[j]).abs() / naive[j].abs()
            }
        })
        .collect()
}

/// True when the decomposition of `kernel` requires one constant bandwidth
/// across evaluation points on the sliding path.
pub fn needs_constant_bandwidth(kernel: KernelKind) -> bool {
    decompose(kernel).map(|d| !d.supports_balloon).unwrap_or(false)
}

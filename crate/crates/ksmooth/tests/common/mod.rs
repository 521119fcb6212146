//! Shared helpers for the integration suite: a deterministic RNG, an exact
//! summation oracle, synthetic regression data, and a driver that runs the
//! whole fast multivariate pipeline from raw inputs to grid estimates.

#![allow(dead_code)]

use ksmooth::{
    allocate_fractions, build_grid, fit_frame, knn_bandwidth_1d, naive_smooth, smooth_grid,
    Estimator, EvalGrid, EvalSpec, KernelKind, MultivariateForm, PointStatus, RotatedFrame,
    SmoothResultGrid, SumPolicy,
};

/// SplitMix64 with a Box-Muller cache: deterministic, seedable, and fully
/// independent of the code under test.
pub struct TestRng {
    state: u64,
    cached_normal: Option<f64>,
}

impl TestRng {
    pub fn new(seed: u64) -> TestRng {
        TestRng {
            state: seed,
            cached_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in (0, 1]; never zero, so logarithms are safe.
    pub fn uniform(&mut self) -> f64 {
        (((self.next_u64() >> 11) + 1) as f64) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal via Box-Muller, consuming pairs of uniforms.
    pub fn normal(&mut self) -> f64 {
        if let Some(second) = self.cached_normal.take() {
            return second;
        }
        let r = (-2.0 * self.uniform().ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * self.uniform();
        self.cached_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Exact f64 summation via Shewchuk's nonoverlapping partials. The partials
/// represent the true sum exactly; the final fold over increasing magnitudes
/// is correct to well under one ulp, which is all the comparisons here need.
pub fn exact_sum(values: &[f64]) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for &value in values {
        let mut x = value;
        let mut kept = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }
    partials.iter().sum()
}

/// Distance from `x` to the next representable value away from zero.
pub fn ulp(x: f64) -> f64 {
    let a = x.abs();
    a.next_up() - a
}

/// Synthetic regression sample: inputs are i.i.d. centered normals with
/// variance 0.6 per axis; the response is the coordinate sum plus a narrow
/// Gaussian bump in that sum, with centered normal noise of variance 0.7.
pub struct TestData {
    /// Row-major N×d inputs.
    pub inputs: Vec<f64>,
    pub outputs: Vec<f64>,
}

pub fn regression_data(rng: &mut TestRng, n: usize, d: usize) -> TestData {
    let x_scale = 0.6_f64.sqrt();
    let noise_scale = 0.7_f64.sqrt();
    let mut inputs = Vec::with_capacity(n * d);
    let mut outputs = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = 0.0;
        for _ in 0..d {
            let x = x_scale * rng.normal();
            inputs.push(x);
            s += x;
        }
        outputs.push(s + (-16.0 * s * s).exp() + noise_scale * rng.normal());
    }
    TestData { inputs, outputs }
}

pub const ALL_ESTIMATORS: [Estimator; 3] = [Estimator::Kde, Estimator::Nw, Estimator::Loclin];

/// Everything the fast multivariate pipeline produced, kept around so the
/// naive oracle can be replayed on the identical geometry.
pub struct Pipeline {
    pub frame: RotatedFrame,
    pub grid: EvalGrid,
    pub axis_bandwidths: Vec<Vec<f64>>,
    /// Row-major N×d inputs in frame coordinates.
    pub inputs_frame: Vec<f64>,
    pub result: SmoothResultGrid,
}

/// Runs frame fitting, grid construction, fraction allocation, per-axis KNN
/// bandwidths, and the fast grid smoother on raw inputs.
pub fn run_fast_pipeline(
    inputs: &[f64],
    outputs: &[f64],
    d: usize,
    target_m: usize,
    p: f64,
    estimators: &[Estimator],
    policy: SumPolicy,
    rotate: bool,
) -> Pipeline {
    let n = outputs.len();
    let frame = fit_frame(inputs, d, rotate).expect("frame fit");
    let inputs_frame = frame.to_frame_batch(inputs);
    let sorted_axes: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let mut column: Vec<f64> = inputs_frame.chunks_exact(d).map(|row| row[k]).collect();
            column.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite inputs"));
            column
        })
        .collect();
    let grid = build_grid(&sorted_axes, target_m, &frame.singular_values);
    let alloc = allocate_fractions(&frame.singular_values, p, n).expect("feasible fraction");
    let mut axis_bandwidths = Vec::with_capacity(d);
    for k in 0..d {
        if frame.singular_values[k] > 0.0 {
            let knn = knn_bandwidth_1d(&sorted_axes[k], &grid.axes[k], alloc.neighbors[k])
                .expect("knn bandwidth");
            axis_bandwidths.push(knn.h);
        } else {
            // A constant axis carries no information; a fixed unit half-width
            // keeps the windows valid.
            axis_bandwidths.push(vec![1.0; grid.sizes[k]]);
        }
    }
    let result = smooth_grid(
        &inputs_frame,
        outputs,
        &grid,
        &axis_bandwidths,
        estimators,
        policy,
    )
    .expect("fast smoothing");
    Pipeline {
        frame,
        grid,
        axis_bandwidths,
        inputs_frame,
        result,
    }
}

/// Replays the naive oracle on a pipeline's exact geometry: same frame
/// coordinates, grid, and balloon bandwidths, with the average-form
/// Epanechnikov kernel the fast multivariate path implements.
pub fn run_naive_on(pipe: &Pipeline, outputs: &[f64], estimators: &[Estimator]) -> SmoothResultGrid {
    naive_smooth(
        &pipe.inputs_frame,
        outputs,
        EvalSpec::Grid {
            grid: &pipe.grid,
            axis_bandwidths: &pipe.axis_bandwidths,
        },
        KernelKind::Epanechnikov,
        MultivariateForm::Average,
        estimators,
    )
    .expect("naive smoothing")
}

/// Worst and average relative error between two result sets.
pub struct ErrorStats {
    pub worst: f64,
    pub avg: f64,
    pub compared: usize,
}

/// Relative errors |a − b| / |b| pooled over every estimator present in both
/// results, restricted to points both engines flagged ok and where the
/// reference value is nonzero.
pub fn relative_errors(fast: &SmoothResultGrid, reference: &SmoothResultGrid) -> ErrorStats {
    let mut worst = 0.0_f64;
    let mut sum = 0.0_f64;
    let mut compared = 0usize;
    let pairs = [
        (fast.density.as_ref(), reference.density.as_ref()),
        (fast.nw.as_ref(), reference.nw.as_ref()),
        (fast.loclin.as_ref(), reference.loclin.as_ref()),
    ];
    for (fast_values, reference_values) in pairs {
        let (Some(fast_values), Some(reference_values)) = (fast_values, reference_values) else {
            continue;
        };
        for j in 0..fast_values.len() {
            if fast.status[j] != PointStatus::Ok || reference.status[j] != PointStatus::Ok {
                continue;
            }
            if reference_values[j] == 0.0 {
                continue;
            }
            let rel = (fast_values[j] - reference_values[j]).abs() / reference_values[j].abs();
            worst = worst.max(rel);
            sum += rel;
            compared += 1;
        }
    }
    ErrorStats {
        worst,
        avg: if compared == 0 { 0.0 } else { sum / compared as f64 },
        compared,
    }
}

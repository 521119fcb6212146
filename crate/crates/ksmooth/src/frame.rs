//! PCA-rotated coordinate frame, rectilinear evaluation grid, and
//! multilinear interpolation.
//!
//! The multivariate engine smooths in a whitened principal-axis frame: data
//! are centered, rotated onto the eigenvectors of the sample covariance, and
//! scaled by the singular values. Grid axes are placed at sample quantiles
//! of the rotated coordinates, with per-axis grid sizes proportional to the
//! singular values so elongated directions receive more resolution; an axis
//! whose singular value vanishes (or rounds to nothing) collapses to a
//! single coordinate. Estimates computed on the grid are carried back to
//! arbitrary query points by multilinear interpolation, clamping queries
//! outside the grid hull to the boundary cell.

use crate::accumulator::{Accumulator, CompensatedSum};
use crate::error::{Error, Result};
use crate::linalg::jacobi_eigen_sym;

/// Eigenvalues below this fraction of the largest are snapped to zero, so
/// numerically rank-deficient covariances report exactly-zero singular
/// values and collapse their axes.
const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Centered, rotated, and scaled coordinate frame fitted to a sample.
///
/// `rotation` is orthogonal with columns holding the principal axes and
/// `singular_values` the corresponding square roots of the covariance
/// eigenvalues, nonincreasing when fitted with rotation; with rotation
/// disabled the rotation is the identity and the singular values are the
/// per-axis sample standard deviations in axis order.
#[derive(Debug, Clone)]
pub struct RotatedFrame {
    /// Per-dimension sample mean.
    pub mean: Vec<f64>,
    /// Row-major d×d orthogonal matrix, column k = k-th principal axis.
    pub rotation: Vec<f64>,
    /// Square roots of covariance eigenvalues (or per-axis standard
    /// deviations when fitted without rotation).
    pub singular_values: Vec<f64>,
}

impl RotatedFrame {
    /// Dimension of the frame.
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Per-axis normalization scales: the singular values with zeros
    /// replaced by 1 so degenerate axes pass through unscaled.
    pub fn scales(&self) -> Vec<f64> {
        self.singular_values
            .iter()
            .map(|&s| if s > 0.0 { s } else { 1.0 })
            .collect()
    }

    /// Product of the scales: the Jacobian factor relating densities in the
    /// frame to densities in the original coordinates.
    pub fn volume_scale(&self) -> f64 {
        self.scales().iter().product()
    }

    /// Maps one original-coordinate point into the frame:
    /// `z_k = (Rᵀ(x − μ))_k / scale_k`.
    pub fn to_frame_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        debug_assert_eq!(x.len(), d);
        debug_assert_eq!(out.len(), d);
        for k in 0..d {
            let mut z = 0.0;
            for i in 0..d {
                z += self.rotation[i * d + k] * (x[i] - self.mean[i]);
            }
            let s = self.singular_values[k];
            out[k] = if s > 0.0 { z / s } else { z };
        }
    }

    /// Maps one frame point back to original coordinates.
    pub fn from_frame_into(&self, z: &[f64], out: &mut [f64]) {
        let d = self.dim();
        debug_assert_eq!(z.len(), d);
        debug_assert_eq!(out.len(), d);
        for i in 0..d {
            let mut x = self.mean[i];
            for k in 0..d {
                let s = self.singular_values[k];
                let zk = if s > 0.0 { z[k] * s } else { z[k] };
                x += self.rotation[i * d + k] * zk;
            }
            out[i] = x;
        }
    }

    /// Maps a row-major batch of points into the frame.
    pub fn to_frame_batch(&self, rows: &[f64]) -> Vec<f64> {
        let d = self.dim();
        assert_eq!(rows.len() % d, 0);
        let mut out = vec![0.0; rows.len()];
        for (src, dst) in rows.chunks_exact(d).zip(out.chunks_exact_mut(d)) {
            self.to_frame_into(src, dst);
        }
        out
    }
}

/// Fits the rotated frame to a row-major N×d sample.
///
/// The sample covariance (N−1 divisor, compensated accumulation) is
/// eigen-decomposed with a deterministic cyclic Jacobi solver; eigenvalues
/// are clamped to zero below a relative floor and returned nonincreasing.
/// The sign convention makes the largest-magnitude entry of each column
/// positive (first such entry on ties), so identical inputs always produce
/// the identical rotation. With `rotate` off the rotation is the identity
/// and the singular values are the per-axis standard deviations.
///
/// # Errors
///
/// * [`Error::DegenerateSample`] when fewer than two points are supplied or
///   the covariance is identically zero.
/// * [`Error::DimensionMismatch`] when `inputs` is not a whole number of
///   d-dimensional rows.
pub fn fit_frame(inputs: &[f64], d: usize, rotate: bool) -> Result<RotatedFrame> {
    if d == 0 || inputs.len() % d != 0 {
        return Err(Error::DimensionMismatch {
            what: "inputs vs dimension",
            expected: d.max(1),
            got: inputs.len(),
        });
    }
    let n = inputs.len() / d;
    if n < 2 {
        return Err(Error::DegenerateSample("need at least two sample points"));
    }

    let mut mean = vec![0.0; d];
    for k in 0..d {
        let mut acc = CompensatedSum::default();
        for row in inputs.chunks_exact(d) {
            acc.add(row[k]);
        }
        mean[k] = acc.total() / n as f64;
    }

    let mut cov = vec![0.0; d * d];
    for a in 0..d {
        for b in a..d {
            let mut acc = CompensatedSum::default();
            for row in inputs.chunks_exact(d) {
                acc.add((row[a] - mean[a]) * (row[b] - mean[b]));
            }
            let v = acc.total() / (n - 1) as f64;
            cov[a * d + b] = v;
            cov[b * d + a] = v;
        }
    }
    if cov.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSample("sample covariance is identically zero"));
    }

    if !rotate {
        let mut rotation = vec![0.0; d * d];
        for k in 0..d {
            rotation[k * d + k] = 1.0;
        }
        let singular_values = (0..d).map(|k| cov[k * d + k].max(0.0).sqrt()).collect();
        return Ok(RotatedFrame {
            mean,
            rotation,
            singular_values,
        });
    }

    let (mut eigenvalues, mut vectors) = jacobi_eigen_sym(&cov, d);
    let floor = EIGENVALUE_FLOOR * eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    for lambda in eigenvalues.iter_mut() {
        if !(*lambda > floor) {
            *lambda = 0.0;
        }
    }
    // Sign convention: largest-magnitude entry of each column positive.
    for k in 0..d {
        let mut best = 0usize;
        for i in 1..d {
            if vectors[i * d + k].abs() > vectors[best * d + k].abs() {
                best = i;
            }
        }
        if vectors[best * d + k] < 0.0 {
            for i in 0..d {
                vectors[i * d + k] = -vectors[i * d + k];
            }
        }
    }
    let singular_values = eigenvalues.iter().map(|&l| l.sqrt()).collect();
    Ok(RotatedFrame {
        mean,
        rotation: vectors,
        singular_values,
    })
}

/// Rectilinear evaluation grid: the Cartesian product of strictly
/// increasing per-axis coordinate arrays.
#[derive(Debug, Clone)]
pub struct EvalGrid {
    /// Per-dimension strictly increasing coordinates.
    pub axes: Vec<Vec<f64>>,
    /// Per-dimension sizes, `sizes[k] == axes[k].len()`.
    pub sizes: Vec<usize>,
}

impl EvalGrid {
    /// Dimension of the grid.
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Total number of grid nodes.
    pub fn total_points(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Writes the coordinates of the node with the given lexicographic
    /// linear index (axis 0 varies slowest).
    pub fn node_into(&self, linear: usize, out: &mut [f64]) {
        let d = self.dim();
        debug_assert_eq!(out.len(), d);
        let mut rest = linear;
        for k in (0..d).rev() {
            let m = self.sizes[k];
            out[k] = self.axes[k][rest % m];
            rest /= m;
        }
        debug_assert_eq!(rest, 0);
    }
}

/// Builds the evaluation grid from per-axis sorted coordinates.
///
/// Sizes follow `M_k = max(1, round(target_m^{1/d} · σ_k / g))` with `g` the
/// geometric mean of the positive singular values (so zero singular values
/// collapse to a single coordinate), then the largest size is decremented
/// until the product is at most `1.1 · target_m`. Axis coordinates sit at
/// the sample quantiles `sorted[round((N−1)·j/(M_k−1))]`; a collapsed axis
/// takes the median coordinate (lower median for even counts, so grid nodes
/// are always sample coordinates), and consecutive duplicates are removed
/// with the size reduced accordingly.
pub fn build_grid(
    sorted_axes: &[Vec<f64>],
    target_m: usize,
    singular_values: &[f64],
) -> EvalGrid {
    let d = sorted_axes.len();
    assert!(d >= 1, "grid needs at least one axis");
    assert_eq!(singular_values.len(), d);
    assert!(target_m >= 1, "target grid size must be at least 1");

    let positive: Vec<f64> = singular_values.iter().copied().filter(|&s| s > 0.0).collect();
    let geo = if positive.is_empty() {
        1.0
    } else {
        (positive.iter().map(|s| s.ln()).sum::<f64>() / positive.len() as f64).exp()
    };
    let per_axis = (target_m as f64).powf(1.0 / d as f64);
    let mut sizes: Vec<usize> = singular_values
        .iter()
        .map(|&s| ((per_axis * s / geo).round() as usize).max(1))
        .collect();

    let product = |sizes: &[usize]| sizes.iter().map(|&m| m as f64).product::<f64>();
    while product(&sizes) > 1.1 * target_m as f64 {
        let largest = (0..d).max_by_key(|&k| sizes[k]).expect("d >= 1");
        if sizes[largest] <= 1 {
            break;
        }
        sizes[largest] -= 1;
    }

    let mut axes = Vec::with_capacity(d);
    for k in 0..d {
        let sorted = &sorted_axes[k];
        let n = sorted.len();
        assert!(n >= 1, "axis {k} has no coordinates");
        let mut axis: Vec<f64> = if sizes[k] == 1 {
            vec![sorted[(n - 1) / 2]]
        } else {
            let m = sizes[k];
            (0..m)
                .map(|j| {
                    let idx = ((n - 1) as f64 * j as f64 / (m - 1) as f64).round() as usize;
                    sorted[idx.min(n - 1)]
                })
                .collect()
        };
        axis.dedup();
        axes.push(axis);
    }
    let sizes = axes.iter().map(|a| a.len()).collect();
    EvalGrid { axes, sizes }
}

/// Multilinear interpolation weights of one query point: the linear indices
/// of its cell's corners and their weights (at most `2^d` entries, weights
/// summing to 1). Queries outside the hull clamp to the boundary cell, so
/// weights stay in `[0, 1]`.
pub fn cell_weights(grid: &EvalGrid, query: &[f64]) -> Vec<(usize, f64)> {
    let d = grid.dim();
    assert_eq!(query.len(), d);

    // Per-axis (index, weight) pairs: one entry for collapsed axes, two for
    // the bracketing coordinates otherwise.
    let mut per_axis: Vec<Vec<(usize, f64)>> = Vec::with_capacity(d);
    for k in 0..d {
        let axis = &grid.axes[k];
        let m = axis.len();
        if m == 1 {
            per_axis.push(vec![(0, 1.0)]);
            continue;
        }
        let q = query[k];
        let cell = axis.partition_point(|&a| a <= q).clamp(1, m - 1) - 1;
        let width = axis[cell + 1] - axis[cell];
        let t = ((q - axis[cell]) / width).clamp(0.0, 1.0);
        per_axis.push(vec![(cell, 1.0 - t), (cell + 1, t)]);
    }

    let mut corners: Vec<(usize, f64)> = vec![(0, 1.0)];
    for k in 0..d {
        let m = grid.sizes[k];
        let mut next = Vec::with_capacity(corners.len() * per_axis[k].len());
        for &(lin, w) in &corners {
            for &(idx, wk) in &per_axis[k] {
                next.push((lin * m + idx, w * wk));
            }
        }
        corners = next;
    }
    corners
}

/// Interpolates grid-node `values` at row-major query points.
///
/// NaN node values (empty-window sentinels) propagate to any query whose
/// cell touches them.
pub fn interpolate(grid: &EvalGrid, values: &[f64], queries: &[f64]) -> Vec<f64> {
    let d = grid.dim();
    assert_eq!(values.len(), grid.total_points());
    assert_eq!(queries.len() % d, 0);
    queries
        .chunks_exact(d)
        .map(|q| {
            cell_weights(grid, q)
                .iter()
                .map(|&(lin, w)| w * values[lin])
                .sum()
        })
        .collect()
}

//! Per-axis bandwidth partitions, moment-key enumeration, and per-box
//! monomial sums.
//!
//! The multivariate sweep rests on one geometric fact: if the per-axis
//! thresholds are the sorted union of all window edges `z±h`, then every
//! window `[z−h, z+h)` is exactly a contiguous union of the boxes those
//! thresholds delimit. Runs of point-free boxes are trimmed to a single
//! representative threshold, which keeps the threshold count at most twice
//! the axis grid size without changing any window's sample content. Box
//! ranges are then recovered by rank matching: after trimming, the number of
//! sample points strictly below each threshold is strictly increasing, and a
//! window edge shares that count with exactly one kept threshold.
//!
//! Thresholds are shifted off colliding input coordinates (downward, into the
//! gap above the next input below) so that box membership never has to break
//! a tie; a collision that cannot be separated in double precision surfaces
//! as an error when the box sums are built.

use std::collections::BTreeSet;
use std::ops::Range;

use crate::accumulator::{Accumulator, CompensatedSum, PlainSum, SumPolicy};
use crate::error::{Error, Result};

/// Requested smoothing estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Estimator {
    /// Kernel density estimate.
    Kde,
    /// Nadaraya-Watson kernel regression.
    Nw,
    /// Locally linear kernel regression.
    Loclin,
}

impl Estimator {
    /// Lowercase name used on command lines and in reports.
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Kde => "kde",
            Estimator::Nw => "nw",
            Estimator::Loclin => "loclin",
        }
    }
}

/// Canonical monomial-times-output power indexing one tracked sum.
///
/// `monomial` lists `(dimension, power)` factors sorted by dimension with no
/// repeats and no zero powers, so each mathematical monomial has exactly one
/// representation; `q ∈ {0, 1}` is the power of the response `y`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MomentKey {
    /// Sorted `(dimension index, power)` factors.
    pub monomial: Vec<(u8, u8)>,
    /// Response power.
    pub q: u8,
}

impl MomentKey {
    /// Builds a key in canonical form: dimensions sorted, duplicate
    /// dimensions merged by adding powers, zero powers dropped.
    pub fn new(pairs: &[(usize, u32)], q: u8) -> MomentKey {
        assert!(q <= 1, "output power q must be 0 or 1, got {q}");
        let mut monomial: Vec<(u8, u8)> = Vec::with_capacity(pairs.len());
        for &(dim, pow) in pairs {
            if pow == 0 {
                continue;
            }
            let dim = u8::try_from(dim).expect("dimension index fits in u8");
            let pow = u8::try_from(pow).expect("power fits in u8");
            match monomial.iter_mut().find(|(d, _)| *d == dim) {
                Some((_, p)) => *p += pow,
                None => monomial.push((dim, pow)),
            }
        }
        monomial.sort_unstable();
        MomentKey { monomial, q }
    }

    /// Total degree of the monomial.
    pub fn degree(&self) -> u32 {
        self.monomial.iter().map(|&(_, p)| p as u32).sum()
    }

    /// Evaluates `Π x[dim]^power · y^q` at one sample point.
    #[inline]
    pub fn eval(&self, point: &[f64], y: f64) -> f64 {
        let mut v = if self.q == 1 { y } else { 1.0 };
        for &(dim, pow) in &self.monomial {
            v *= point[dim as usize].powi(pow as i32);
        }
        v
    }
}

fn merged_key(a: &[(u8, u8)], b: &[(u8, u8)], q: u8) -> MomentKey {
    let pairs: Vec<(usize, u32)> = a
        .iter()
        .chain(b)
        .map(|&(d, p)| (d as usize, p as u32))
        .collect();
    MomentKey::new(&pairs, q)
}

/// Enumerates the deduplicated tracked sums the fast multivariate engine
/// needs for `estimator` in dimension `d`, in a deterministic sorted order.
///
/// The additive Epanechnikov kernel expands into powers 0..2 of one
/// coordinate at a time, giving the density the `2d+1` classic sums. The
/// Nadaraya-Watson numerator adds the same monomials with `q = 1`. The
/// locally linear normal equations multiply in regression monomials of
/// degree ≤ 2 (matrix side, `q = 0`) and degree ≤ 1 (right-hand side,
/// `q = 1`) before deduplication.
pub fn enumerate_moment_keys(d: usize, estimator: Estimator) -> Vec<MomentKey> {
    assert!(d >= 1, "dimension must be at least 1, got {d}");

    // Kernel expansion monomials: 1, x_k, x_k² per dimension.
    let mut kernel: Vec<Vec<(u8, u8)>> = vec![Vec::new()];
    for k in 0..d {
        kernel.push(vec![(k as u8, 1)]);
        kernel.push(vec![(k as u8, 2)]);
    }

    // Regression monomials by degree: 1; x_a; x_a·x_b (a ≤ b).
    let mut regression_deg1: Vec<Vec<(u8, u8)>> = vec![Vec::new()];
    for a in 0..d {
        regression_deg1.push(vec![(a as u8, 1)]);
    }
    let mut regression_deg2 = regression_deg1.clone();
    for a in 0..d {
        for b in a..d {
            if a == b {
                regression_deg2.push(vec![(a as u8, 2)]);
            } else {
                regression_deg2.push(vec![(a as u8, 1), (b as u8, 1)]);
            }
        }
    }

    let mut set = BTreeSet::new();
    match estimator {
        Estimator::Kde => {
            for kappa in &kernel {
                set.insert(merged_key(kappa, &[], 0));
            }
        }
        Estimator::Nw => {
            for kappa in &kernel {
                set.insert(merged_key(kappa, &[], 0));
                set.insert(merged_key(kappa, &[], 1));
            }
        }
        Estimator::Loclin => {
            for kappa in &kernel {
                for rho in &regression_deg2 {
                    set.insert(merged_key(kappa, rho, 0));
                }
                for rho in &regression_deg1 {
                    set.insert(merged_key(kappa, rho, 1));
                }
            }
        }
    }
    set.into_iter().collect()
}

/// One axis of the rectilinear partition: kept thresholds, and for every
/// axis grid point the inclusive 1-based box range `[L, R]` whose union
/// reproduces the window `[z−h, z+h)` up to trimmed point-free intervals.
///
/// Boxes are numbered 1..=box_count, box `b` spanning
/// `[thresholds[b−1], thresholds[b])`. An empty range is encoded as
/// `L = R + 1`.
#[derive(Debug, Clone)]
pub struct AxisPartition {
    /// Strictly increasing kept thresholds.
    pub thresholds: Vec<f64>,
    /// Number of boxes, `thresholds.len() − 1`.
    pub box_count: usize,
    /// 1-based first box of each window.
    pub l_index: Vec<usize>,
    /// 1-based last box of each window.
    pub r_index: Vec<usize>,
}

impl AxisPartition {
    /// 0-based half-open box range of window `j`, ready for sweeping.
    pub fn box_range(&self, j: usize) -> Range<usize> {
        (self.l_index[j] - 1)..self.r_index[j]
    }

    /// Number of windows (axis grid points).
    pub fn eval_count(&self) -> usize {
        self.l_index.len()
    }

    /// 0-based box holding coordinate `x`, `None` when `x` is outside the
    /// threshold span (such points lie in no window on this axis).
    ///
    /// # Errors
    ///
    /// [`Error::ThresholdCollision`] when `x` equals a threshold exactly,
    /// i.e. the build-time shift could not separate them in double precision.
    pub fn bin(&self, x: f64) -> Result<Option<usize>> {
        let pos = self.thresholds.partition_point(|&t| t <= x);
        if pos > 0 && self.thresholds[pos - 1] == x {
            return Err(Error::ThresholdCollision { value: x });
        }
        if pos == 0 || pos == self.thresholds.len() {
            return Ok(None);
        }
        Ok(Some(pos - 1))
    }
}

/// Number of sample values strictly below `v`.
fn rank(sorted: &[f64], v: f64) -> usize {
    sorted.partition_point(|&x| x < v)
}

/// Builds the bandwidth partition of one axis.
///
/// Thresholds are the sorted, deduplicated window edges `z±h`, shifted off
/// any colliding input coordinate, with runs of point-free intervals trimmed
/// to a single representative (interior runs keep their midpoint, leading and
/// trailing runs the edge adjacent to the populated region).
///
/// # Errors
///
/// * [`Error::DimensionMismatch`] if `axis_grid` and `axis_bandwidths`
///   differ in length or are empty.
/// * [`Error::NonPositiveBandwidth`] for any non-finite or non-positive
///   half-width.
/// * [`Error::MonotonicityViolation`] unless `z−h` and `z+h` are
///   nondecreasing and `axis_inputs` is sorted.
pub fn build_partition(
    axis_grid: &[f64],
    axis_bandwidths: &[f64],
    axis_inputs: &[f64],
) -> Result<AxisPartition> {
    if axis_grid.len() != axis_bandwidths.len() || axis_grid.is_empty() {
        return Err(Error::DimensionMismatch {
            what: "axis grid vs bandwidths",
            expected: axis_grid.len().max(1),
            got: axis_bandwidths.len(),
        });
    }
    for (index, &h) in axis_bandwidths.iter().enumerate() {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::NonPositiveBandwidth { index, value: h });
        }
    }
    let edge_lo = |j: usize| axis_grid[j] - axis_bandwidths[j];
    let edge_hi = |j: usize| axis_grid[j] + axis_bandwidths[j];
    for i in 1..axis_grid.len() {
        if !(edge_lo(i - 1) <= edge_lo(i)) {
            return Err(Error::MonotonicityViolation {
                what: "axis z - h",
                index: i,
            });
        }
        if !(edge_hi(i - 1) <= edge_hi(i)) {
            return Err(Error::MonotonicityViolation {
                what: "axis z + h",
                index: i,
            });
        }
    }
    for i in 1..axis_inputs.len() {
        if !(axis_inputs[i - 1] <= axis_inputs[i]) {
            return Err(Error::MonotonicityViolation {
                what: "axis inputs",
                index: i,
            });
        }
    }

    // Sorted distinct window edges.
    let mut thresholds: Vec<f64> = Vec::with_capacity(2 * axis_grid.len());
    for j in 0..axis_grid.len() {
        thresholds.push(edge_lo(j));
        thresholds.push(edge_hi(j));
    }
    thresholds.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite edges"));
    thresholds.dedup();

    // Shift thresholds off input coordinates, downward into the point-free
    // gap, preserving strict order and every box's sample content.
    let mut prev: Option<f64> = None;
    for t in thresholds.iter_mut() {
        let idx = rank(axis_inputs, *t);
        let collides = idx < axis_inputs.len() && axis_inputs[idx] == *t;
        if collides {
            let input_floor = if idx > 0 {
                axis_inputs[idx - 1]
            } else {
                f64::NEG_INFINITY
            };
            let floor = input_floor.max(prev.unwrap_or(f64::NEG_INFINITY));
            let candidate = if floor.is_finite() {
                let mid = floor + (*t - floor) * 0.5;
                if floor < mid && mid < *t {
                    mid
                } else {
                    *t // midpoint not representable; resolved below or at binning
                }
            } else {
                *t
            };
            let candidate = if candidate < *t {
                candidate
            } else {
                let down = t.next_down();
                if down > floor {
                    down
                } else {
                    *t
                }
            };
            *t = candidate;
        }
        prev = Some(*t);
    }

    // Trim runs of equal-count thresholds (point-free intervals) to one
    // representative each.
    let counts: Vec<usize> = thresholds.iter().map(|&t| rank(axis_inputs, t)).collect();
    let mut kept: Vec<f64> = Vec::with_capacity(thresholds.len());
    let mut kept_counts: Vec<usize> = Vec::with_capacity(thresholds.len());
    if counts.first() == counts.last() {
        // No sample point anywhere between the extreme thresholds: keep both
        // so at least one box exists; every window maps to an empty range.
        kept.push(thresholds[0]);
        kept_counts.push(counts[0]);
        if thresholds.len() > 1 {
            kept.push(*thresholds.last().unwrap());
            kept_counts.push(*counts.last().unwrap());
        }
    } else {
        let mut a = 0;
        while a < thresholds.len() {
            let mut b = a;
            while b + 1 < thresholds.len() && counts[b + 1] == counts[a] {
                b += 1;
            }
            let representative = if a == b {
                thresholds[a]
            } else if a == 0 {
                thresholds[b] // leading run: keep the edge next to the data
            } else if b == thresholds.len() - 1 {
                thresholds[a] // trailing run likewise
            } else {
                let mid = 0.5 * (thresholds[a] + thresholds[b]);
                if thresholds[a] < mid && mid < thresholds[b] {
                    mid
                } else {
                    thresholds[a]
                }
            };
            kept.push(representative);
            kept_counts.push(counts[a]);
            a = b + 1;
        }
    }

    debug_assert!(kept.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(kept.len() >= 2);

    // Rank matching: each window edge shares its strictly-below count with
    // exactly one kept threshold.
    let locate = |edge: f64| -> usize {
        let r = rank(axis_inputs, edge);
        let i = kept_counts.partition_point(|&c| c < r);
        debug_assert!(
            i < kept_counts.len() && kept_counts[i] == r,
            "window edge rank {r} lost by trimming"
        );
        i
    };
    let mut l_index = Vec::with_capacity(axis_grid.len());
    let mut r_index = Vec::with_capacity(axis_grid.len());
    for j in 0..axis_grid.len() {
        let lo = locate(edge_lo(j));
        let hi = locate(edge_hi(j));
        l_index.push(lo + 1);
        r_index.push(hi);
    }

    Ok(AxisPartition {
        box_count: kept.len() - 1,
        thresholds: kept,
        l_index,
        r_index,
    })
}

/// Dense per-box monomial sums: for every box of the d-dimensional partition
/// and every tracked key, the sum of the key's monomial over the sample
/// points inside the box.
///
/// Layout is row-major with axis 0 varying slowest and the key index
/// fastest, so one box's keys are contiguous.
#[derive(Debug, Clone)]
pub struct BoxSums {
    dims: Vec<usize>,
    keys: Vec<MomentKey>,
    values: Vec<f64>,
}

impl BoxSums {
    /// Boxes per axis.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Tracked keys, in slot order.
    pub fn keys(&self) -> &[MomentKey] {
        &self.keys
    }

    /// Full table, box-major and key-fast.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value of one key slot in one box.
    pub fn value(&self, box_index: &[usize], key_slot: usize) -> f64 {
        assert_eq!(box_index.len(), self.dims.len());
        let mut lin = 0usize;
        for (i, &b) in box_index.iter().enumerate() {
            assert!(b < self.dims[i]);
            lin = lin * self.dims[i] + b;
        }
        self.values[lin * self.keys.len() + key_slot]
    }
}

/// Accumulates every tracked monomial per box in one pass over the sample.
///
/// `inputs` is row-major N×d; points outside the threshold span of any axis
/// belong to no window and are skipped.
///
/// # Errors
///
/// * [`Error::DimensionMismatch`] if `inputs` is not `outputs.len() ×
///   partitions.len()`.
/// * [`Error::ThresholdCollision`] if an input coordinate equals a threshold
///   exactly (see [`AxisPartition::bin`]).
pub fn precompute_box_sums(
    inputs: &[f64],
    outputs: &[f64],
    partitions: &[AxisPartition],
    keys: &[MomentKey],
    policy: SumPolicy,
) -> Result<BoxSums> {
    let d = partitions.len();
    let n = outputs.len();
    if inputs.len() != n * d || d == 0 {
        return Err(Error::DimensionMismatch {
            what: "inputs vs outputs × partitions",
            expected: n * d.max(1),
            got: inputs.len(),
        });
    }
    let values = match policy {
        SumPolicy::Plain => fill::<PlainSum>(inputs, outputs, partitions, keys)?,
        SumPolicy::Compensated => fill::<CompensatedSum>(inputs, outputs, partitions, keys)?,
    };
    Ok(BoxSums {
        dims: partitions.iter().map(|p| p.box_count).collect(),
        keys: keys.to_vec(),
        values,
    })
}

fn fill<A: Accumulator>(
    inputs: &[f64],
    outputs: &[f64],
    partitions: &[AxisPartition],
    keys: &[MomentKey],
) -> Result<Vec<f64>> {
    let d = partitions.len();
    let n = outputs.len();
    let boxes: usize = partitions.iter().map(|p| p.box_count).product();
    const OUTSIDE: usize = usize::MAX;

    let mut row_box = vec![OUTSIDE; n];
    let mut box_index = vec![0usize; d];
    for (i, row) in inputs.chunks_exact(d).enumerate() {
        let mut inside = true;
        for (k, part) in partitions.iter().enumerate() {
            match part.bin(row[k])? {
                Some(b) => box_index[k] = b,
                None => inside = false,
            }
        }
        if !inside {
            continue;
        }
        let mut lin = 0usize;
        for (k, part) in partitions.iter().enumerate() {
            lin = lin * part.box_count + box_index[k];
        }
        row_box[i] = lin;
    }

    // Group rows by box with a stable counting sort, then accumulate one
    // box at a time. Stability keeps each box's accumulation in input
    // order, so every rounded sum is identical to a direct scatter, while
    // the boxes-by-keys table is written once, sequentially; a scatter
    // would touch it randomly, which dominates once the table outgrows
    // the last-level cache.
    let mut starts = vec![0usize; boxes + 1];
    for &b in &row_box {
        if b != OUTSIDE {
            starts[b + 1] += 1;
        }
    }
    for i in 0..boxes {
        starts[i + 1] += starts[i];
    }
    let mut cursor: Vec<usize> = starts[..boxes].to_vec();
    let mut grouped = vec![0usize; starts[boxes]];
    for (i, &b) in row_box.iter().enumerate() {
        if b != OUTSIDE {
            grouped[cursor[b]] = i;
            cursor[b] += 1;
        }
    }

    let n_keys = keys.len();
    let mut values = vec![0.0f64; boxes * n_keys];
    let mut acc: Vec<A> = vec![A::default(); n_keys];
    for b in 0..boxes {
        let rows = &grouped[starts[b]..starts[b + 1]];
        if rows.is_empty() {
            continue;
        }
        for a in acc.iter_mut() {
            *a = A::default();
        }
        for &i in rows {
            let row = &inputs[i * d..(i + 1) * d];
            let y = outputs[i];
            for (slot, key) in keys.iter().enumerate() {
                acc[slot].add(key.eval(row, y));
            }
        }
        let base = b * n_keys;
        for (slot, a) in acc.iter().enumerate() {
            values[base + slot] = a.total();
        }
    }
    Ok(values)
}

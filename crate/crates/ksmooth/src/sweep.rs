//! Nested fast-sum-updating sweep over the evaluation grid.
//!
//! Given per-box monomial sums, one recursion level per dimension slides a
//! partial-sum table along its axis: level k maintains `T_k`, the sum of
//! box values over the first k axes' current window ranges, as a table over
//! the remaining free box indices. Moving to the next grid coordinate on an
//! axis adds the newly covered slabs and subtracts the departed ones, so
//! every grid point costs amortized O(1) slab operations. Inner levels are
//! re-initialized whenever an outer coordinate advances, because their
//! source table has changed.
//!
//! The innermost table holds, for every tracked monomial, the exact sum
//! over the d-dimensional window of the current grid point. The additive
//! Epanechnikov expansion then turns those window sums into kernel-weighted
//! sums, from which the three smoothers are assembled per point.
//!
//! Tables are stored with the leading axis dropped at each level and keys
//! varying fastest, so every slab update touches one contiguous range.

use crate::accumulator::{Accumulator, CompensatedSum, PlainSum, SumPolicy};
use crate::error::{Error, Result};
use crate::frame::EvalGrid;
use crate::kernels::quad_coeffs;
use crate::linalg::solve_spd;
use crate::partition::{enumerate_moment_keys, AxisPartition, BoxSums, Estimator, MomentKey};
use crate::sliding1d::PointStatus;

/// Instrumentation hook: captures level-k partial-sum tables at requested
/// grid-coordinate prefixes so tests can check them against brute force.
#[derive(Debug, Default)]
pub struct SweepProbe {
    /// Grid-coordinate prefixes `(j_1..j_k)` to capture; the prefix length
    /// selects the level.
    pub targets: Vec<Vec<usize>>,
    /// Captured `(prefix, table totals)` pairs, table row-major over the
    /// free box indices with keys fastest.
    pub captured: Vec<(Vec<usize>, Vec<f64>)>,
}

impl SweepProbe {
    /// Creates a probe for the given grid-coordinate prefixes.
    pub fn new(targets: Vec<Vec<usize>>) -> SweepProbe {
        SweepProbe {
            targets,
            captured: Vec::new(),
        }
    }
}

/// Per-level sweep state: one partial-sum table and one pair of slab
/// pointers per dimension, plus the shared visitor plumbing.
struct SweepState<'a, A: Accumulator, F: FnMut(usize, &[f64])> {
    partitions: &'a [AxisPartition],
    values: &'a [f64],
    /// Grid points per axis.
    sizes: Vec<usize>,
    /// tables[k] sums slabs over axes 0..=k; indexed by boxes of axes
    /// k+1.. with keys fastest.
    tables: Vec<Vec<A>>,
    /// Slabs removed so far per level.
    il: Vec<usize>,
    /// Slabs added so far per level.
    ir: Vec<usize>,
    prefix: Vec<usize>,
    scratch: Vec<f64>,
    visitor: F,
    probe: Option<&'a mut SweepProbe>,
}

impl<'a, A: Accumulator, F: FnMut(usize, &[f64])> SweepState<'a, A, F> {
    fn level(&mut self, k: usize, base: usize) {
        let d = self.partitions.len();
        self.il[k] = 0;
        self.ir[k] = 0;
        for cell in self.tables[k].iter_mut() {
            *cell = A::default();
        }
        for j in 0..self.sizes[k] {
            self.prefix[k] = j;
            let range = self.partitions[k].box_range(j);
            while self.ir[k] < range.end {
                let slab = self.ir[k];
                self.apply_slab(k, slab, 1.0);
                self.ir[k] += 1;
            }
            while self.il[k] < range.start {
                let slab = self.il[k];
                self.apply_slab(k, slab, -1.0);
                self.il[k] += 1;
            }
            if self.probe.is_some() {
                self.maybe_capture(k);
            }
            let index = base * self.sizes[k] + j;
            if k + 1 == d {
                for (slot, acc) in self.tables[k].iter().enumerate() {
                    self.scratch[slot] = acc.total();
                }
                (self.visitor)(index, &self.scratch);
            } else {
                self.level(k + 1, index);
            }
        }
    }

    /// Adds (`sign = 1`) or removes (`sign = −1`) one leading-axis slab of
    /// the level's source table.
    fn apply_slab(&mut self, k: usize, slab: usize, sign: f64) {
        if k == 0 {
            let len = self.tables[0].len();
            let src = &self.values[slab * len..(slab + 1) * len];
            for (dst, &v) in self.tables[0].iter_mut().zip(src) {
                dst.add(sign * v);
            }
        } else {
            let (lower, upper) = self.tables.split_at_mut(k);
            let dst = &mut upper[0];
            let len = dst.len();
            let src = &lower[k - 1][slab * len..(slab + 1) * len];
            for (d, s) in dst.iter_mut().zip(src) {
                d.add(sign * s.total());
            }
        }
    }

    fn maybe_capture(&mut self, k: usize) {
        let probe = self.probe.as_mut().expect("probe checked by caller");
        let prefix = &self.prefix[..=k];
        if probe
            .targets
            .iter()
            .any(|t| t.len() == k + 1 && t == prefix)
        {
            let totals = self.tables[k].iter().map(|a| a.total()).collect();
            probe.captured.push((prefix.to_vec(), totals));
        }
    }
}

/// Sweeps the grid in lexicographic order (axis 0 slowest), invoking
/// `visitor(linear_index, window_sums)` at every grid point with the exact
/// per-key monomial sums over that point's window, in `box_sums.keys()`
/// order.
pub fn sweep_sums(
    box_sums: &BoxSums,
    partitions: &[AxisPartition],
    policy: SumPolicy,
    visitor: impl FnMut(usize, &[f64]),
) {
    sweep_sums_probed(box_sums, partitions, policy, visitor, None);
}

/// [`sweep_sums`] with an optional instrumentation probe.
pub fn sweep_sums_probed(
    box_sums: &BoxSums,
    partitions: &[AxisPartition],
    policy: SumPolicy,
    visitor: impl FnMut(usize, &[f64]),
    probe: Option<&mut SweepProbe>,
) {
    let d = partitions.len();
    assert_eq!(box_sums.dims().len(), d, "partitions must match box sums");
    for (k, part) in partitions.iter().enumerate() {
        assert_eq!(part.box_count, box_sums.dims()[k]);
    }
    match policy {
        SumPolicy::Plain => run::<PlainSum>(box_sums, partitions, visitor, probe),
        SumPolicy::Compensated => run::<CompensatedSum>(box_sums, partitions, visitor, probe),
    }
}

fn run<A: Accumulator>(
    box_sums: &BoxSums,
    partitions: &[AxisPartition],
    visitor: impl FnMut(usize, &[f64]),
    probe: Option<&mut SweepProbe>,
) {
    let d = partitions.len();
    let n_keys = box_sums.keys().len();
    // tables[k] spans the boxes of axes k+1.. times the keys.
    let mut table_len = vec![n_keys; d];
    for k in (0..d - 1).rev() {
        table_len[k] = table_len[k + 1] * box_sums.dims()[k + 1];
    }
    let mut state = SweepState {
        partitions,
        values: box_sums.values(),
        sizes: partitions.iter().map(|p| p.eval_count()).collect(),
        tables: table_len.iter().map(|&len| vec![A::default(); len]).collect(),
        il: vec![0; d],
        ir: vec![0; d],
        prefix: vec![0; d],
        scratch: vec![0.0; n_keys],
        visitor,
        probe,
    };
    state.level(0, 0);
}

/// Precomputed recipe turning window monomial sums into kernel-weighted
/// sums for one estimator: for every output `(regression monomial, q)` and
/// every dimension, the key slots of the monomial times that dimension's
/// powers 0..2.
#[derive(Debug, Clone)]
pub struct ExpansionPlan {
    d: usize,
    outputs: Vec<MomentKey>,
    /// slots[o][3k + p] = slot of outputs[o] × x_k^p in the tracked keys.
    slots: Vec<Vec<usize>>,
}

impl ExpansionPlan {
    /// Builds the plan for `estimator` against the tracked key list (which
    /// must come from [`enumerate_moment_keys`] for the same or a stronger
    /// estimator).
    pub fn new(d: usize, estimator: Estimator, keys: &[MomentKey]) -> ExpansionPlan {
        let mut outputs = vec![MomentKey::new(&[], 0)];
        if estimator >= Estimator::Nw {
            outputs.push(MomentKey::new(&[], 1));
        }
        if estimator == Estimator::Loclin {
            for a in 0..d {
                outputs.push(MomentKey::new(&[(a, 1)], 0));
            }
            for a in 0..d {
                outputs.push(MomentKey::new(&[(a, 1)], 1));
            }
            for a in 0..d {
                for b in a..d {
                    outputs.push(MomentKey::new(&[(a, 1), (b, 1)], 0));
                }
            }
        }
        let slot_of = |key: &MomentKey| -> usize {
            keys.binary_search(key)
                .unwrap_or_else(|_| panic!("tracked keys missing {key:?}"))
        };
        let slots = outputs
            .iter()
            .map(|out| {
                let mut row = Vec::with_capacity(3 * d);
                for k in 0..d {
                    for p in 0..3u32 {
                        let mut pairs: Vec<(usize, u32)> = out
                            .monomial
                            .iter()
                            .map(|&(dim, pow)| (dim as usize, pow as u32))
                            .collect();
                        pairs.push((k, p));
                        row.push(slot_of(&MomentKey::new(&pairs, out.q)));
                    }
                }
                row
            })
            .collect();
        ExpansionPlan { d, outputs, slots }
    }

    /// Output keys, one per expanded kernel sum.
    pub fn outputs(&self) -> &[MomentKey] {
        &self.outputs
    }

    /// Position of an output key, if the plan carries it.
    pub fn output_slot(&self, key: &MomentKey) -> Option<usize> {
        self.outputs.iter().position(|k| k == key)
    }

    /// Expands window sums `t_d` at grid point `z` with bandwidths `h` into
    /// `out`, one kernel-weighted sum per output key:
    /// `S(ρ, q) = 3/(d·2^{d+1}·N·Πh) · Σ_k [a_k·T(ρ,q) + b_k·T(ρ·x_k,q) +
    /// c_k·T(ρ·x_k²,q)]` with `a + b·x + c·x² = 1 − (x−z_k)²/h_k²`.
    pub fn expand_into(&self, t_d: &[f64], z: &[f64], h: &[f64], n: usize, out: &mut [f64]) {
        let d = self.d;
        debug_assert_eq!(z.len(), d);
        debug_assert_eq!(h.len(), d);
        debug_assert_eq!(out.len(), self.outputs.len());
        let volume: f64 = h.iter().product();
        let prefactor = 3.0 / (d as f64 * 2f64.powi(d as i32 + 1) * n as f64 * volume);
        for (o, row) in self.slots.iter().enumerate() {
            let mut sum = 0.0;
            for k in 0..d {
                let (a, b, c) = quad_coeffs(z[k], h[k]);
                sum += a * t_d[row[3 * k]] + b * t_d[row[3 * k + 1]] + c * t_d[row[3 * k + 2]];
            }
            out[o] = prefactor * sum;
        }
    }
}

/// Expands one grid point's window sums into kernel-weighted sums; see
/// [`ExpansionPlan::expand_into`].
pub fn expand_kernel_sums(
    plan: &ExpansionPlan,
    t_d: &[f64],
    z: &[f64],
    h: &[f64],
    n: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; plan.outputs().len()];
    plan.expand_into(t_d, z, h, n, &mut out);
    out
}

/// Kernel-weighted sums for every grid point, plus the raw in-window point
/// count used for empty-window detection.
#[derive(Debug, Clone)]
pub struct KernelSumsGrid {
    /// Output keys, matching the fastest index of `values`.
    pub outputs: Vec<MomentKey>,
    /// Row-major grid-point × output-key kernel sums.
    pub values: Vec<f64>,
    /// Exact number of sample points in each grid point's window.
    pub counts: Vec<f64>,
}

/// Grid estimates for the requested estimators with per-point status flags.
///
/// Estimators that were not requested are `None`; density values are
/// nonnegative everywhere, and grid points with no kernel mass carry zero
/// density, NaN regression values, and the `EmptyWindow` flag.
#[derive(Debug, Clone)]
pub struct SmoothResultGrid {
    /// Kernel density estimate per grid point.
    pub density: Option<Vec<f64>>,
    /// Nadaraya-Watson regression per grid point.
    pub nw: Option<Vec<f64>>,
    /// Locally linear regression per grid point.
    pub loclin: Option<Vec<f64>>,
    /// Worst status over the requested estimators, per grid point.
    pub status: Vec<PointStatus>,
}

/// Assembles the requested smoothers from expanded kernel sums.
///
/// The density is the unit-key sum; Nadaraya-Watson is the ratio of the
/// response-weighted to the unweighted sum; the locally linear fit solves
/// the (d+1)×(d+1) symmetric system in the monomial sums and evaluates the
/// fitted affine function at the grid point, falling back to the
/// Nadaraya-Watson value (flagged `SingularFallback`) when the system is
/// numerically singular.
pub fn assemble_smoothers(
    sums: &KernelSumsGrid,
    grid: &EvalGrid,
    estimators: &[Estimator],
) -> SmoothResultGrid {
    assert!(!estimators.is_empty(), "at least one estimator required");
    let d = grid.dim();
    let m = grid.total_points();
    let n_out = sums.outputs.len();
    assert_eq!(sums.values.len(), m * n_out);
    assert_eq!(sums.counts.len(), m);

    let want = |e: Estimator| estimators.contains(&e);
    let slot = |key: &MomentKey| -> usize {
        sums.outputs
            .iter()
            .position(|k| k == key)
            .unwrap_or_else(|| panic!("kernel sums missing {key:?}"))
    };
    let s00 = slot(&MomentKey::new(&[], 0));
    let need_nw = want(Estimator::Nw) || want(Estimator::Loclin);
    let s01 = if need_nw {
        slot(&MomentKey::new(&[], 1))
    } else {
        usize::MAX
    };
    let (a_slots, ay_slots, ab_slots) = if want(Estimator::Loclin) {
        let a_slots: Vec<usize> = (0..d).map(|a| slot(&MomentKey::new(&[(a, 1)], 0))).collect();
        let ay_slots: Vec<usize> = (0..d).map(|a| slot(&MomentKey::new(&[(a, 1)], 1))).collect();
        let ab_slots: Vec<Vec<usize>> = (0..d)
            .map(|a| {
                (0..d)
                    .map(|b| slot(&MomentKey::new(&[(a, 1), (b, 1)], 0)))
                    .collect()
            })
            .collect();
        (a_slots, ay_slots, ab_slots)
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };

    let mut density = want(Estimator::Kde).then(|| vec![0.0; m]);
    let mut nw = want(Estimator::Nw).then(|| vec![f64::NAN; m]);
    let mut loclin = want(Estimator::Loclin).then(|| vec![f64::NAN; m]);
    let mut status = vec![PointStatus::Ok; m];

    let dim1 = d + 1;
    let mut a_mat = vec![0.0; dim1 * dim1];
    let mut rhs = vec![0.0; dim1];
    let mut z = vec![0.0; d];

    for j in 0..m {
        let s = &sums.values[j * n_out..(j + 1) * n_out];
        let mass = s[s00];
        if sums.counts[j] == 0.0 || !(mass > 0.0) {
            if let Some(dens) = density.as_mut() {
                dens[j] = 0.0;
            }
            status[j] = PointStatus::EmptyWindow;
            continue;
        }
        if let Some(dens) = density.as_mut() {
            dens[j] = mass.max(0.0);
        }
        let nw_value = if need_nw { s[s01] / mass } else { f64::NAN };
        if let Some(nw_out) = nw.as_mut() {
            nw_out[j] = nw_value;
        }
        if let Some(ll) = loclin.as_mut() {
            grid.node_into(j, &mut z);
            a_mat[0] = mass;
            rhs[0] = s[s01];
            for a in 0..d {
                a_mat[a + 1] = s[a_slots[a]];
                a_mat[(a + 1) * dim1] = s[a_slots[a]];
                rhs[a + 1] = s[ay_slots[a]];
                for b in 0..d {
                    a_mat[(a + 1) * dim1 + b + 1] = s[ab_slots[a][b]];
                }
            }
            match solve_spd(&a_mat, &rhs, dim1) {
                Some(beta) => {
                    let mut fit = beta[0];
                    for a in 0..d {
                        fit += beta[a + 1] * z[a];
                    }
                    ll[j] = fit;
                }
                None => {
                    ll[j] = nw_value;
                    status[j] = status[j].max(PointStatus::SingularFallback);
                }
            }
        }
    }

    SmoothResultGrid {
        density,
        nw,
        loclin,
        status,
    }
}

/// Runs the full fast multivariate pipeline on frame coordinates: tracked
/// keys for the strongest requested estimator, per-axis partitions, box
/// sums, the sweep, the kernel expansion, and smoother assembly.
///
/// `inputs_frame` is row-major N×d in the same coordinates as the grid;
/// `axis_bandwidths[k][j]` is the balloon half-width of axis k at grid
/// coordinate j. Densities are per unit volume of the frame coordinates;
/// callers working in a rotated/scaled frame divide by the frame's volume
/// scale to return to original coordinates.
pub fn smooth_grid(
    inputs_frame: &[f64],
    outputs: &[f64],
    grid: &EvalGrid,
    axis_bandwidths: &[Vec<f64>],
    estimators: &[Estimator],
    policy: SumPolicy,
) -> Result<SmoothResultGrid> {
    assert!(!estimators.is_empty(), "at least one estimator required");
    let d = grid.dim();
    let n = outputs.len();
    if inputs_frame.len() != n * d {
        return Err(Error::DimensionMismatch {
            what: "frame inputs vs outputs × dimension",
            expected: n * d,
            got: inputs_frame.len(),
        });
    }
    if axis_bandwidths.len() != d {
        return Err(Error::DimensionMismatch {
            what: "axis bandwidth arrays vs dimension",
            expected: d,
            got: axis_bandwidths.len(),
        });
    }
    for k in 0..d {
        if axis_bandwidths[k].len() != grid.sizes[k] {
            return Err(Error::DimensionMismatch {
                what: "axis bandwidths vs grid size",
                expected: grid.sizes[k],
                got: axis_bandwidths[k].len(),
            });
        }
    }

    let strongest = estimators.iter().copied().max().expect("non-empty");
    let keys = enumerate_moment_keys(d, strongest);
    debug_assert_eq!(keys[0], MomentKey::new(&[], 0));

    let mut partitions = Vec::with_capacity(d);
    for k in 0..d {
        let mut axis_sorted: Vec<f64> = inputs_frame
            .chunks_exact(d)
            .map(|row| row[k])
            .collect();
        axis_sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite inputs"));
        partitions.push(crate::partition::build_partition(
            &grid.axes[k],
            &axis_bandwidths[k],
            &axis_sorted,
        )?);
    }
    let box_sums =
        crate::partition::precompute_box_sums(inputs_frame, outputs, &partitions, &keys, policy)?;

    let plan = ExpansionPlan::new(d, strongest, &keys);
    let n_out = plan.outputs().len();
    let m = grid.total_points();
    let mut sums = KernelSumsGrid {
        outputs: plan.outputs().to_vec(),
        values: vec![0.0; m * n_out],
        counts: vec![0.0; m],
    };
    let mut z = vec![0.0; d];
    let mut h = vec![0.0; d];
    sweep_sums(&box_sums, &partitions, policy, |j, t_d| {
        sums.counts[j] = t_d[0];
        grid.node_into(j, &mut z);
        let mut rest = j;
        for k in (0..d).rev() {
            h[k] = axis_bandwidths[k][rest % grid.sizes[k]];
            rest /= grid.sizes[k];
        }
        plan.expand_into(t_d, &z, &h, n, &mut sums.values[j * n_out..(j + 1) * n_out]);
    });

    Ok(assemble_smoothers(&sums, grid, estimators))
}

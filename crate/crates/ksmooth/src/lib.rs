//! Exact fast-sum-updating kernel smoothing on rectilinear grids.
//!
//! This crate evaluates kernel density estimates, Nadaraya-Watson
//! regressions, and locally linear regressions over all grid points in
//! `O(M log M + N log N)` total work instead of the naive `O(M·N)`, by
//! decomposing polynomial-family kernels into separable terms and updating
//! the required moment sums with sliding windows. The result is exact (not
//! an approximation): up to floating-point roundoff it matches the direct
//! double loop, and an optional compensated-summation policy keeps that
//! roundoff near machine precision even across long slides.
//!
//! Modules:
//!
//! * [`kernels`]: the kernel family, separable decompositions, and the
//!   additive multivariate kernel.
//! * [`accumulator`]: plain and compensated (Møller-Kahan) summation.
//! * [`sliding1d`]: the univariate engine, one sliding pass per estimator.
//! * [`bandwidth`]: balloon k-nearest-neighbor bandwidths and the per-axis
//!   neighbor-fraction allocation.
//! * [`frame`]: PCA rotation, whitening, grid construction, interpolation.
//! * [`partition`]: per-axis box partitions and per-box monomial sums.
//! * [`sweep`]: the multivariate sliding sweep over boxed sums.
//! * [`oracle`]: the naive reference engine used for validation.

pub mod accumulator;
pub mod bandwidth;
pub mod error;
pub mod frame;
pub mod kernels;
mod linalg;
pub mod oracle;
pub mod partition;
pub mod sliding1d;
pub mod sweep;

pub use accumulator::{Accumulator, CompensatedSum, PlainSum, SumPolicy};
pub use bandwidth::{allocate_fractions, knn_bandwidth_1d, BandwidthAllocation, KnnBandwidth1D};
pub use error::{Error, Result};
pub use frame::{build_grid, cell_weights, fit_frame, interpolate, EvalGrid, RotatedFrame};
pub use kernels::{
    count_sweep_sums, decompose, eval_additive_kernel, eval_kernel, KernelDecomposition,
    KernelKind, MultivariateForm,
};
pub use oracle::{naive_smooth, EvalSpec, OracleResult};
pub use partition::{
    build_partition, enumerate_moment_keys, precompute_box_sums, AxisPartition, BoxSums,
    Estimator, MomentKey,
};
pub use sliding1d::{smooth1d, PointStatus, SmoothResult1D, SortedSample1D};
pub use sweep::{
    assemble_smoothers, expand_kernel_sums, smooth_grid, sweep_sums, sweep_sums_probed,
    ExpansionPlan, KernelSumsGrid, SmoothResultGrid, SweepProbe,
};

//! Error type shared across the engine.
//!
//! Every fallible operation in this crate returns [`Error`]. Variants carry the
//! offending values so callers can report precondition violations precisely.

use crate::kernels::KernelKind;

/// Errors raised by the smoothing engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A sequence that must be nondecreasing was not.
    #[error("monotonicity violation in {what}: value at index {index} decreases")]
    MonotonicityViolation {
        /// Which input sequence failed the check.
        what: &'static str,
        /// Index of the first offending element.
        index: usize,
    },

    /// A bandwidth (half-width) was zero, negative, or non-finite.
    #[error("bandwidth at index {index} is {value}, expected a finite positive value")]
    NonPositiveBandwidth {
        /// Position of the offending bandwidth.
        index: usize,
        /// The offending value.
        value: f64,
    },

    /// The kernel has no exact sliding-sum decomposition; only the naive engine
    /// can evaluate it.
    #[error("kernel {0:?} has no exact sliding-sum decomposition; use the naive engine")]
    UnsupportedFastKernel(KernelKind),

    /// The kernel's decomposition embeds the bandwidth in its source factors, so
    /// the fast engine requires one constant bandwidth across evaluation points.
    #[error("kernel {0:?} requires a constant bandwidth in the fast engine")]
    ConstantBandwidthRequired(KernelKind),

    /// Neighbor count out of range for the sample.
    #[error("neighbor count k={k} outside valid range 1..={n}")]
    InvalidK {
        /// Requested neighbor count.
        k: usize,
        /// Sample size.
        n: usize,
    },

    /// The requested coverage fraction cannot be met with per-axis fractions
    /// clipped to [2/n, 1].
    #[error("coverage fraction {p} below attainable minimum {min}")]
    InfeasibleFraction {
        /// Requested product fraction.
        p: f64,
        /// Smallest attainable product, (2/n)^d.
        min: f64,
    },

    /// The sample cannot support the requested construction (fewer than two
    /// points, or zero variance in every direction).
    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),

    /// No representable grid threshold separates identical neighboring values.
    #[error("partition threshold collides with input value {value} and cannot be shifted")]
    ThresholdCollision {
        /// The colliding coordinate.
        value: f64,
    },

    /// The average-form multivariate kernel normalizes by a box integral, which
    /// diverges for kernels with unbounded support.
    #[error("average-form multivariate kernel requires finite support, got {0:?}")]
    AverageFormNeedsFiniteSupport(KernelKind),

    /// Mismatched dimensions between related arguments.
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Which arguments disagree.
        what: &'static str,
        /// Expected dimension.
        expected: usize,
        /// Provided dimension.
        got: usize,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

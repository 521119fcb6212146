//! Running-sum accumulators for the sliding-window engines.
//!
//! Fast sum updating lives and dies by cancellation: a window sum is maintained
//! by adding entering samples and subtracting leaving ones, so after many
//! updates the plain floating-point total can drift far from the true window
//! content. Two accumulators with one interface cover the trade-off:
//!
//! * [`PlainSum`] is exact left-to-right f64 addition, the fastest option and
//!   the baseline the stabilized variant is measured against.
//! * [`CompensatedSum`] is a renormalizing Møller-Kahan accumulator. Each
//!   update computes the exact rounding error of the addition (branching on
//!   operand magnitude), folds it into a persistent compensation term, and
//!   renormalizes so the running value stays accurate to roughly twice working
//!   precision for window-style add/subtract streams.
//!
//! Subtraction is performed by adding the negated value; no separate method
//! exists. [`SumPolicy`] selects a variant at runtime where the engines are
//! generic over the accumulator type.

/// Interface shared by the running-sum variants.
///
/// Implementors are small value types; the sweep tables hold millions of them,
/// so `Copy + Default` keeps allocation and reset trivial.
pub trait Accumulator: Copy + Default {
    /// Folds `x` into the running total. Subtract by passing `-x`.
    fn add(&mut self, x: f64);

    /// Current running total.
    fn total(&self) -> f64;
}

/// Exact left-to-right f64 summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlainSum {
    sum: f64,
}

impl Accumulator for PlainSum {
    #[inline(always)]
    fn add(&mut self, x: f64) {
        self.sum += x;
    }

    #[inline(always)]
    fn total(&self) -> f64 {
        self.sum
    }
}

/// Renormalizing Møller-Kahan compensated summation.
///
/// Invariant: `sum + comp` tracks the true total to roughly double working
/// precision, with `|comp|` at most half an ulp of `sum` after every update
/// thanks to the renormalization step. `total()` therefore returns `sum`
/// directly.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl Accumulator for CompensatedSum {
    #[inline(always)]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        // Exact error of the addition above (two-sum with a magnitude branch).
        let e = if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        let carry = self.comp + e;
        // Renormalize so the error term stays below one ulp of the total.
        self.sum = t + carry;
        self.comp = carry - (self.sum - t);
    }

    #[inline(always)]
    fn total(&self) -> f64 {
        self.sum
    }
}

/// Runtime selector between [`PlainSum`] and [`CompensatedSum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumPolicy {
    /// Plain f64 accumulation.
    Plain,
    /// Compensated accumulation (default: accuracy first).
    #[default]
    Compensated,
}

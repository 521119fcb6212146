//! Balloon bandwidth selection: fast univariate K-nearest-neighbor half-widths
//! and the per-dimension coverage-fraction allocation used by the multivariate
//! engine.
//!
//! For sorted inputs and sorted evaluation points, the K nearest neighbors of
//! consecutive evaluation points come from index ranges that only move right,
//! so one pass with a crossover-midpoint guard computes every half-width in
//! O(M+N). The half-width is placed in the middle of the interval of values
//! that select the same K points, which keeps `z−h` and `z+h` nondecreasing,
//! exactly the precondition of the sliding-window smoothers.

use crate::error::{Error, Result};

/// K-nearest-neighbor half-widths for a batch of evaluation points.
#[derive(Debug, Clone)]
pub struct KnnBandwidth1D {
    /// Positive half-width per evaluation point.
    pub h: Vec<f64>,
    /// Neighbor count the windows were built for.
    pub k: usize,
}

impl KnnBandwidth1D {
    /// Window convention the exact-count guarantee refers to: for
    /// distinct-valued samples and evaluation points inside the sample hull,
    /// `[z−h, z+h)` contains exactly `k` points. Duplicated sample values can
    /// raise the count above `k`.
    pub const WINDOW_CONVENTION: &'static str = "half-open [z-h, z+h)";
}

/// Computes K-nearest-neighbor half-widths for every evaluation point in one
/// left-to-right pass.
///
/// The candidate neighbor range starts at the first `k` samples; it advances
/// by one whenever `z` passes the crossover midpoint `(x[iL] + x[iR+1])/2`,
/// at which point the right neighbor is closer than the left one. The
/// half-width is the midpoint of `[Hmin, Hmax)`, the interval of half-widths
/// whose half-open window captures exactly the current range (`Hmax` falls
/// back to the sample spread at the sample edges). Where rounding would make
/// a computed window edge regress behind its predecessor (possible when
/// adjacent evaluation points share an exact edge), the half-width is nudged
/// by ulps so `z−h` and `z+h` stay nondecreasing as computed.
///
/// # Errors
///
/// * [`Error::InvalidK`] unless `1 ≤ k ≤ x.len()`.
/// * [`Error::MonotonicityViolation`] if either array decreases.
/// * [`Error::NonPositiveBandwidth`] when a half-width degenerates to zero,
///   which happens only for samples without two distinct values near `z`.
pub fn knn_bandwidth_1d(x: &[f64], z: &[f64], k: usize) -> Result<KnnBandwidth1D> {
    let n = x.len();
    if k < 1 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    for i in 1..n {
        if !(x[i - 1] <= x[i]) {
            return Err(Error::MonotonicityViolation {
                what: "knn sample x",
                index: i,
            });
        }
    }
    for i in 1..z.len() {
        if !(z[i - 1] <= z[i]) {
            return Err(Error::MonotonicityViolation {
                what: "knn evaluation z",
                index: i,
            });
        }
    }

    let dmax = x[n - 1] - x[0];
    let mut il = 0usize;
    let mut ir = k - 1;
    let crossover = |il: usize, ir: usize| {
        if ir + 1 < n {
            0.5 * (x[il] + x[ir + 1])
        } else {
            f64::INFINITY
        }
    };
    let mut cm = crossover(il, ir);

    let mut h = Vec::with_capacity(z.len());
    let mut prev_lo = f64::NEG_INFINITY;
    let mut prev_hi = f64::NEG_INFINITY;
    let mut prev_h = f64::NAN;
    for (index, &zm) in z.iter().enumerate() {
        while zm > cm {
            il += 1;
            ir += 1;
            cm = crossover(il, ir);
        }
        let hmin = (zm - x[il]).max(x[ir] - zm);
        let left_room = if il > 0 { zm - x[il - 1] } else { dmax };
        let right_room = if ir + 1 < n { x[ir + 1] - zm } else { dmax };
        let mut hm = 0.5 * (hmin + left_room.min(right_room));
        // The exact window edges are nondecreasing, but rounding the
        // half-width can push a computed edge an ulp behind its predecessor,
        // which the sliding-window validators reject. Nudge by ulps until
        // both computed edges are monotone again; the previous half-width is
        // always admissible (f64 addition and subtraction are monotone in
        // zm), so a bounded nudge or the fallback settles every case.
        if zm - hm < prev_lo || zm + hm < prev_hi {
            for _ in 0..4 {
                while zm + hm < prev_hi {
                    hm = hm.next_up();
                }
                while zm - hm < prev_lo {
                    hm = hm.next_down();
                }
                if zm + hm >= prev_hi {
                    break;
                }
            }
            if zm - hm < prev_lo || zm + hm < prev_hi {
                hm = prev_h;
            }
        }
        if !(hm > 0.0) {
            return Err(Error::NonPositiveBandwidth {
                index,
                value: hm,
            });
        }
        prev_lo = zm - hm;
        prev_hi = zm + hm;
        prev_h = hm;
        h.push(hm);
    }
    Ok(KnnBandwidth1D { h, k })
}

/// Per-axis coverage fractions and neighbor counts for the multivariate
/// engine.
#[derive(Debug, Clone)]
pub struct BandwidthAllocation {
    /// Requested global coverage fraction, `Π fractions ≈ p`.
    pub p: f64,
    /// Per-axis fractions, each in `[2/n, 1]`.
    pub fractions: Vec<f64>,
    /// Per-axis neighbor counts `round(fraction·n)`, each in `[2, n]`.
    pub neighbors: Vec<usize>,
}

/// Splits a global coverage fraction `p` into per-axis fractions inversely
/// proportional to the singular values, so that short axes get wide relative
/// windows and the product of fractions equals `p`.
///
/// The allocation is the water-filling fixed point of clip-and-renormalize:
/// every fraction is `clamp(c/σ_k, 2/n, 1)` for one multiplier `c` (axes with
/// `σ_k = 0` sit at 1), and `c` is found by bisection on the monotone product.
/// At most the attainable range `[(2/n)^f, 1]` is representable, `f` counting
/// the positive singular values.
///
/// # Errors
///
/// * [`Error::DegenerateSample`] when every singular value is zero.
/// * [`Error::InfeasibleFraction`] when `p` is below the attainable minimum.
pub fn allocate_fractions(
    singular_values: &[f64],
    p: f64,
    n: usize,
) -> Result<BandwidthAllocation> {
    assert!(
        p > 0.0 && p <= 1.0,
        "coverage fraction must lie in (0, 1], got {p}"
    );
    assert!(!singular_values.is_empty());

    let sigma: Vec<f64> = singular_values.iter().map(|&s| s.max(0.0)).collect();
    let sigma_max = sigma.iter().copied().fold(0.0_f64, f64::max);
    if sigma_max == 0.0 {
        return Err(Error::DegenerateSample("all singular values are zero"));
    }

    let low = 2.0 / n as f64;
    let product_at = |c: f64| -> f64 {
        sigma
            .iter()
            .map(|&s| if s > 0.0 { (c / s).clamp(low, 1.0) } else { 1.0 })
            .product()
    };

    let min = product_at(0.0);
    if p < min {
        return Err(Error::InfeasibleFraction { p, min });
    }

    let mut lo = 0.0_f64;
    let mut hi = sigma_max;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if product_at(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = hi;

    let fractions: Vec<f64> = sigma
        .iter()
        .map(|&s| if s > 0.0 { (c / s).clamp(low, 1.0) } else { 1.0 })
        .collect();
    let neighbors: Vec<usize> = fractions
        .iter()
        .map(|&f| ((f * n as f64).round() as usize).clamp(2, n))
        .collect();

    Ok(BandwidthAllocation {
        p,
        fractions,
        neighbors,
    })
}

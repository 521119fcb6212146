//! Fast univariate kernel smoothing with a two-pointer sliding window.
//!
//! Given a sample sorted by `x`, nondecreasing evaluation points `z`, and
//! bandwidths `h` such that `z−h` and `z+h` are also nondecreasing, every
//! window `[z−h, z+h)` can be reached from the previous one by adding samples
//! on the right and removing samples on the left. Each kernel decomposition
//! term needs one family of window sums `Σ source_factor(xᵢ)·xᵢᵖ·yᵢ^q`, so a
//! full smoothing pass over all M evaluation points costs O(M+N) pointer
//! moves instead of the naive O(M·N) kernel evaluations.
//!
//! Three estimators come out of the same window sums: the kernel density
//! estimate, the Nadaraya-Watson regression (ratio of the q=1 and q=0 kernel
//! sums), and the locally linear regression (2×2 weighted least squares in
//! the window, with a Nadaraya-Watson fallback when the local design matrix
//! is singular).
//!
//! Inputs are centered and scaled internally before any summation and the
//! density is transformed back, so callers get estimates in their original
//! coordinates; regression estimates are invariant to that affine change.
//! Note the exponential source factors of the Laplacian decomposition: they
//! overflow if the sample spread divided by the bandwidth exceeds roughly
//! 700 after normalization, an inherent limit of that decomposition.

use crate::accumulator::{Accumulator, CompensatedSum, PlainSum, SumPolicy};
use crate::error::{Error, Result};
use crate::kernels::{decompose, KernelDecomposition, KernelKind, Piece, SourceFactor};
use crate::linalg::solve_spd;

/// Per-evaluation-point outcome flag.
///
/// Ordered by severity: interpolation of grid results reports the worst flag
/// among the surrounding grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointStatus {
    /// All requested estimators are well defined.
    Ok,
    /// The locally linear design matrix was singular; the Nadaraya-Watson
    /// value was substituted.
    SingularFallback,
    /// No sample points (or no kernel mass) in the window; regressions are
    /// undefined and reported as NaN, the density is exactly 0.
    EmptyWindow,
}

impl PointStatus {
    /// Lowercase name used in reports and CSV output.
    pub fn name(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::SingularFallback => "singular_fallback",
            PointStatus::EmptyWindow => "empty_window",
        }
    }
}

/// A univariate sample sorted by `x`, with optional responses `y`.
#[derive(Debug, Clone)]
pub struct SortedSample1D {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl SortedSample1D {
    /// Validates that `x` is nondecreasing and pairs it with `y`
    /// (zeros when absent).
    ///
    /// # Errors
    ///
    /// [`Error::MonotonicityViolation`] if `x` decreases anywhere (NaN counts
    /// as a violation); [`Error::DimensionMismatch`] if `y` is present with a
    /// different length.
    pub fn new(x: Vec<f64>, y: Option<Vec<f64>>) -> Result<Self> {
        for i in 1..x.len() {
            if !(x[i - 1] <= x[i]) {
                return Err(Error::MonotonicityViolation {
                    what: "sample x",
                    index: i,
                });
            }
        }
        let y = match y {
            Some(y) => {
                if y.len() != x.len() {
                    return Err(Error::DimensionMismatch {
                        what: "sample y",
                        expected: x.len(),
                        got: y.len(),
                    });
                }
                y
            }
            None => vec![0.0; x.len()],
        };
        Ok(Self { x, y })
    }

    /// Number of sample points.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    /// True when the sample has no points.
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Sorted coordinates.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Responses, aligned with [`SortedSample1D::x`].
    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

/// One family of sliding sums `Σᵢ source(xᵢ)·xᵢᵖ·yᵢ^q` for `p ∈ 0..=pmax`,
/// `q ∈ {0, 1}`, over a half-open window that only ever moves right.
///
/// `il`/`ir` count the samples removed on the left and added on the right, so
/// the live window is the index range `il..ir`.
#[derive(Debug, Clone)]
struct ChannelWindow<A> {
    sums: Vec<A>,
    pmax: u32,
    il: usize,
    ir: usize,
    piece: Piece,
    source: SourceFactor,
    /// Bandwidth baked into the source factor; only read by the
    /// bandwidth-dependent factors, which require it constant.
    h_source: f64,
}

impl<A: Accumulator> ChannelWindow<A> {
    fn new(piece: Piece, source: SourceFactor, pmax: u32, h_source: f64) -> Self {
        Self {
            sums: vec![A::default(); 2 * (pmax as usize + 1)],
            pmax,
            il: 0,
            ir: 0,
            piece,
            source,
            h_source,
        }
    }

    #[inline]
    fn apply(&mut self, x: f64, y: f64, sign: f64) {
        let mut xp = sign * self.source.eval(x, self.h_source);
        for p in 0..=self.pmax as usize {
            self.sums[2 * p].add(xp);
            self.sums[2 * p + 1].add(xp * y);
            xp *= x;
        }
    }

    /// Moves the window to `[left, right)`: additions first, then removals,
    /// each pointer only advancing.
    fn update(&mut self, x: &[f64], y: &[f64], left: f64, right: f64) {
        let n = x.len();
        while self.ir < n && x[self.ir] < right {
            self.apply(x[self.ir], y[self.ir], 1.0);
            self.ir += 1;
        }
        while self.il < n && x[self.il] < left {
            self.apply(x[self.il], y[self.il], -1.0);
            self.il += 1;
        }
    }

    #[inline]
    fn sum(&self, p: u32, q: u32) -> f64 {
        self.sums[2 * p as usize + q as usize].total()
    }

    #[inline]
    fn count(&self) -> usize {
        self.ir - self.il
    }
}

/// Sliding moment sums `S[p1, p2] = Σᵢ xᵢ^{p1}·yᵢ^{p2}` for `p1 ∈ 0..=4`,
/// `p2 ∈ {0, 1}`, over a half-open window moved by [`WindowMoments::window_update`].
///
/// This is the raw-sum table of the univariate fast smoother; `p1` runs to 4
/// as the algorithm prescribes even though the locally linear system reads at
/// most `S[4, 0]` and `S[3, 1]`.
#[derive(Debug, Clone)]
pub struct WindowMoments<A: Accumulator> {
    chan: ChannelWindow<A>,
}

impl<A: Accumulator> WindowMoments<A> {
    /// An empty window positioned before the first sample.
    pub fn new() -> Self {
        Self {
            chan: ChannelWindow::new(Piece::FullWindow, SourceFactor::One, 4, 1.0),
        }
    }

    /// Moves the window to `{i : left ≤ xᵢ < right}`. Both bounds must be
    /// weakly greater than the previous call's; additions occur before
    /// removals.
    pub fn window_update(&mut self, sample: &SortedSample1D, left: f64, right: f64) {
        self.chan.update(sample.x(), sample.y(), left, right);
    }

    /// Current value of `S[p1, p2]`; `p1 ≤ 4`, `p2 ≤ 1`.
    pub fn moment(&self, p1: u32, p2: u32) -> f64 {
        assert!(p1 <= 4 && p2 <= 1, "moment index ({p1},{p2}) out of range");
        self.chan.sum(p1, p2)
    }

    /// Index bounds `(iL, iR)` of the live window `iL..iR`.
    pub fn bounds(&self) -> (usize, usize) {
        (self.chan.il, self.chan.ir)
    }

    /// Number of samples currently inside the window.
    pub fn count(&self) -> usize {
        self.chan.count()
    }
}

impl<A: Accumulator> Default for WindowMoments<A> {
    fn default() -> Self {
        Self::new()
    }
}

/// Estimates at every evaluation point of a univariate smoothing pass.
#[derive(Debug, Clone)]
pub struct SmoothResult1D {
    /// Kernel density estimate; nonnegative, exactly 0 on empty windows.
    pub density: Vec<f64>,
    /// Nadaraya-Watson regression; NaN on empty windows.
    pub nw: Vec<f64>,
    /// Locally linear regression; NaN on empty windows, Nadaraya-Watson value
    /// where the local system is singular.
    pub loclin: Vec<f64>,
    /// Per-point outcome flag.
    pub status: Vec<PointStatus>,
}

fn check_nondecreasing(
    what: &'static str,
    values: impl Iterator<Item = f64>,
) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for (index, v) in values.enumerate() {
        if !(prev <= v) {
            return Err(Error::MonotonicityViolation { what, index });
        }
        prev = v;
    }
    Ok(())
}

/// Fast univariate kernel smoothing: density, Nadaraya-Watson, and locally
/// linear estimates at every `z[m]` with bandwidth `h[m]`, in O(M+N) after
/// sorting.
///
/// # Errors
///
/// * [`Error::DimensionMismatch`] if `z` and `h` differ in length.
/// * [`Error::MonotonicityViolation`] unless `z`, `z−h`, and `z+h` are all
///   nondecreasing (the sliding windows must only move right).
/// * [`Error::NonPositiveBandwidth`] if any `h[m]` is not finite and positive.
/// * [`Error::UnsupportedFastKernel`] if the kernel has no separable
///   decomposition.
/// * [`Error::ConstantBandwidthRequired`] if the decomposition embeds the
///   bandwidth in its source factors (Laplacian, Cosine) and `h` varies.
pub fn smooth1d(
    sample: &SortedSample1D,
    z: &[f64],
    h: &[f64],
    kind: KernelKind,
    policy: SumPolicy,
) -> Result<SmoothResult1D> {
    if z.len() != h.len() {
        return Err(Error::DimensionMismatch {
            what: "evaluation points vs bandwidths",
            expected: z.len(),
            got: h.len(),
        });
    }
    for (index, &hm) in h.iter().enumerate() {
        if !(hm > 0.0 && hm.is_finite()) {
            return Err(Error::NonPositiveBandwidth { index, value: hm });
        }
    }
    check_nondecreasing("z", z.iter().copied())?;
    check_nondecreasing("z - h", z.iter().zip(h).map(|(&z, &h)| z - h))?;
    check_nondecreasing("z + h", z.iter().zip(h).map(|(&z, &h)| z + h))?;

    let decomp = decompose(kind)?;
    if !decomp.supports_balloon && h.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::ConstantBandwidthRequired(kind));
    }

    match policy {
        SumPolicy::Plain => Ok(run::<PlainSum>(sample, z, h, &decomp)),
        SumPolicy::Compensated => Ok(run::<CompensatedSum>(sample, z, h, &decomp)),
    }
}

/// Center and scale of a coordinate array: mean, and sample standard
/// deviation replaced by 1 when zero or undefined.
fn center_scale(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n < 2 {
        return (x.first().copied().unwrap_or(0.0), 1.0);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd > 0.0 && sd.is_finite() {
        (mean, sd)
    } else {
        (mean, 1.0)
    }
}

fn run<A: Accumulator>(
    sample: &SortedSample1D,
    z: &[f64],
    h: &[f64],
    decomp: &KernelDecomposition,
) -> SmoothResult1D {
    let n = sample.len();
    let (mu, scale) = center_scale(sample.x());
    let xn: Vec<f64> = sample.x().iter().map(|&v| (v - mu) / scale).collect();
    let y = sample.y();
    let zn: Vec<f64> = z.iter().map(|&v| (v - mu) / scale).collect();
    let hn: Vec<f64> = h.iter().map(|&v| v / scale).collect();
    let h_source = hn.first().copied().unwrap_or(1.0);

    // One channel per distinct (piece, source factor); its power range covers
    // every term routed to it plus the p1 ∈ 0..=2 shift of the kernel sums.
    let mut specs: Vec<(Piece, SourceFactor, u32)> = Vec::new();
    let mut term_channel = Vec::with_capacity(decomp.terms.len());
    for term in &decomp.terms {
        let pos = specs
            .iter()
            .position(|&(p, s, _)| p == term.piece && s == term.source_factor);
        match pos {
            Some(i) => {
                specs[i].2 = specs[i].2.max(term.source_power + 2);
                term_channel.push(i);
            }
            None => {
                term_channel.push(specs.len());
                specs.push((term.piece, term.source_factor, term.source_power + 2));
            }
        }
    }
    let mut channels: Vec<ChannelWindow<A>> = specs
        .iter()
        .map(|&(piece, source, pmax)| ChannelWindow::new(piece, source, pmax, h_source))
        .collect();

    // One representative channel per distinct piece; their windows partition
    // the kernel support, so summing their counts detects empty windows.
    let mut count_reps: Vec<usize> = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        if specs[..i].iter().all(|other| other.0 != spec.0) {
            count_reps.push(i);
        }
    }

    let m_total = z.len();
    let mut density = vec![0.0; m_total];
    let mut nw = vec![f64::NAN; m_total];
    let mut loclin = vec![f64::NAN; m_total];
    let mut status = vec![PointStatus::Ok; m_total];

    for m in 0..m_total {
        for ch in &mut channels {
            let (left, right) = ch.piece.window(zn[m], hn[m]);
            ch.update(&xn, y, left, right);
        }
        let count: usize = count_reps.iter().map(|&i| channels[i].count()).sum();

        // Kernel sums SK[p1][q] = Σᵢ K((xᵢ−z)/h)·xᵢ^{p1}·yᵢ^q, up to the
        // decomposition's leading constant.
        let mut sk = [[0.0_f64; 2]; 3];
        for (ti, term) in decomp.terms.iter().enumerate() {
            let ch = &channels[term_channel[ti]];
            let tf = (term.target_factor)(zn[m], hn[m]);
            for (p1, row) in sk.iter_mut().enumerate() {
                for (q, out) in row.iter_mut().enumerate() {
                    *out += tf * ch.sum(p1 as u32 + term.source_power, q as u32);
                }
            }
        }

        density[m] = (decomp.constant * sk[0][0] / (hn[m] * n as f64) / scale).max(0.0);
        if count == 0 || !(sk[0][0] > 0.0) {
            density[m] = 0.0;
            status[m] = PointStatus::EmptyWindow;
            continue;
        }
        nw[m] = sk[0][1] / sk[0][0];
        let a = [sk[0][0], sk[1][0], sk[1][0], sk[2][0]];
        let b = [sk[0][1], sk[1][1]];
        match solve_spd(&a, &b, 2) {
            Some(beta) => loclin[m] = beta[0] + beta[1] * zn[m],
            None => {
                loclin[m] = nw[m];
                status[m] = PointStatus::SingularFallback;
            }
        }
    }

    SmoothResult1D {
        density,
        nw,
        loclin,
        status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_density_is_kernel_at_zero() {
        let sample = SortedSample1D::new(vec![0.0], None).unwrap();
        let out = smooth1d(
            &sample,
            &[0.0],
            &[1.0],
            KernelKind::Epanechnikov,
            SumPolicy::Plain,
        )
        .unwrap();
        assert_eq!(out.density, vec![0.75]);
        assert_eq!(out.status, vec![PointStatus::SingularFallback]);
    }

    #[test]
    fn window_membership_matches_half_open_convention() {
        let sample =
            SortedSample1D::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], None).unwrap();
        let mut moments = WindowMoments::<crate::accumulator::PlainSum>::new();
        // z=2, h=1.5 → [0.5, 3.5) holds {1,2,3}.
        moments.window_update(&sample, 0.5, 3.5);
        assert_eq!(moments.moment(0, 0), 3.0);
        // z=4, h=1.5 → [2.5, 5.5) holds {3,4,5}.
        moments.window_update(&sample, 2.5, 5.5);
        assert_eq!(moments.moment(0, 0), 3.0);
        assert_eq!(moments.moment(1, 0), 12.0);
        assert_eq!(moments.bounds(), (2, 5));
    }

    #[test]
    fn window_update_shift_adds_then_removes() {
        let sample = SortedSample1D::new(vec![1.0, 2.0, 3.0], None).unwrap();
        let mut moments = WindowMoments::<crate::accumulator::PlainSum>::new();
        moments.window_update(&sample, 0.5, 2.5);
        assert_eq!(moments.moment(0, 0), 2.0);
        moments.window_update(&sample, 1.5, 3.5);
        assert_eq!(moments.moment(0, 0), 2.0);
        assert_eq!(moments.moment(1, 0), 5.0);
        // Degenerate shift: same bounds, no change.
        moments.window_update(&sample, 1.5, 3.5);
        assert_eq!(moments.moment(1, 0), 5.0);
        // Advancing past all points empties the sums.
        moments.window_update(&sample, 10.0, 11.0);
        assert_eq!(moments.moment(0, 0), 0.0);
        assert_eq!(moments.count(), 0);
    }

    #[test]
    fn loclin_recovers_affine_data() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 / 10.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| 2.0 + 3.0 * v).collect();
        let sample = SortedSample1D::new(x, Some(y)).unwrap();
        let z = [1.0, 2.5, 4.0];
        let h = [1.0, 1.0, 1.0];
        let out = smooth1d(
            &sample,
            &z,
            &h,
            KernelKind::Epanechnikov,
            SumPolicy::Compensated,
        )
        .unwrap();
        for (m, &zm) in z.iter().enumerate() {
            assert!(
                (out.loclin[m] - (2.0 + 3.0 * zm)).abs() < 1e-8,
                "loclin at {zm}: {}",
                out.loclin[m]
            );
            assert_eq!(out.status[m], PointStatus::Ok);
        }
    }

    #[test]
    fn precondition_violations_error_out() {
        let sample = SortedSample1D::new(vec![0.0, 1.0], None).unwrap();
        let err = smooth1d(
            &sample,
            &[1.0, 0.0],
            &[1.0, 1.0],
            KernelKind::Epanechnikov,
            SumPolicy::Plain,
        )
        .unwrap_err();
        assert!(matches!(err, Error::MonotonicityViolation { what: "z", .. }));

        // z nondecreasing but z−h decreasing.
        let err = smooth1d(
            &sample,
            &[0.0, 0.1],
            &[0.5, 2.0],
            KernelKind::Epanechnikov,
            SumPolicy::Plain,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::MonotonicityViolation { what: "z - h", .. }
        ));

        let err = smooth1d(
            &sample,
            &[0.0],
            &[0.0],
            KernelKind::Epanechnikov,
            SumPolicy::Plain,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonPositiveBandwidth { index: 0, .. }));

        let err = smooth1d(
            &sample,
            &[0.0, 1.0],
            &[0.5, 0.6],
            KernelKind::Laplacian,
            SumPolicy::Plain,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::ConstantBandwidthRequired(KernelKind::Laplacian)
        ));
    }

    #[test]
    fn empty_window_yields_zero_density_and_nan_regressions() {
        let sample = SortedSample1D::new(vec![0.0, 0.1], Some(vec![1.0, 2.0])).unwrap();
        let out = smooth1d(
            &sample,
            &[5.0],
            &[1.0],
            KernelKind::Epanechnikov,
            SumPolicy::Plain,
        )
        .unwrap();
        assert_eq!(out.density[0], 0.0);
        assert!(out.nw[0].is_nan() && out.loclin[0].is_nan());
        assert_eq!(out.status[0], PointStatus::EmptyWindow);
    }
}

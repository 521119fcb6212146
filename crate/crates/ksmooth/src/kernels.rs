//! Univariate kernels, their separable decompositions, and the additive
//! multivariate Epanechnikov kernel.
//!
//! Ten classical second-order kernels are provided. Seven of them admit an
//! exact rewrite of the weighted sum Σᵢ K((xᵢ−z)/h)·g(xᵢ) into a handful of
//! window sums that a two-pointer sweep can maintain incrementally: each
//! [`SeparableTerm`] contributes `target_factor(z,h) · Σᵢ source_factor(xᵢ)·xᵢᵖ`
//! over one window piece, and the term sums (times a leading constant)
//! reproduce the kernel sum exactly in real arithmetic. The remaining three
//! kinds (Tricube, HyperbolicCosine, Silverman) have no such finite
//! decomposition and are served by the naive engine only.
//!
//! Window convention: every window is half-open, `[z−h, z+h)`. The pointwise
//! evaluators adopt the same convention so the naive and fast engines agree
//! on boundary samples; only the discontinuous Rectangular kernel is affected
//! (`eval_kernel(Rectangular, -1.0) == 0.5`, `eval_kernel(Rectangular, 1.0) == 0`).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// The supported kernel functions.
///
/// All ten integrate to 1 over their support. Every kind except Silverman is
/// nonnegative; Silverman is the classical fourth-order kernel
/// `½·e^{−|u|/√2}·sin(|u|/√2 + π/4)` whose tail oscillates below zero beyond
/// `|u| ≈ 3.33`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `½` on `[−1, 1)`.
    Rectangular,
    /// `1 − |u|` on `[−1, 1)`.
    Triangular,
    /// `¾(1 − u²)` on `[−1, 1)`.
    Epanechnikov,
    /// `15/16 (1 − u²)²` on `[−1, 1)`.
    Biweight,
    /// `35/32 (1 − u²)³` on `[−1, 1)`.
    Triweight,
    /// `70/81 (1 − |u|³)³` on `[−1, 1)`.
    Tricube,
    /// `(π/4)·cos(πu/2)` on `[−1, 1)`.
    Cosine,
    /// `(2 − cosh(cu)) / (4 − 2·sinh(c)/c)` on `[−1, 1)` with `c = ln(2+√3)`,
    /// so `cosh(c) = 2` and the kernel vanishes at the support boundary.
    HyperbolicCosine,
    /// `½·e^{−|u|}` on the whole line.
    Laplacian,
    /// `½·e^{−|u|/√2}·sin(|u|/√2 + π/4)` on the whole line.
    Silverman,
}

impl KernelKind {
    /// All kinds, in declaration order.
    pub const ALL: [KernelKind; 10] = [
        KernelKind::Rectangular,
        KernelKind::Triangular,
        KernelKind::Epanechnikov,
        KernelKind::Biweight,
        KernelKind::Triweight,
        KernelKind::Tricube,
        KernelKind::Cosine,
        KernelKind::HyperbolicCosine,
        KernelKind::Laplacian,
        KernelKind::Silverman,
    ];

    /// Lowercase name used on command lines and in reports.
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Rectangular => "rectangular",
            KernelKind::Triangular => "triangular",
            KernelKind::Epanechnikov => "epanechnikov",
            KernelKind::Biweight => "biweight",
            KernelKind::Triweight => "triweight",
            KernelKind::Tricube => "tricube",
            KernelKind::Cosine => "cosine",
            KernelKind::HyperbolicCosine => "hyperbolic-cosine",
            KernelKind::Laplacian => "laplacian",
            KernelKind::Silverman => "silverman",
        }
    }

    /// Inverse of [`KernelKind::name`].
    pub fn from_name(name: &str) -> Option<KernelKind> {
        KernelKind::ALL.iter().copied().find(|k| k.name() == name)
    }

    /// True for kernels that vanish outside `[−1, 1)`.
    pub fn has_finite_support(self) -> bool {
        !matches!(self, KernelKind::Laplacian | KernelKind::Silverman)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        KernelKind::from_name(s).ok_or_else(|| {
            let names: Vec<&str> = KernelKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown kernel {s:?}; expected one of {}", names.join(", "))
        })
    }
}

/// `c = ln(2+√3)` and the closed-form normalization of the HyperbolicCosine
/// kernel, computed once.
fn hyperbolic_cosine_params() -> (f64, f64) {
    static PARAMS: OnceLock<(f64, f64)> = OnceLock::new();
    *PARAMS.get_or_init(|| {
        let c = (2.0 + 3.0_f64.sqrt()).ln();
        // sinh(c) = √3 exactly, so the support integral is 4 − 2√3/c.
        let norm = 1.0 / (4.0 - 2.0 * 3.0_f64.sqrt() / c);
        (c, norm)
    })
}

/// Evaluates the kernel at the scaled offset `u = (x − z)/h`.
///
/// Finite-support kernels return exactly 0 outside `[−1, 1)`.
pub fn eval_kernel(kind: KernelKind, u: f64) -> f64 {
    match kind {
        KernelKind::Laplacian => 0.5 * (-u.abs()).exp(),
        KernelKind::Silverman => {
            let t = u.abs() / SQRT_2;
            0.5 * (-t).exp() * (t + FRAC_PI_4).sin()
        }
        _ => {
            if !(-1.0..1.0).contains(&u) {
                return 0.0;
            }
            match kind {
                KernelKind::Rectangular => 0.5,
                KernelKind::Triangular => 1.0 - u.abs(),
                KernelKind::Epanechnikov => 0.75 * (1.0 - u * u),
                KernelKind::Biweight => {
                    let w = 1.0 - u * u;
                    0.9375 * w * w
                }
                KernelKind::Triweight => {
                    let w = 1.0 - u * u;
                    (35.0 / 32.0) * w * w * w
                }
                KernelKind::Tricube => {
                    let w = 1.0 - u.abs().powi(3);
                    (70.0 / 81.0) * w * w * w
                }
                KernelKind::Cosine => FRAC_PI_4 * (FRAC_PI_2 * u).cos(),
                KernelKind::HyperbolicCosine => {
                    let (c, norm) = hyperbolic_cosine_params();
                    norm * (2.0 - (c * u).cosh())
                }
                KernelKind::Laplacian | KernelKind::Silverman => unreachable!(),
            }
        }
    }
}

/// The x-dependent factor of a separable term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFactor {
    /// `1` (plain moment sums).
    One,
    /// `exp(x/h)`.
    ExpPosOverH,
    /// `exp(−x/h)`.
    ExpNegOverH,
    /// `cos(πx/(2h))`.
    CosHalfPiOverH,
    /// `sin(πx/(2h))`.
    SinHalfPiOverH,
}

impl SourceFactor {
    /// Evaluates the factor at sample coordinate `x` with bandwidth `h`.
    ///
    /// `h` only matters for the non-identity factors, which is why those
    /// decompositions demand one constant bandwidth.
    #[inline]
    pub fn eval(self, x: f64, h: f64) -> f64 {
        match self {
            SourceFactor::One => 1.0,
            SourceFactor::ExpPosOverH => (x / h).exp(),
            SourceFactor::ExpNegOverH => (-x / h).exp(),
            SourceFactor::CosHalfPiOverH => (FRAC_PI_2 * x / h).cos(),
            SourceFactor::SinHalfPiOverH => (FRAC_PI_2 * x / h).sin(),
        }
    }

    /// True when the factor depends on the bandwidth.
    pub fn depends_on_bandwidth(self) -> bool {
        !matches!(self, SourceFactor::One)
    }
}

/// The window piece a separable term sums over, relative to the evaluation
/// point `z`. All pieces are half-open on the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    /// `[z−h, z+h)`.
    FullWindow,
    /// `[z−h, z)`.
    LeftOfZ,
    /// `[z, z+h)`.
    RightOfZ,
    /// `(−∞, z)`.
    HalfLineLeft,
    /// `[z, +∞)`.
    HalfLineRight,
}

impl Piece {
    /// Half-open bounds `[lo, hi)` of the piece around `z`.
    #[inline]
    pub fn window(self, z: f64, h: f64) -> (f64, f64) {
        match self {
            Piece::FullWindow => (z - h, z + h),
            Piece::LeftOfZ => (z - h, z),
            Piece::RightOfZ => (z, z + h),
            Piece::HalfLineLeft => (f64::NEG_INFINITY, z),
            Piece::HalfLineRight => (z, f64::INFINITY),
        }
    }

    /// Membership test under the half-open convention.
    #[inline]
    pub fn contains(self, x: f64, z: f64, h: f64) -> bool {
        let (lo, hi) = self.window(z, h);
        lo <= x && x < hi
    }
}

/// One term of a kernel's separable decomposition: contributes
/// `target_factor(z, h) · Σᵢ source_factor(xᵢ, h) · xᵢ^source_power`
/// summed over the samples inside `piece`.
#[derive(Debug, Clone, Copy)]
pub struct SeparableTerm {
    /// Coefficient depending only on the evaluation point and bandwidth.
    pub target_factor: fn(f64, f64) -> f64,
    /// Power of the sample coordinate inside the window sum.
    pub source_power: u32,
    /// Sample-dependent factor inside the window sum.
    pub source_factor: SourceFactor,
    /// Which window piece the sum runs over.
    pub piece: Piece,
}

/// Exact decomposition of a kernel into fast-updatable window sums.
#[derive(Debug, Clone)]
pub struct KernelDecomposition {
    /// The decomposed kernel.
    pub kind: KernelKind,
    /// Leading constant multiplying the sum of all terms (the kernel's
    /// normalization factor, e.g. ¾ for Epanechnikov).
    pub constant: f64,
    /// The separable terms.
    pub terms: Vec<SeparableTerm>,
    /// Whether per-evaluation-point (balloon) bandwidths are admissible.
    /// False when any source factor embeds the bandwidth (Laplacian, Cosine),
    /// which forces one constant bandwidth across evaluation points.
    pub supports_balloon: bool,
}

impl KernelDecomposition {
    /// Reference evaluation of the decomposition at a single sample: the sum
    /// of term contributions for `x`, which equals `eval_kernel(kind, (x−z)/h)`
    /// in real arithmetic. Used to validate decompositions; the engines use
    /// window sums instead.
    pub fn reconstruct(&self, x: f64, z: f64, h: f64) -> f64 {
        let mut sum = 0.0;
        for term in &self.terms {
            if term.piece.contains(x, z, h) {
                sum += (term.target_factor)(z, h)
                    * term.source_factor.eval(x, h)
                    * x.powi(term.source_power as i32);
            }
        }
        self.constant * sum
    }
}

/// Coefficients of `1 − (x−z)²/h² = a + b·x + c·x²`.
#[inline]
pub(crate) fn quad_coeffs(z: f64, h: f64) -> (f64, f64, f64) {
    let h2 = h * h;
    (1.0 - z * z / h2, 2.0 * z / h2, -1.0 / h2)
}

fn t_one(_z: f64, _h: f64) -> f64 {
    1.0
}

fn t_tri_right_0(z: f64, h: f64) -> f64 {
    1.0 + z / h
}
fn t_tri_right_1(_z: f64, h: f64) -> f64 {
    -1.0 / h
}
fn t_tri_left_0(z: f64, h: f64) -> f64 {
    1.0 - z / h
}
fn t_tri_left_1(_z: f64, h: f64) -> f64 {
    1.0 / h
}

fn t_quad_a(z: f64, h: f64) -> f64 {
    quad_coeffs(z, h).0
}
fn t_quad_b(z: f64, h: f64) -> f64 {
    quad_coeffs(z, h).1
}
fn t_quad_c(z: f64, h: f64) -> f64 {
    quad_coeffs(z, h).2
}

fn t_bi_0(z: f64, h: f64) -> f64 {
    let (a, _, _) = quad_coeffs(z, h);
    a * a
}
fn t_bi_1(z: f64, h: f64) -> f64 {
    let (a, b, _) = quad_coeffs(z, h);
    2.0 * a * b
}
fn t_bi_2(z: f64, h: f64) -> f64 {
    let (a, b, c) = quad_coeffs(z, h);
    b * b + 2.0 * a * c
}
fn t_bi_3(z: f64, h: f64) -> f64 {
    let (_, b, c) = quad_coeffs(z, h);
    2.0 * b * c
}
fn t_bi_4(z: f64, h: f64) -> f64 {
    let (_, _, c) = quad_coeffs(z, h);
    c * c
}

fn t_tw_0(z: f64, h: f64) -> f64 {
    let (a, _, _) = quad_coeffs(z, h);
    a * a * a
}
fn t_tw_1(z: f64, h: f64) -> f64 {
    let (a, b, _) = quad_coeffs(z, h);
    3.0 * a * a * b
}
fn t_tw_2(z: f64, h: f64) -> f64 {
    let (a, b, c) = quad_coeffs(z, h);
    3.0 * a * (b * b + a * c)
}
fn t_tw_3(z: f64, h: f64) -> f64 {
    let (a, b, c) = quad_coeffs(z, h);
    b * (b * b + 6.0 * a * c)
}
fn t_tw_4(z: f64, h: f64) -> f64 {
    let (a, b, c) = quad_coeffs(z, h);
    3.0 * c * (b * b + a * c)
}
fn t_tw_5(z: f64, h: f64) -> f64 {
    let (_, b, c) = quad_coeffs(z, h);
    3.0 * b * c * c
}
fn t_tw_6(z: f64, h: f64) -> f64 {
    let (_, _, c) = quad_coeffs(z, h);
    c * c * c
}

fn t_cos(z: f64, h: f64) -> f64 {
    (FRAC_PI_2 * z / h).cos()
}
fn t_sin(z: f64, h: f64) -> f64 {
    (FRAC_PI_2 * z / h).sin()
}

fn t_exp_pos(z: f64, h: f64) -> f64 {
    (z / h).exp()
}
fn t_exp_neg(z: f64, h: f64) -> f64 {
    (-z / h).exp()
}

/// Builds the exact separable decomposition of `kind`.
///
/// # Errors
///
/// [`Error::UnsupportedFastKernel`] for Tricube, HyperbolicCosine, and
/// Silverman, which have no finite decomposition into window sums; they are
/// served by the naive engine only.
pub fn decompose(kind: KernelKind) -> Result<KernelDecomposition> {
    use Piece::*;
    use SourceFactor::One;

    fn poly(target_factor: fn(f64, f64) -> f64, source_power: u32, piece: Piece) -> SeparableTerm {
        SeparableTerm {
            target_factor,
            source_power,
            source_factor: One,
            piece,
        }
    }

    let (constant, terms, supports_balloon) = match kind {
        KernelKind::Rectangular => (0.5, vec![poly(t_one, 0, FullWindow)], true),
        KernelKind::Triangular => (
            1.0,
            vec![
                poly(t_tri_right_0, 0, RightOfZ),
                poly(t_tri_right_1, 1, RightOfZ),
                poly(t_tri_left_0, 0, LeftOfZ),
                poly(t_tri_left_1, 1, LeftOfZ),
            ],
            true,
        ),
        KernelKind::Epanechnikov => (
            0.75,
            vec![
                poly(t_quad_a, 0, FullWindow),
                poly(t_quad_b, 1, FullWindow),
                poly(t_quad_c, 2, FullWindow),
            ],
            true,
        ),
        KernelKind::Biweight => (
            0.9375,
            vec![
                poly(t_bi_0, 0, FullWindow),
                poly(t_bi_1, 1, FullWindow),
                poly(t_bi_2, 2, FullWindow),
                poly(t_bi_3, 3, FullWindow),
                poly(t_bi_4, 4, FullWindow),
            ],
            true,
        ),
        KernelKind::Triweight => (
            35.0 / 32.0,
            vec![
                poly(t_tw_0, 0, FullWindow),
                poly(t_tw_1, 1, FullWindow),
                poly(t_tw_2, 2, FullWindow),
                poly(t_tw_3, 3, FullWindow),
                poly(t_tw_4, 4, FullWindow),
                poly(t_tw_5, 5, FullWindow),
                poly(t_tw_6, 6, FullWindow),
            ],
            true,
        ),
        KernelKind::Cosine => (
            FRAC_PI_4,
            vec![
                SeparableTerm {
                    target_factor: t_cos,
                    source_power: 0,
                    source_factor: SourceFactor::CosHalfPiOverH,
                    piece: FullWindow,
                },
                SeparableTerm {
                    target_factor: t_sin,
                    source_power: 0,
                    source_factor: SourceFactor::SinHalfPiOverH,
                    piece: FullWindow,
                },
            ],
            false,
        ),
        KernelKind::Laplacian => (
            0.5,
            vec![
                SeparableTerm {
                    target_factor: t_exp_pos,
                    source_power: 0,
                    source_factor: SourceFactor::ExpNegOverH,
                    piece: HalfLineRight,
                },
                SeparableTerm {
                    target_factor: t_exp_neg,
                    source_power: 0,
                    source_factor: SourceFactor::ExpPosOverH,
                    piece: HalfLineLeft,
                },
            ],
            false,
        ),
        KernelKind::Tricube | KernelKind::HyperbolicCosine | KernelKind::Silverman => {
            return Err(Error::UnsupportedFastKernel(kind));
        }
    };

    Ok(KernelDecomposition {
        kind,
        constant,
        terms,
        supports_balloon,
    })
}

/// Multivariate combination forms of a univariate kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultivariateForm {
    /// Product of univariate kernels across dimensions.
    Product,
    /// Arithmetic mean of univariate kernels, restricted to the unit box and
    /// renormalized.
    Average,
}

/// Number of distinct window sums the fast sweep must track per moment kind
/// for a `d`-dimensional kernel of the given form: `3^d` for the product
/// form, `2d+1` for the average form.
pub fn count_sweep_sums(form: MultivariateForm, d: usize) -> usize {
    debug_assert!(d >= 1);
    match form {
        MultivariateForm::Product => 3usize.pow(d as u32),
        MultivariateForm::Average => 2 * d + 1,
    }
}

/// Evaluates the additive (average) multivariate Epanechnikov kernel at the
/// scaled offsets `u_k = (x_k − z_k)/h_k`:
///
/// `3/(d·2^{d+1}) · Σ_k (1 − u_k²)` when every `u_k ∈ [−1, 1)`, else 0.
///
/// At `d = 1` this coincides with `eval_kernel(Epanechnikov, u)`.
pub fn eval_additive_kernel(u: &[f64]) -> f64 {
    debug_assert!(!u.is_empty());
    let mut sum = 0.0;
    for &uk in u {
        if !(-1.0..1.0).contains(&uk) {
            return 0.0;
        }
        sum += 1.0 - uk * uk;
    }
    let d = u.len();
    3.0 / (d as f64 * 2f64.powi(d as i32 + 1)) * sum
}

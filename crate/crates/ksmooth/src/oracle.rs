//! Direct O(M·N) reference implementations of every smoother and kernel.
//!
//! The oracle evaluates the defining sums literally, point by point, under
//! the same half-open window convention as the fast engines, and always
//! accumulates with compensated summation so its own roundoff stays well
//! below the tolerances it is used to check. Finite-support kernels are
//! window-limited along the first axis by a presort and binary search; this
//! is still a per-point scan of all candidates, just without provably-zero
//! terms, and any timing comparison charges the presort to the oracle.
//!
//! Multivariate kernels come in two forms: the product of univariate
//! kernels (any kernel kind), and the normalized average
//! `Σ_k K(u_k) / (d·2^{d−1})` gated on the full window, which requires a
//! finite-support kind and, for the Epanechnikov kernel, coincides with the
//! fast engine's additive kernel. In one dimension both forms reduce to the
//! plain univariate kernel.

use crate::accumulator::{Accumulator, CompensatedSum};
use crate::error::{Error, Result};
use crate::frame::EvalGrid;
use crate::kernels::{eval_kernel, KernelKind, MultivariateForm};
use crate::linalg::solve_spd;
use crate::partition::Estimator;
use crate::sliding1d::PointStatus;
use crate::sweep::SmoothResultGrid;

/// Naive estimates in the same shape as the fast engine's grid result.
///
/// Unlike the fast engine, the oracle supports kernels with negative lobes,
/// whose literal density sums may be negative; no clamping is applied.
pub type OracleResult = SmoothResultGrid;

/// Where the oracle evaluates: a rectilinear grid with per-axis balloon
/// bandwidths (the fast engine's geometry), or arbitrary points with one
/// bandwidth vector per point.
#[derive(Debug, Clone, Copy)]
pub enum EvalSpec<'a> {
    /// Evaluate at every node of `grid`; `axis_bandwidths[k][j]` is the
    /// half-width of axis `k` at grid coordinate `j`.
    Grid {
        grid: &'a EvalGrid,
        axis_bandwidths: &'a [Vec<f64>],
    },
    /// Evaluate at row-major Q×d `points` with matching row-major
    /// `bandwidths`.
    Points {
        d: usize,
        points: &'a [f64],
        bandwidths: &'a [f64],
    },
}

/// Literal kernel smoothing by direct summation.
///
/// Computes the estimators requested in `estimators` at every evaluation
/// point, flagging degenerate points exactly like the fast path (zero
/// kernel mass → `EmptyWindow` with zero density and NaN regressions;
/// singular locally linear system → Nadaraya-Watson fallback with
/// `SingularFallback`).
///
/// # Errors
///
/// * [`Error::DimensionMismatch`] for inconsistent input shapes.
/// * [`Error::NonPositiveBandwidth`] for any non-finite or non-positive
///   bandwidth.
/// * [`Error::AverageFormNeedsFiniteSupport`] when the average form is
///   combined with an infinite-support kernel.
pub fn naive_smooth(
    inputs: &[f64],
    outputs: &[f64],
    eval: EvalSpec,
    kind: KernelKind,
    form: MultivariateForm,
    estimators: &[Estimator],
) -> Result<OracleResult> {
    assert!(!estimators.is_empty(), "at least one estimator required");
    let d = match eval {
        EvalSpec::Grid { grid, .. } => grid.dim(),
        EvalSpec::Points { d, .. } => d,
    };
    let n = outputs.len();
    if d == 0 || inputs.len() != n * d {
        return Err(Error::DimensionMismatch {
            what: "inputs vs outputs × dimension",
            expected: n * d.max(1),
            got: inputs.len(),
        });
    }
    let finite = kind.has_finite_support();
    if form == MultivariateForm::Average && !finite {
        return Err(Error::AverageFormNeedsFiniteSupport(kind));
    }
    let q_total = match eval {
        EvalSpec::Grid {
            grid,
            axis_bandwidths,
        } => {
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
                for (j, &h) in axis_bandwidths[k].iter().enumerate() {
                    if !(h > 0.0 && h.is_finite()) {
                        return Err(Error::NonPositiveBandwidth { index: j, value: h });
                    }
                }
            }
            grid.total_points()
        }
        EvalSpec::Points {
            points, bandwidths, ..
        } => {
            if points.len() % d != 0 || bandwidths.len() != points.len() {
                return Err(Error::DimensionMismatch {
                    what: "query points vs bandwidths",
                    expected: points.len(),
                    got: bandwidths.len(),
                });
            }
            for (index, &h) in bandwidths.iter().enumerate() {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(Error::NonPositiveBandwidth { index, value: h });
                }
            }
            points.len() / d
        }
    };

    // Presort by the first axis for window limiting.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| {
        inputs[a * d]
            .partial_cmp(&inputs[b * d])
            .expect("finite inputs")
    });
    let sorted_x0: Vec<f64> = order.iter().map(|&i| inputs[i * d]).collect();

    let average_norm = 1.0 / (d as f64 * 2f64.powi(d as i32 - 1));
    let want = |e: Estimator| estimators.contains(&e);
    let want_kde = want(Estimator::Kde);
    let want_nw = want(Estimator::Nw);
    let want_ll = want(Estimator::Loclin);
    let need_response = want_nw || want_ll;

    let mut density = want_kde.then(|| vec![0.0; q_total]);
    let mut nw = want_nw.then(|| vec![f64::NAN; q_total]);
    let mut loclin = want_ll.then(|| vec![f64::NAN; q_total]);
    let mut status = vec![PointStatus::Ok; q_total];

    let dim1 = d + 1;
    let mut z = vec![0.0; d];
    let mut h = vec![0.0; d];
    let mut u = vec![0.0; d];
    let mut sx = vec![CompensatedSum::default(); d];
    let mut sxy = vec![CompensatedSum::default(); d];
    let mut sxx = vec![CompensatedSum::default(); d * d];
    let mut a_mat = vec![0.0; dim1 * dim1];
    let mut rhs = vec![0.0; dim1];

    for j in 0..q_total {
        match eval {
            EvalSpec::Grid {
                grid,
                axis_bandwidths,
            } => {
                grid.node_into(j, &mut z);
                let mut rest = j;
                for k in (0..d).rev() {
                    h[k] = axis_bandwidths[k][rest % grid.sizes[k]];
                    rest /= grid.sizes[k];
                }
            }
            EvalSpec::Points {
                points, bandwidths, ..
            } => {
                z.copy_from_slice(&points[j * d..(j + 1) * d]);
                h.copy_from_slice(&bandwidths[j * d..(j + 1) * d]);
            }
        }

        let candidates: &[usize] = if finite {
            let lo = sorted_x0.partition_point(|&x| x < z[0] - h[0]);
            let hi = sorted_x0.partition_point(|&x| x < z[0] + h[0]);
            &order[lo..hi]
        } else {
            &order
        };

        let mut count = 0usize;
        let mut sw = CompensatedSum::default();
        let mut swy = CompensatedSum::default();
        for acc in sx.iter_mut().chain(sxy.iter_mut()).chain(sxx.iter_mut()) {
            *acc = CompensatedSum::default();
        }

        for &i in candidates {
            let row = &inputs[i * d..(i + 1) * d];
            let mut in_window = true;
            for k in 0..d {
                u[k] = (row[k] - z[k]) / h[k];
                if finite && !(-1.0..1.0).contains(&u[k]) {
                    in_window = false;
                    break;
                }
            }
            if !in_window {
                continue;
            }
            count += 1;
            let w = match form {
                MultivariateForm::Product => {
                    let mut w = 1.0;
                    for &uk in u.iter() {
                        w *= eval_kernel(kind, uk);
                    }
                    w
                }
                MultivariateForm::Average => {
                    let mut s = 0.0;
                    for &uk in u.iter() {
                        s += eval_kernel(kind, uk);
                    }
                    average_norm * s
                }
            };
            if w == 0.0 {
                continue;
            }
            sw.add(w);
            if need_response || want_ll {
                let y = outputs[i];
                swy.add(w * y);
                if want_ll {
                    for a in 0..d {
                        sx[a].add(w * row[a]);
                        sxy[a].add(w * row[a] * y);
                        for b in a..d {
                            sxx[a * d + b].add(w * row[a] * row[b]);
                        }
                    }
                }
            }
        }

        let mass = sw.total();
        if count == 0 || mass == 0.0 {
            if let Some(dens) = density.as_mut() {
                dens[j] = 0.0;
            }
            status[j] = PointStatus::EmptyWindow;
            continue;
        }
        if let Some(dens) = density.as_mut() {
            let volume: f64 = h.iter().product();
            dens[j] = mass / (n as f64 * volume);
        }
        let nw_value = if need_response {
            swy.total() / mass
        } else {
            f64::NAN
        };
        if let Some(nw_out) = nw.as_mut() {
            nw_out[j] = nw_value;
        }
        if let Some(ll) = loclin.as_mut() {
            a_mat[0] = mass;
            rhs[0] = swy.total();
            for a in 0..d {
                let sxa = sx[a].total();
                a_mat[a + 1] = sxa;
                a_mat[(a + 1) * dim1] = sxa;
                rhs[a + 1] = sxy[a].total();
                for b in a..d {
                    let v = sxx[a * d + b].total();
                    a_mat[(a + 1) * dim1 + b + 1] = v;
                    a_mat[(b + 1) * dim1 + a + 1] = v;
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

    Ok(SmoothResultGrid {
        density,
        nw,
        loclin,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accumulator::SumPolicy;
    
    use crate::sliding1d::{smooth1d, SortedSample1D};

    fn points_1d<'a>(z: &'a [f64], h: &'a [f64]) -> EvalSpec<'a> {
        EvalSpec::Points {
            d: 1,
            points: z,
            bandwidths: h,
        }
    }

    #[test]
    fn single_point_density_is_kernel_at_zero_for_all_kinds() {
        for kind in KernelKind::ALL {
            let result = naive_smooth(
                &[0.4],
                &[0.0],
                points_1d(&[0.4], &[0.7]),
                kind,
                MultivariateForm::Product,
                &[Estimator::Kde],
            )
            .unwrap();
            let expect = eval_kernel(kind, 0.0) / 0.7;
            let got = result.density.unwrap()[0];
            assert!(
                (got - expect).abs() < 1e-15,
                "{kind:?}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn window_is_half_open() {
        // x = 1.0 sits exactly on z + h and must not contribute.
        let result = naive_smooth(
            &[0.0, 1.0],
            &[0.0, 0.0],
            points_1d(&[0.0], &[1.0]),
            KernelKind::Epanechnikov,
            MultivariateForm::Product,
            &[Estimator::Kde],
        )
        .unwrap();
        assert!((result.density.unwrap()[0] - 0.375).abs() < 1e-15);
    }

    #[test]
    fn average_and_product_forms_differ_in_2d() {
        let pts = [0.3, 0.1, -0.2, 0.4, 0.1, -0.3, 0.5, 0.2];
        let ys = [0.0; 4];
        let eval = EvalSpec::Points {
            d: 2,
            points: &[0.0, 0.0],
            bandwidths: &[1.0, 1.0],
        };
        let product = naive_smooth(
            &pts,
            &ys,
            eval,
            KernelKind::Epanechnikov,
            MultivariateForm::Product,
            &[Estimator::Kde],
        )
        .unwrap();
        let average = naive_smooth(
            &pts,
            &ys,
            eval,
            KernelKind::Epanechnikov,
            MultivariateForm::Average,
            &[Estimator::Kde],
        )
        .unwrap();
        let dp = product.density.unwrap()[0];
        let da = average.density.unwrap()[0];
        assert!(dp > 0.0 && da > 0.0);
        assert!((dp - da).abs() > 1e-3, "forms coincide: {dp} vs {da}");
    }

    #[test]
    fn forms_coincide_in_1d() {
        let xs = [0.1, -0.4, 0.3, 0.8, -0.9];
        let ys = [1.0, 2.0, 3.0, 4.0, 5.0];
        let z = [0.0, 0.2];
        let h = [0.9, 1.1];
        for kind in KernelKind::ALL.into_iter().filter(|k| k.has_finite_support()) {
            let product = naive_smooth(
                &xs,
                &ys,
                points_1d(&z, &h),
                kind,
                MultivariateForm::Product,
                &[Estimator::Kde, Estimator::Nw],
            )
            .unwrap();
            let average = naive_smooth(
                &xs,
                &ys,
                points_1d(&z, &h),
                kind,
                MultivariateForm::Average,
                &[Estimator::Kde, Estimator::Nw],
            )
            .unwrap();
            for j in 0..2 {
                let dp = product.density.as_ref().unwrap()[j];
                let da = average.density.as_ref().unwrap()[j];
                assert!((dp - da).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn average_form_rejects_infinite_support() {
        let err = naive_smooth(
            &[0.0],
            &[0.0],
            points_1d(&[0.0], &[1.0]),
            KernelKind::Laplacian,
            MultivariateForm::Average,
            &[Estimator::Kde],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::AverageFormNeedsFiniteSupport(KernelKind::Laplacian)
        ));
    }

    #[test]
    fn matches_sliding_engine_on_a_small_instance() {
        let n = 40;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64).sqrt()).collect();
        let ys: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 2.0).collect();
        let z: Vec<f64> = (1..=5).map(|j| j as f64).collect();
        let h: Vec<f64> = vec![1.3; 5];
        let sample = SortedSample1D::new(xs.clone(), Some(ys.clone())).unwrap();
        let fast = smooth1d(
            &sample,
            &z,
            &h,
            KernelKind::Epanechnikov,
            SumPolicy::Compensated,
        )
        .unwrap();
        let naive = naive_smooth(
            &xs,
            &ys,
            points_1d(&z, &h),
            KernelKind::Epanechnikov,
            MultivariateForm::Product,
            &[Estimator::Kde, Estimator::Nw, Estimator::Loclin],
        )
        .unwrap();
        for j in 0..5 {
            let fd = fast.density[j];
            let nd = naive.density.as_ref().unwrap()[j];
            assert!((fd - nd).abs() <= 1e-11 * nd.abs().max(1e-12), "density {fd} vs {nd}");
            let fnw = fast.nw[j];
            let nnw = naive.nw.as_ref().unwrap()[j];
            assert!((fnw - nnw).abs() <= 1e-11 * nnw.abs(), "nw {fnw} vs {nnw}");
            let fll = fast.loclin[j];
            let nll = naive.loclin.as_ref().unwrap()[j];
            assert!((fll - nll).abs() <= 1e-9 * nll.abs(), "loclin {fll} vs {nll}");
        }
    }
}

//! Small dense symmetric linear algebra, hand-rolled for determinism.
//!
//! The engine needs two operations on tiny matrices (dimension d+1 at most,
//! with d the data dimension): a Cholesky solve for the locally linear normal
//! equations and a symmetric eigendecomposition for the principal-component
//! frame. Both are implemented directly so results are bit-reproducible
//! across platforms and independent of external library versions. Matrices
//! are row-major `Vec<f64>` of length n·n.

/// Relative floor for Cholesky pivots and Jacobi convergence, measured
/// against the largest diagonal entry. Below this the system is treated as
/// numerically singular (Cholesky) or converged (Jacobi).
const RELATIVE_FLOOR: f64 = 1e-12;

const MAX_JACOBI_SWEEPS: usize = 64;

/// Solves `A·x = b` for symmetric positive definite `A` via Cholesky.
///
/// Returns `None` when a pivot falls below [`RELATIVE_FLOOR`] times the
/// largest diagonal entry of `A`, i.e. the system is singular to working
/// precision and the caller should fall back to a simpler model.
pub(crate) fn solve_spd(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);

    let max_diag = (0..n).map(|i| a[i * n + i]).fold(0.0_f64, f64::max);
    if !(max_diag > 0.0) {
        return None;
    }
    let floor = RELATIVE_FLOOR * max_diag;

    // Lower-triangular factor, row-major.
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > floor) {
            return None;
        }
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }

    // Forward substitution L·y = b, then back substitution Lᵀ·x = y.
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[i * n + k] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= l[k * n + i] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    Some(x)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, vectors)` with eigenvalues sorted descending and
/// `vectors` row-major with column `j` holding the eigenvector of
/// `eigenvalues[j]`. The sweep order is fixed, so results are deterministic.
/// Convergence: largest off-diagonal magnitude at most [`RELATIVE_FLOOR`]
/// times the largest diagonal magnitude (an all-zero matrix returns
/// immediately with zero eigenvalues and the identity basis).
pub(crate) fn jacobi_eigen_sym(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a.len(), n * n);

    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    for _ in 0..MAX_JACOBI_SWEEPS {
        let diag_scale = (0..n)
            .map(|i| a[i * n + i].abs())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut off_max = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off_max = off_max.max(a[p * n + q].abs());
            }
        }
        if off_max <= RELATIVE_FLOOR * diag_scale {
            break;
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= RELATIVE_FLOOR * diag_scale {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                let app = a[p * n + p];
                let aqq = a[q * n + q];
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[i * n + p];
                        let aiq = a[i * n + q];
                        a[i * n + p] = c * aip - s * aiq;
                        a[p * n + i] = a[i * n + p];
                        a[i * n + q] = s * aip + c * aiq;
                        a[q * n + i] = a[i * n + q];
                    }
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .expect("eigenvalues are finite")
    });

    let eigenvalues: Vec<f64> = order.iter().map(|&j| a[j * n + j]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + dst] = v[i * n + src];
        }
    }
    (eigenvalues, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EIG_EPS: f64 = 1e-12;

    #[test]
    fn solves_known_spd_system() {
        // A = [[4,2],[2,3]], b = [2,5] → x = [-0.5, 2].
        let a = [4.0, 2.0, 2.0, 3.0];
        let b = [2.0, 5.0];
        let x = solve_spd(&a, &b, 2).unwrap();
        assert!((x[0] + 0.5).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_singular_system() {
        // Rank-1 matrix.
        let a = [1.0, 1.0, 1.0, 1.0];
        assert!(solve_spd(&a, &[1.0, 1.0], 2).is_none());
        assert!(solve_spd(&[0.0, 0.0, 0.0, 0.0], &[0.0, 0.0], 2).is_none());
    }

    #[test]
    fn eigen_of_known_matrix() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1 with eigenvectors (1,1)/√2
        // and (1,−1)/√2.
        let (vals, vecs) = jacobi_eigen_sym(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((vals[0] - 3.0).abs() < EIG_EPS);
        assert!((vals[1] - 1.0).abs() < EIG_EPS);
        let ratio = vecs[0] / vecs[2]; // first eigenvector components
        assert!((ratio - 1.0).abs() < 1e-10);
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let a = [
            3.0, 1.0, 0.5, //
            1.0, 2.0, -0.25, //
            0.5, -0.25, 1.5,
        ];
        let n = 3;
        let (vals, vecs) = jacobi_eigen_sym(&a, n);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += vecs[i * n + k] * vals[k] * vecs[j * n + k];
                }
                assert!(
                    (s - a[i * n + j]).abs() < 1e-10,
                    "entry ({i},{j}): {s} vs {}",
                    a[i * n + j]
                );
            }
        }
    }

    #[test]
    fn zero_matrix_returns_identity_basis() {
        let (vals, vecs) = jacobi_eigen_sym(&[0.0; 9], 3);
        assert_eq!(vals, vec![0.0; 3]);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(vecs[i * 3 + j], expect);
            }
        }
    }
}

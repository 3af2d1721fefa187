//! Small dense linear algebra over [`Scalar`]: Cholesky factorisation,
//! triangular solves and a cyclic Jacobi symmetric eigensolver.
//!
//! The matrices involved here are either covariate blocks (k ≤ 4 in
//! practice) or scatter matrices of a few hundred rows, so plain loops are
//! adequate.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::Scalar;

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = a`, or `None` when a
/// pivot is not strictly positive.
pub fn cholesky<F: Scalar>(a: ArrayView2<'_, F>) -> Option<Array2<F>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut l = Array2::<F>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d = d - l[[j, k]] * l[[j, k]];
        }
        if !(d > F::zero()) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[[j, j]] = djj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s = s - l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / djj;
        }
    }
    Some(l)
}

/// Solves `L y = b` for lower-triangular `L`.
pub fn forward_substitute<F: Scalar>(l: ArrayView2<'_, F>, b: ArrayView1<'_, F>) -> Array1<F> {
    let n = l.nrows();
    let mut y = Array1::<F>::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

/// `bᵀ A⁻¹ b` through the Cholesky factor of `A`; `None` if `A` is not
/// numerically positive definite.
pub fn inverse_quadratic_form<F: Scalar>(a: ArrayView2<'_, F>, b: ArrayView1<'_, F>) -> Option<F> {
    let l = cholesky(a)?;
    let y = forward_substitute(l.view(), b);
    Some(y.iter().map(|&v| v * v).sum())
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<F> {
    /// Ascending eigenvalues.
    pub values: Vec<F>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: Array2<F>,
}

impl<F: Scalar> SymmetricEigen<F> {
    pub fn min_value(&self) -> F {
        self.values.first().copied().unwrap_or_else(F::zero)
    }

    /// `V diag(values) Vᵀ`, symmetrised.
    pub fn reconstruct_with(&self, values: &[F]) -> Array2<F> {
        let n = self.vectors.nrows();
        let mut out = Array2::<F>::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let mut s = F::zero();
                for (k, &lam) in values.iter().enumerate() {
                    s = s + self.vectors[[i, k]] * lam * self.vectors[[j, k]];
                }
                out[[i, j]] = s;
                out[[j, i]] = s;
            }
        }
        out
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver; `None` if it fails to converge or the input
/// contains non-finite values.
pub fn symmetric_eigen<F: Scalar>(a: ArrayView2<'_, F>) -> Option<SymmetricEigen<F>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    if a.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut m = a.to_owned();
    let mut v = Array2::<F>::eye(n);
    let two = F::lit(2.0);
    let scale = m.iter().fold(F::zero(), |acc, &x| acc.max(x.abs()));
    let tol = F::epsilon() * F::epsilon() * scale * scale * F::lit((n * n) as f64);

    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = F::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + m[[p, q]] * m[[p, q]];
            }
        }
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == F::zero() {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return None;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[[i, i]]
            .partial_cmp(&m[[j, j]])
            .expect("finite eigenvalues")
    });
    let values = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vectors = Array2::<F>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Some(SymmetricEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn cholesky_reconstructs() {
        let a = array![[4.0, 2.0, 0.4], [2.0, 3.0, 0.1], [0.4, 0.1, 2.0]];
        let l = cholesky(a.view()).unwrap();
        let back = l.dot(&l.t());
        for (x, y) in back.iter().zip(a.iter()) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-14);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 1.2], [1.2, 1.0]];
        assert!(cholesky(a.view()).is_none());
    }

    #[test]
    fn quadratic_form_matches_explicit_inverse() {
        let a = array![[1.0, 0.5], [0.5, 1.0]];
        let b = array![0.5, 0.5];
        let q = inverse_quadratic_form(a.view(), b.view()).unwrap();
        assert_abs_diff_eq!(q, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn jacobi_two_by_two() {
        let a = array![[1.0f64, 1.2], [1.2, 1.0]];
        let e = symmetric_eigen(a.view()).unwrap();
        assert_abs_diff_eq!(e.values[0], -0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 2.2, epsilon = 1e-14);
        let back = e.reconstruct_with(&e.values);
        for (x, y) in back.iter().zip(a.iter()) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-14);
        }
    }

    #[test]
    fn jacobi_equicorrelation_spectrum() {
        let p = 4;
        let mut a = Array2::from_elem((p, p), 0.9f64);
        a.diag_mut().fill(1.0);
        let e = symmetric_eigen(a.view()).unwrap();
        for v in &e.values[..3] {
            assert_abs_diff_eq!(*v, 0.1, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(e.values[3], 1.0 + 3.0 * 0.9, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_works_in_single_precision() {
        let a = array![[2.0f32, 0.5, 0.0], [0.5, 1.0, 0.25], [0.0, 0.25, 3.0]];
        let e = symmetric_eigen(a.view()).unwrap();
        let trace: f32 = e.values.iter().sum();
        assert!((trace - 6.0).abs() < 1e-5);
    }
}

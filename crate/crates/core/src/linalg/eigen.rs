//! Cyclic Jacobi eigensolver for real symmetric matrices.

use serde::Serialize;

use super::Matrix;
use crate::error::{Error, Result};

/// Sweep budget for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;

/// Default symmetry tolerance, relative to `max |S_ij|`.
const DEFAULT_SYM_TOL: f64 = 1e-9;

/// Orthogonal eigendecomposition `S = B diag(eigenvalues) B^T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymEigen {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Columns are the corresponding unit eigenvectors.
    pub basis: Matrix,
}

impl SymEigen {
    /// `B f(Λ) B^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.basis.dim();
        let fv: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        Matrix::from_fn(n, |i, j| {
            (0..n).map(|k| self.basis[(i, k)] * fv[k] * self.basis[(j, k)]).sum()
        })
    }

    pub fn reconstruct(&self) -> Matrix {
        self.reconstruct_with(|l| l)
    }
}

/// Eigendecomposition of a symmetric matrix with the default symmetry tolerance.
pub fn sym_eigen(s: &Matrix) -> Result<SymEigen> {
    sym_eigen_with_tol(s, DEFAULT_SYM_TOL)
}

/// Eigendecomposition of a symmetric matrix; `sym_tol` is relative to `max |S_ij|`.
///
/// The input is symmetrized as `(S + S^T) / 2` before iterating. Rotations are
/// skipped once an off-diagonal entry is negligible relative to the geometric
/// mean of its diagonal pair, which keeps small eigenvalues relatively accurate.
pub fn sym_eigen_with_tol(s: &Matrix, sym_tol: f64) -> Result<SymEigen> {
    let n = s.dim();
    let scale = s.max_abs();
    let asym = s.asymmetry();
    if asym > sym_tol * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    if !s.is_finite() {
        return Err(Error::NumericalFailure("non-finite input to eigensolver".into()));
    }

    let mut a = Matrix::from_fn(n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let mut v = Matrix::identity(n);

    let mut converged = n < 2;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if apq.abs() <= f64::EPSILON * (app * aqq).abs().sqrt() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                rotate(&mut a, &mut v, p, q);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the sweep order for exact ties, so output is deterministic.
    order.sort_by(|&x, &y| a[(y, y)].total_cmp(&a[(x, x)]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[(k, k)]).collect();
    let mut basis = Matrix::from_fn(n, |i, c| v[(i, order[c])]);
    for c in 0..n {
        // Sign convention: largest-magnitude component (first on ties) is positive.
        let mut pivot = 0;
        for i in 1..n {
            if basis[(i, c)].abs() > basis[(pivot, c)].abs() {
                pivot = i;
            }
        }
        if basis[(pivot, c)] < 0.0 {
            for i in 0..n {
                basis[(i, c)] = -basis[(i, c)];
            }
        }
    }
    Ok(SymEigen { eigenvalues, basis })
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let n = a.dim();
    let apq = a[(p, q)];
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_rp = arp - s * (arq + tau * arp);
        let new_rq = arq + s * (arp - tau * arq);
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp;
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp - s * (vrq + tau * vrp);
        v[(r, q)] = vrq + s * (vrp - tau * vrq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthogonality_defect(b: &Matrix) -> f64 {
        b.transpose().matmul(b).max_abs_diff(&Matrix::identity(b.dim()))
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = sym_eigen(&Matrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        // Up to column permutation and sign the basis is the identity.
        for c in 0..3 {
            let nonzero: Vec<f64> = (0..3).map(|i| e.basis[(i, c)].abs()).filter(|x| *x > 0.5).collect();
            assert_eq!(nonzero, vec![1.0]);
        }
    }

    #[test]
    fn diagonal_input_sorted_descending() {
        let e = sym_eigen(&Matrix::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn strange_matrix_spectrum() {
        let eps = (-std::f64::consts::PI * 3f64.sqrt()).exp();
        let d = 1.0 - 2.0 * eps;
        let o = 1.0 + eps;
        let m = Matrix::from_rows(&[[d, o, o], [o, d, o], [o, o, d]]).unwrap().scale(1.0 / 3.0);
        let e = sym_eigen(&m).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] + eps).abs() < 1e-14);
        assert!((e.eigenvalues[2] + eps).abs() < 1e-14);
        assert!(orthogonality_defect(&e.basis) < 1e-14);
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn rejects_nonsymmetric() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eigen(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn deterministic_output() {
        let m = Matrix::from_rows(&[[2.0, 1.0, 0.5], [1.0, 3.0, -0.2], [0.5, -0.2, 1.0]]).unwrap();
        let a = sym_eigen(&m).unwrap();
        let b = sym_eigen(&m).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn small_eigenvalues_keep_relative_accuracy() {
        // diag(1, 1e-12) rotated by an exactly representable orthogonal matrix.
        let m = Matrix::from_rows(&[[0.5 + 0.5e-12, 0.5 - 0.5e-12], [0.5 - 0.5e-12, 0.5 + 0.5e-12]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        assert!((e.eigenvalues[1] - 1e-12).abs() < 1e-20 + 1e-4 * 1e-12);
    }
}

//! Gaussian elimination and the Vandermonde-variant system for log coefficients.

use serde::Serialize;

use super::Matrix;
use crate::error::{Error, Result};

struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

/// LU with partial pivoting. Returns `None` when a pivot is exactly zero.
fn lu_decompose(a: &Matrix) -> Option<Lu> {
    let n = a.dim();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for k in 0..n {
        let mut piv = k;
        for i in (k + 1)..n {
            if lu[(i, k)].abs() > lu[(piv, k)].abs() {
                piv = i;
            }
        }
        if lu[(piv, k)] == 0.0 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            perm.swap(k, piv);
            sign = -sign;
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            for j in (k + 1)..n {
                lu[(i, j)] -= f * lu[(k, j)];
            }
        }
    }
    Some(Lu { lu, perm, sign })
}

impl Lu {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.lu[(i, k)] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.lu[(i, k)] * x[k];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

/// Solves `A x = b`.
pub fn solve_linear(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.len() });
    }
    let lu = lu_decompose(a).ok_or_else(|| Error::SingularSystem("zero pivot".into()))?;
    Ok(lu.solve(b))
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let n = a.dim();
    let lu = lu_decompose(a).ok_or_else(|| Error::SingularSystem("zero pivot".into()))?;
    let mut inv = Matrix::zeros(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = lu.solve(&e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(inv)
}

pub fn determinant(a: &Matrix) -> f64 {
    match lu_decompose(a) {
        None => 0.0,
        Some(lu) => (0..a.dim()).fold(lu.sign, |acc, i| acc * lu.lu[(i, i)]),
    }
}

/// Solution of the Vandermonde-variant system together with its residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VandermondeSolution {
    pub alpha: Vec<f64>,
    /// `max_i |sum_k alpha_k mu_i^k - rhs_i|`.
    pub residual: f64,
}

/// Solves for `alpha` in `sum_{k=1}^{m-1} alpha_k mu_i^k = rhs_i`, i.e. the
/// system whose row `i` is `(mu_i, mu_i^2, ..., mu_i^{m-1})`.
///
/// Its determinant is `prod_i mu_i * prod_{k>l} (mu_k - mu_l)`, so it is
/// singular exactly when some `mu_i` vanishes or two coincide; both are
/// rejected up to `cluster_tol`.
pub fn solve_vandermonde_variant(mu: &[f64], rhs: &[f64], cluster_tol: f64) -> Result<VandermondeSolution> {
    let n = mu.len();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rhs.len() });
    }
    if n == 0 {
        return Ok(VandermondeSolution { alpha: Vec::new(), residual: 0.0 });
    }
    for (i, &m) in mu.iter().enumerate() {
        if !m.is_finite() || m.abs() <= cluster_tol {
            return Err(Error::SingularSystem(format!("mu[{i}] = {m:e} is zero")));
        }
        for (j, &other) in mu.iter().enumerate().skip(i + 1) {
            if (m - other).abs() <= cluster_tol {
                return Err(Error::SingularSystem(format!("mu[{i}] and mu[{j}] coincide")));
            }
        }
    }
    let v = Matrix::from_fn(n, |i, k| mu[i].powi(k as i32 + 1));
    let alpha = solve_linear(&v, rhs)?;
    let fitted = v.mul_vec(&alpha);
    let residual = fitted.iter().zip(rhs).fold(0.0_f64, |acc, (f, r)| acc.max((f - r).abs()));
    Ok(VandermondeSolution { alpha, residual })
}

//! Dense real matrix kernels.
//!
//! Everything here works on small square matrices stored row-major. The
//! kernels are deterministic: fixed sweep orders, no randomized pivoting.

mod eigen;
mod expm;
mod solve;
mod spectrum;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use eigen::{sym_eigen, sym_eigen_with_tol, SymEigen, MAX_SWEEPS};
pub use expm::expm;
pub use solve::{determinant, inverse, solve_linear, solve_vandermonde_variant, VandermondeSolution};
pub use spectrum::{cluster_eigenvalues, SpectrumSummary};

/// Square real matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// All-ones matrix.
    pub fn ones(n: usize) -> Self {
        Self { n, data: vec![1.0; n * n] }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from rows, checking squareness and finiteness.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite(i, j));
                }
                data.push(v);
            }
        }
        Ok(Self { n, data })
    }

    /// Builds from a closure `f(i, j)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    /// `max |A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Row vector times matrix, `v M`.
    pub fn left_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "dimension mismatch");
        (0..self.n)
            .map(|j| (0..self.n).map(|i| v[i] * self[(i, j)]).sum())
            .collect()
    }

    /// Matrix times column vector, `M v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "dimension mismatch");
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn powi(&self, k: u32) -> Matrix {
        let mut result = Matrix::identity(self.n);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.matmul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
            }
        }
        result
    }

    /// Principal submatrix on the given (ordered) index set.
    pub fn submatrix(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), |a, b| self[(idx[a], idx[b])])
    }

    /// `P A P^T` for the permutation sending new index `k` to old index `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Matrix {
        assert_eq!(perm.len(), self.n, "dimension mismatch");
        self.submatrix(perm)
    }

    fn check_same_dim(&self, other: &Matrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        Matrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        Matrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let cells: Vec<String> = self.row(i).iter().map(|v| format!("{v:>12.6e}")).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.check_same_dim(b)?;
    Ok(&a.matmul(b) - &b.matmul(a))
}

/// Evaluates `sum_{k>=1} alpha[k-1] A^k` by Horner's scheme. There is no
/// constant term, so an empty coefficient list gives the zero matrix.
pub fn matrix_poly(a: &Matrix, alpha: &[f64]) -> Matrix {
    let n = a.dim();
    let mut acc = Matrix::zeros(n);
    for &coef in alpha.iter().rev() {
        // acc <- (acc + coef) * A
        let mut shifted = acc;
        for i in 0..n {
            shifted[(i, i)] += coef;
        }
        acc = shifted.matmul(a);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_plus(lambda: f64) -> Matrix {
        Matrix::from_rows(&[[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, -1.0]])
            .unwrap()
            .scale(lambda)
    }

    #[test]
    fn from_rows_rejects_ragged_and_nan() {
        assert!(matches!(
            Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Matrix::from_rows(&[[1.0, f64::NAN], [0.0, 1.0]]),
            Err(Error::NonFinite(0, 1))
        ));
        assert!(matches!(Matrix::from_rows::<Vec<f64>>(&[]), Err(Error::Empty)));
    }

    #[test]
    fn commutator_of_self_is_zero() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(commutator(&a, &a).unwrap(), Matrix::zeros(2));
    }

    #[test]
    fn cyclic_pair_commutes() {
        let lambda = 2.0 * std::f64::consts::PI / 3f64.sqrt();
        let qp = q_plus(lambda);
        let qm = qp.transpose();
        assert!(commutator(&qp, &qm).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        assert!(matches!(
            commutator(&Matrix::zeros(2), &Matrix::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn matrix_poly_empty_is_zero() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(matrix_poly(&a, &[]), Matrix::zeros(2));
    }

    #[test]
    fn matrix_poly_matches_explicit_powers() {
        let a = Matrix::from_rows(&[[0.5, -0.25, 0.0], [0.1, 0.2, 0.3], [-0.4, 0.0, 0.7]]).unwrap();
        let alpha = [1.5, -0.75, 0.125];
        let explicit = &(&a.scale(alpha[0]) + &a.powi(2).scale(alpha[1])) + &a.powi(3).scale(alpha[2]);
        assert!(matrix_poly(&a, &alpha).max_abs_diff(&explicit) < 1e-15);
    }

    #[test]
    fn matrix_poly_two_state_closed_form() {
        // M = [[0.75, 0.25], [0.25, 0.75]], A = M - 1, Q = -(log(1-a-b)/(a+b)) A.
        let a = Matrix::from_rows(&[[-0.25, 0.25], [0.25, -0.25]]).unwrap();
        let alpha = [-(0.5f64.ln()) / 0.5];
        let q = matrix_poly(&a, &alpha);
        let expected = 0.25 * 2.0 * 2f64.ln();
        assert!((q[(0, 1)] - expected).abs() < 1e-15);
        assert!((q[(0, 1)] - 0.34657).abs() < 1e-5);
        let m = &Matrix::identity(2) + &a;
        assert!(expm(&q).unwrap().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let a = Matrix::from_rows(&[[0.9, 0.1], [0.3, 0.7]]).unwrap();
        let mut p = Matrix::identity(2);
        for _ in 0..7 {
            p = p.matmul(&a);
        }
        assert!(a.powi(7).max_abs_diff(&p) < 1e-15);
    }

    #[test]
    fn serde_uses_row_arrays() {
        let a = Matrix::from_rows(&[[0.75, 0.25], [0.25, 0.75]]).unwrap();
        // Uses the serde data model through the Vec<Vec<f64>> representation.
        let rows: Vec<Vec<f64>> = a.rows();
        assert_eq!(rows, vec![vec![0.75, 0.25], vec![0.25, 0.75]]);
    }
}

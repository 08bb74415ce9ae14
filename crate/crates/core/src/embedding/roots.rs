//! Square roots: the positive-spectrum Markov root and real roots of `-1`.

use std::f64::consts::PI;

use super::log::{desymmetrize, reversible_eigen};
use crate::error::{Error, Result};
use crate::linalg::{expm, Matrix};
use crate::markov::{ProbabilityVector, StochasticMatrix};
use crate::tolerance::Tolerances;

/// Unique `p`-reversible square root of `M2` with positive spectrum.
pub fn markov_sqrt_positive(m2: &StochasticMatrix, p: &ProbabilityVector, tol: &Tolerances) -> Result<StochasticMatrix> {
    let eig = reversible_eigen(m2, p, tol)?;
    if let Some(eigenvalue) = eig.eigenvalues.iter().copied().find(|&l| l <= tol.spec_tol) {
        return Err(Error::NonPositiveSpectrum { eigenvalue });
    }
    let root = desymmetrize(&eig.reconstruct_with(f64::sqrt), p.as_slice());
    StochasticMatrix::new(root, tol)
}

/// `[[a, b], [-(a^2 + 1)/b, -a]]`, a real square root of `-1`.
pub fn real_sqrt_minus_identity(a: f64, b: f64) -> Result<Matrix> {
    if b == 0.0 || !b.is_finite() || !a.is_finite() {
        return Err(Error::ZeroB);
    }
    Matrix::from_rows(&[[a, b], [-(a * a + 1.0) / b, -a]])
}

/// `(2m + 1) pi I` with `I = real_sqrt_minus_identity(a, b)`; its exponential is `-1`.
pub fn log_family_minus_identity(m: i64, a: f64, b: f64) -> Result<Matrix> {
    Ok(real_sqrt_minus_identity(a, b)?.scale((2 * m + 1) as f64 * PI))
}

/// Grid times `t` at which `||expm(tQ) - expm(tR)||_inf <= probe_tol`.
pub fn theta_set_probe(q: &Matrix, r: &Matrix, grid: &[f64], probe_tol: f64) -> Result<Vec<f64>> {
    if q.dim() != r.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), found: r.dim() });
    }
    let mut hits = Vec::new();
    for &t in grid {
        let gap = expm(&q.scale(t))?.max_abs_diff(&expm(&r.scale(t))?);
        if gap <= probe_tol {
            hits.push(t);
        }
    }
    Ok(hits)
}

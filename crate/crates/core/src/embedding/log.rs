//! Four routes to the principal logarithm of a stochastic matrix.

use std::f64::consts::PI;

use super::{LogCandidate, LogMethod};
use crate::error::{Error, Result};
use crate::linalg::{
    cluster_eigenvalues, inverse, matrix_poly, solve_vandermonde_variant, sym_eigen_with_tol, Matrix, SpectrumSummary,
    SymEigen, VandermondeSolution,
};
use crate::markov::{ProbabilityVector, StochasticMatrix};
use crate::reversibility::detailed_balance_residual;
use crate::tolerance::Tolerances;

/// Mercator series stops once a term drops below this norm.
const SERIES_TERM_TOL: f64 = 1e-15;
const SERIES_MAX_TERMS: usize = 10_000;
/// Squarings used by the Gelfand radius bound: `||A^(2^j)||^(1/2^j)`, `j <= 10`.
const RADIUS_SQUARINGS: u32 = 10;
const QUADRATURE_NODES: usize = 64;

/// `D^{1/2} M D^{-1/2}`, averaged with its transpose to remove rounding asymmetry.
pub(crate) fn symmetrize(m: &Matrix, p: &[f64]) -> Matrix {
    let r: Vec<f64> = p.iter().map(|v| v.sqrt()).collect();
    let s = Matrix::from_fn(m.dim(), |i, j| r[i] * m[(i, j)] / r[j]);
    Matrix::from_fn(m.dim(), |i, j| 0.5 * (s[(i, j)] + s[(j, i)]))
}

/// `D^{-1/2} X D^{1/2}`.
pub(crate) fn desymmetrize(x: &Matrix, p: &[f64]) -> Matrix {
    let r: Vec<f64> = p.iter().map(|v| v.sqrt()).collect();
    Matrix::from_fn(x.dim(), |i, j| x[(i, j)] * r[j] / r[i])
}

/// Eigendecomposition of the symmetrization of a `p`-reversible matrix.
pub(crate) fn reversible_eigen(m: &Matrix, p: &ProbabilityVector, tol: &Tolerances) -> Result<SymEigen> {
    if p.len() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: p.len() });
    }
    p.require_strictly_positive()?;
    let residual = detailed_balance_residual(m, p.as_slice());
    if residual > tol.db_tol {
        return Err(Error::NotReversibleForP { residual });
    }
    sym_eigen_with_tol(&symmetrize(m, p.as_slice()), tol.sym_tol)
}

fn require_positive(eig: &SymEigen, tol: &Tolerances) -> Result<()> {
    match eig.eigenvalues.iter().copied().find(|&l| l <= tol.spec_tol) {
        Some(eigenvalue) => Err(Error::NonPositiveSpectrum { eigenvalue }),
        None => Ok(()),
    }
}

/// `L = D^{-1/2} B log(Λ) B^T D^{1/2}` for `p`-reversible `M` with positive spectrum.
pub fn principal_log_reversible(m: &StochasticMatrix, p: &ProbabilityVector, tol: &Tolerances) -> Result<LogCandidate> {
    let eig = reversible_eigen(m, p, tol)?;
    require_positive(&eig, tol)?;
    let log = desymmetrize(&eig.reconstruct_with(f64::ln), p.as_slice());
    Ok(LogCandidate::new(log, LogMethod::EigenSymmetrized, m))
}

/// Upper bound on the spectral radius of `a`: the smaller of the row and
/// column sum norms, refined by `||A^(2^j)||^(1/2^j)` over repeated squaring.
pub fn series_radius_bound(a: &Matrix) -> f64 {
    let mut bound = a.norm_inf().min(a.norm_one());
    let mut power = a.clone();
    for j in 1..=RADIUS_SQUARINGS {
        power = power.matmul(&power);
        let norm = power.norm_inf().min(power.norm_one());
        if norm == 0.0 {
            return 0.0;
        }
        if !norm.is_finite() {
            break;
        }
        bound = bound.min(norm.powf(1.0 / f64::from(1u32 << j)));
    }
    bound
}

/// `log(1 + A) = sum_{n >= 1} (-1)^{n-1} A^n / n` with `A = M - 1`.
pub fn principal_log_series(m: &StochasticMatrix, tol: &Tolerances) -> Result<LogCandidate> {
    let a = m.minus_identity();
    let radius = series_radius_bound(&a);
    if radius >= 1.0 - tol.rho_margin {
        return Err(Error::SeriesDivergence { radius });
    }
    let mut sum = Matrix::zeros(a.dim());
    let mut power = a.clone();
    for n in 1..=SERIES_MAX_TERMS {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let term = power.scale(sign / n as f64);
        sum = &sum + &term;
        if term.norm_inf() < SERIES_TERM_TOL {
            break;
        }
        power = power.matmul(&a);
    }
    Ok(LogCandidate::new(sum, LogMethod::MercatorSeries, m))
}

/// Spectrum of a `p`-reversible matrix, clustered with `cluster_tol`.
pub(crate) fn reversible_spectrum(m: &Matrix, p: &ProbabilityVector, tol: &Tolerances) -> Result<SpectrumSummary> {
    let eig = reversible_eigen(m, p, tol)?;
    Ok(cluster_eigenvalues(&eig.eigenvalues, tol.cluster_tol))
}

/// `L = sum_{k=1}^{m-1} alpha_k A^k`, where `alpha` interpolates `log(1 + mu)`
/// at the non-unit eigenvalue clusters `1 + mu_i`.
pub fn log_coefficients_vdm(
    m: &StochasticMatrix,
    p: &ProbabilityVector,
    tol: &Tolerances,
) -> Result<(VandermondeSolution, LogCandidate)> {
    let spectrum = reversible_spectrum(m, p, tol)?;
    if let Some(eigenvalue) = spectrum.distinct_values.iter().copied().find(|&v| v <= tol.spec_tol) {
        return Err(Error::NonPositiveSpectrum { eigenvalue });
    }
    // The unit eigenvalue is the largest one for a stochastic matrix.
    let others = &spectrum.distinct_values[1..];
    let mu: Vec<f64> = others.iter().map(|v| v - 1.0).collect();
    let rhs: Vec<f64> = others.iter().map(|v| v.ln()).collect();
    let solution = solve_vandermonde_variant(&mu, &rhs, tol.cluster_tol)?;
    let log = matrix_poly(&m.minus_identity(), &solution.alpha);
    let candidate = LogCandidate::new(log, LogMethod::VandermondePolynomial, m);
    Ok((solution, candidate))
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub(crate) fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((0.5 * (1.0 - x), 0.5 * w));
    }
    rule
}

/// `log B = int_0^1 (B - 1)(t (B - 1) + 1)^{-1} dt` by 64-node Gauss-Legendre
/// quadrature.
pub fn principal_log_integral(m: &StochasticMatrix) -> Result<LogCandidate> {
    let a = m.minus_identity();
    let id = Matrix::identity(a.dim());
    let mut sum = Matrix::zeros(a.dim());
    for (t, w) in gauss_legendre_unit(QUADRATURE_NODES) {
        let resolvent = inverse(&(&a.scale(t) + &id))?;
        sum = &sum + &a.matmul(&resolvent).scale(w);
    }
    Ok(LogCandidate::new(sum, LogMethod::IntegralForm, m))
}

//! Matrix logarithms, generator checks and the embeddability classifier.

mod classify;
mod log;
mod roots;

use serde::Serialize;

use crate::catalog::commute;
use crate::linalg::{expm, Matrix};
use crate::markov::{validate_generator, RateMatrix};
use crate::tolerance::Tolerances;

pub use classify::{classify_embeddability, kendall_2x2, Classification, EmbeddabilityReport, KendallOutcome, LogResidual};
pub use log::{
    log_coefficients_vdm, principal_log_integral, principal_log_reversible, principal_log_series,
    series_radius_bound,
};
pub use roots::{log_family_minus_identity, markov_sqrt_positive, real_sqrt_minus_identity, theta_set_probe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LogMethod {
    EigenSymmetrized,
    MercatorSeries,
    VandermondePolynomial,
    IntegralForm,
}

impl LogMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            LogMethod::EigenSymmetrized => "eigen",
            LogMethod::MercatorSeries => "series",
            LogMethod::VandermondePolynomial => "vdm",
            LogMethod::IntegralForm => "integral",
        }
    }
}

/// A real logarithm of `M` with its exponential round-trip residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogCandidate {
    pub log: Matrix,
    pub method: LogMethod,
    /// `||expm(log) - M||_inf`.
    pub residual: f64,
    /// Largest absolute row sum of `log`.
    pub row_sum_error: f64,
}

impl LogCandidate {
    pub(crate) fn new(log: Matrix, method: LogMethod, target: &Matrix) -> Self {
        let residual = match expm(&log) {
            Ok(e) => e.max_abs_diff(target),
            Err(_) => f64::INFINITY,
        };
        let row_sum_error = log.row_sums().iter().fold(0.0_f64, |a, s| a.max(s.abs()));
        LogCandidate { log, method, residual, row_sum_error }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    NegativeOffDiagonal { i: usize, j: usize, value: f64 },
    RowSum { row: usize, sum: f64 },
}

/// Off-diagonal entries `>= -entry_tol` and row sums within `row_tol`.
pub fn is_markov_generator(l: &Matrix, tol: &Tolerances) -> (bool, Vec<Violation>) {
    let n = l.dim();
    let mut violations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && l[(i, j)] < -tol.entry_tol {
                violations.push(Violation::NegativeOffDiagonal { i, j, value: l[(i, j)] });
            }
        }
    }
    for (row, sum) in l.row_sums().into_iter().enumerate() {
        if sum.abs() > tol.row_tol {
            violations.push(Violation::RowSum { row, sum });
        }
    }
    (violations.is_empty(), violations)
}

/// Two generators with the same exponential, typically `(Q, Q^T)` for a
/// doubly stochastic target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorPair {
    pub forward: RateMatrix,
    pub reverse: RateMatrix,
    /// Branch index in the family that produced the pair.
    pub branch: usize,
    /// Cyclic rate `lambda`.
    pub rate: f64,
    /// Constant-input shift `c`.
    pub shift: f64,
    pub commuting: bool,
    /// Largest `||expm(Q) - M||_inf` over both members.
    pub residual: f64,
}

impl GeneratorPair {
    /// Builds the pair only if both members are generators whose exponentials
    /// match `target` within `emb_tol`.
    pub(crate) fn verified(
        forward: Matrix,
        reverse: Matrix,
        target: &Matrix,
        branch: usize,
        rate: f64,
        shift: f64,
        tol: &Tolerances,
    ) -> Option<Self> {
        let residual = [&forward, &reverse]
            .iter()
            .map(|q| expm(q).map(|e| e.max_abs_diff(target)).unwrap_or(f64::INFINITY))
            .fold(0.0_f64, f64::max);
        if residual > tol.emb_tol {
            return None;
        }
        let commuting = commute(&forward, &reverse, tol.emb_tol);
        let forward = validate_generator(forward, tol.entry_tol, tol.row_tol).ok()?;
        let reverse = validate_generator(reverse, tol.entry_tol, tol.row_tol).ok()?;
        Some(GeneratorPair { forward, reverse, branch, rate, shift, commuting, residual })
    }
}

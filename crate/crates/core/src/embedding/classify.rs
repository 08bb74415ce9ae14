//! The embeddability decision procedure.

use serde::Serialize;

use super::log::{log_coefficients_vdm, principal_log_reversible, reversible_spectrum};
use super::{is_markov_generator, GeneratorPair, LogMethod, Violation};
use crate::catalog::{circulant_pair_logs, delta_k};
use crate::error::{Error, Result};
use crate::linalg::{determinant, expm, Matrix, SpectrumSummary};
use crate::markov::{validate_generator, ProbabilityVector, RateMatrix, StochasticMatrix};
use crate::reversibility::{find_reversing_measure, ReversibilityCertificate, Verdict};
use crate::tolerance::Tolerances;

/// Entrywise tolerance for recognizing the 3x3 constant-input structure.
const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Classification {
    /// Embeddable with a generator that is reversible for the same measure.
    ReversiblyEmbeddable { generator: RateMatrix },
    /// Embeddable, but no generator is reversible; the pairs are `(Q, Q~)`.
    EmbeddableNotReversibly { pairs: Vec<GeneratorPair>, commuting: bool },
    /// A negative eigenvalue cluster of odd multiplicity rules out any real logarithm.
    NotEmbeddableNegativeSimpleEigenvalue { eigenvalue: f64, multiplicity: usize },
    /// Positive spectrum, but the only reversible logarithm is not a generator.
    PrincipalLogNotGenerator { log: Matrix, violations: Vec<Violation> },
    /// Not embeddable for a reason outside the spectral rules above.
    NotEmbeddable { reason: String },
    Undecided { reason: String },
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::ReversiblyEmbeddable { .. } => "ReversiblyEmbeddable",
            Classification::EmbeddableNotReversibly { .. } => "EmbeddableNotReversibly",
            Classification::NotEmbeddableNegativeSimpleEigenvalue { .. } => "NotEmbeddableNegativeSimpleEigenvalue",
            Classification::PrincipalLogNotGenerator { .. } => "PrincipalLogNotGenerator",
            Classification::NotEmbeddable { .. } => "NotEmbeddable",
            Classification::Undecided { .. } => "Undecided",
        }
    }

    pub fn is_embeddable(&self) -> Option<bool> {
        match self {
            Classification::ReversiblyEmbeddable { .. } | Classification::EmbeddableNotReversibly { .. } => Some(true),
            Classification::Undecided { .. } => None,
            _ => Some(false),
        }
    }
}

/// Round-trip residual of one log method, and its distance from the eigen log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogResidual {
    pub method: LogMethod,
    pub residual: f64,
    pub gap_to_eigen: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddabilityReport {
    pub dimension: usize,
    pub determinant: f64,
    pub reversibility: ReversibilityCertificate,
    /// Strictly positive reversing measure used for the spectral analysis.
    pub measure: Option<ProbabilityVector>,
    pub spectrum: Option<SpectrumSummary>,
    pub classification: Classification,
    /// Coefficients of the principal log as a polynomial in `M - 1`.
    pub alpha: Option<Vec<f64>>,
    pub log_residuals: Vec<LogResidual>,
    /// Further verified embeddings beyond the one named by the classification.
    pub additional_embeddings: Vec<GeneratorPair>,
    pub notes: Vec<String>,
}

impl EmbeddabilityReport {
    /// Every generator carried by the report.
    pub fn generators(&self) -> Vec<&Matrix> {
        let mut out = Vec::new();
        match &self.classification {
            Classification::ReversiblyEmbeddable { generator } => out.push(generator.matrix()),
            Classification::EmbeddableNotReversibly { pairs, .. } => {
                for pair in pairs {
                    out.push(pair.forward.matrix());
                    out.push(pair.reverse.matrix());
                }
            }
            _ => {}
        }
        for pair in &self.additional_embeddings {
            out.push(pair.forward.matrix());
            out.push(pair.reverse.matrix());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum KendallOutcome {
    Embeddable(RateMatrix),
    NotEmbeddable { determinant: f64 },
}

/// Two-state criterion: `[[1-a, a], [b, 1-b]]` is embeddable iff `a + b < 1`,
/// with the unique generator `-log(1 - a - b)/(a + b) (M - 1)`.
pub fn kendall_2x2(m: &StochasticMatrix, tol: &Tolerances) -> Result<KendallOutcome> {
    if m.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: m.dim() });
    }
    let s = m[(0, 1)] + m[(1, 0)];
    if s >= 1.0 {
        return Ok(KendallOutcome::NotEmbeddable { determinant: 1.0 - s });
    }
    let rate = if s == 0.0 { 0.0 } else { -(-s).ln_1p() / s };
    let q = m.minus_identity().scale(rate);
    Ok(KendallOutcome::Embeddable(validate_generator(q, tol.entry_tol, tol.row_tol)?))
}

/// `mu` such that `M = J/3 + mu (1 - J/3)`, if `M` has that shape.
fn constant_input_mu(m: &Matrix) -> Option<f64> {
    if m.dim() != 3 {
        return None;
    }
    let diag = m[(0, 0)];
    let off = m[(0, 1)];
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { diag } else { off };
            if (m[(i, j)] - expected).abs() > STRUCTURE_TOL {
                return None;
            }
        }
    }
    Some(diag - off)
}

/// Accepts `q` as an embedding witness for `m` if it is a generator with
/// `||expm(q) - m||_inf <= emb_tol`.
fn accept_generator(q: Matrix, m: &Matrix, tol: &Tolerances) -> std::result::Result<RateMatrix, String> {
    let residual = expm(&q).map_err(|e| e.to_string())?.max_abs_diff(m);
    if residual > tol.emb_tol {
        return Err(format!("exponential round-trip residual {residual:e} exceeds {:e}", tol.emb_tol));
    }
    validate_generator(q, tol.entry_tol, tol.row_tol).map_err(|e| e.to_string())
}

/// Runs reversibility detection, then the spectral decision rules.
pub fn classify_embeddability(m: &StochasticMatrix, tol: &Tolerances) -> EmbeddabilityReport {
    let reversibility = find_reversing_measure(m, tol);
    let mut report = EmbeddabilityReport {
        dimension: m.dim(),
        determinant: determinant(m),
        measure: None,
        spectrum: None,
        classification: Classification::Undecided { reason: String::new() },
        alpha: None,
        log_residuals: Vec::new(),
        additional_embeddings: Vec::new(),
        notes: Vec::new(),
        reversibility,
    };
    report.classification = match report.reversibility.verdict {
        Verdict::Reversible => classify_reversible(m, tol, &mut report),
        _ if m.dim() == 2 => classify_two_state(m, tol, &mut report),
        _ => Classification::Undecided {
            reason: format!("{} matrix with d > 2 is outside the decision procedure", report.reversibility.verdict.as_str()),
        },
    };
    report
}

fn classify_two_state(m: &StochasticMatrix, tol: &Tolerances, report: &mut EmbeddabilityReport) -> Classification {
    match kendall_2x2(m, tol) {
        Ok(KendallOutcome::Embeddable(q)) => match accept_generator(q.into_matrix(), m, tol) {
            Ok(generator) => {
                report.notes.push("two-state criterion; the generator is reversible for a measure with zeros".into());
                Classification::ReversiblyEmbeddable { generator }
            }
            Err(reason) => Classification::Undecided { reason },
        },
        Ok(KendallOutcome::NotEmbeddable { determinant }) => Classification::NotEmbeddable {
            reason: format!("two-state matrix with det = {determinant:e} <= 0"),
        },
        Err(e) => Classification::Undecided { reason: e.to_string() },
    }
}

fn classify_reversible(m: &StochasticMatrix, tol: &Tolerances, report: &mut EmbeddabilityReport) -> Classification {
    let Some(p) = report.reversibility.strictly_positive_measure(tol) else {
        return Classification::Undecided { reason: "no strictly positive reversing measure".into() };
    };
    let spectrum = match reversible_spectrum(m, &p, tol) {
        Ok(s) => s,
        Err(e) => return Classification::Undecided { reason: e.to_string() },
    };
    report.measure = Some(p.clone());
    report.spectrum = Some(spectrum.clone());

    if let Some(center) = spectrum.distinct_values.iter().find(|c| c.abs() <= tol.spec_tol) {
        if m.dim() == 2 {
            return Classification::NotEmbeddable { reason: format!("singular two-state matrix, eigenvalue {center:e}") };
        }
        return Classification::Undecided {
            reason: format!("eigenvalue cluster at {center:e} is within spec_tol of zero; no logarithm exists"),
        };
    }

    let negatives: Vec<(f64, usize)> = spectrum.clusters().filter(|(c, _)| *c < 0.0).collect();
    if let Some(&(eigenvalue, multiplicity)) = negatives.iter().find(|(_, k)| k % 2 == 1) {
        return Classification::NotEmbeddableNegativeSimpleEigenvalue { eigenvalue, multiplicity };
    }
    if !negatives.is_empty() {
        return classify_negative_even(m, tol, &negatives);
    }
    classify_positive(m, &p, tol, report)
}

fn classify_negative_even(m: &StochasticMatrix, tol: &Tolerances, negatives: &[(f64, usize)]) -> Classification {
    let Some(mu) = constant_input_mu(m) else {
        let facts: Vec<String> = negatives.iter().map(|(c, k)| format!("{c:e} (multiplicity {k})")).collect();
        return Classification::Undecided {
            reason: format!("negative eigenvalues of even multiplicity: {}", facts.join(", ")),
        };
    };
    let pairs = circulant_pair_logs(mu, tol);
    if !pairs.is_empty() {
        let commuting = pairs.iter().all(|p| p.commuting);
        return Classification::EmbeddableNotReversibly { pairs, commuting };
    }
    let delta0 = delta_k(0);
    if -mu > delta0 * (1.0 + 1e-12) {
        Classification::NotEmbeddable {
            reason: format!("3x3 constant-input matrix with double eigenvalue {mu:e} below -{delta0:e}"),
        }
    } else {
        Classification::Undecided { reason: format!("no verified cyclic pair for double eigenvalue {mu:e}") }
    }
}

fn classify_positive(
    m: &StochasticMatrix,
    p: &ProbabilityVector,
    tol: &Tolerances,
    report: &mut EmbeddabilityReport,
) -> Classification {
    let eigen = match principal_log_reversible(m, p, tol) {
        Ok(l) => l,
        Err(e) => return Classification::Undecided { reason: e.to_string() },
    };
    report.log_residuals.push(LogResidual { method: eigen.method, residual: eigen.residual, gap_to_eigen: 0.0 });
    match log_coefficients_vdm(m, p, tol) {
        Ok((solution, vdm)) => {
            report.log_residuals.push(LogResidual {
                method: vdm.method,
                residual: vdm.residual,
                gap_to_eigen: vdm.log.max_abs_diff(&eigen.log),
            });
            report.alpha = Some(solution.alpha);
        }
        Err(e) => report.notes.push(format!("polynomial log unavailable: {e}")),
    }

    if let Some(mu) = constant_input_mu(m).filter(|&mu| mu > 0.0) {
        report.additional_embeddings = circulant_pair_logs(mu, tol);
        if !report.additional_embeddings.is_empty() {
            report.notes.push(format!(
                "{} further non-reversible embedding pair(s) from cyclic generators",
                report.additional_embeddings.len()
            ));
        }
    }

    let (is_generator, violations) = is_markov_generator(&eigen.log, tol);
    if !is_generator {
        return Classification::PrincipalLogNotGenerator { log: eigen.log, violations };
    }
    match accept_generator(eigen.log, m, tol) {
        Ok(generator) => Classification::ReversiblyEmbeddable { generator },
        Err(reason) => Classification::Undecided { reason },
    }
}

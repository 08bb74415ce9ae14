//! Concrete matrix families: equal-input and constant-input matrices, the
//! symmetric 3x3 family `M(delta)` with its cyclic generators, the 4x4
//! dihedral example, and the Poisson cycle probabilities.
//!
//! Constants are always derived from `pi` and `sqrt(3)` in double precision.

use std::f64::consts::PI;

use crate::embedding::GeneratorPair;
use crate::error::{Error, Result};
use crate::linalg::{commutator, expm, Matrix};
use crate::markov::{RateMatrix, StochasticMatrix};
use crate::tolerance::Tolerances;

fn sqrt3() -> f64 {
    3f64.sqrt()
}

/// `e^{-pi sqrt 3}` (about 4.33342e-3), the parameter of the 3x3 example.
pub fn epsilon() -> f64 {
    (-PI * sqrt3()).exp()
}

/// `e^{-2 sqrt 3 pi}`, the parameter of the dihedral example (about 1.87785e-5).
pub fn dihedral_epsilon() -> f64 {
    (-2.0 * sqrt3() * PI).exp()
}

/// `lambda_k = 2 (2k + 1) pi / sqrt 3`: rates at which `expm(Q+(lambda))` is symmetric.
pub fn lambda_k(k: u32) -> f64 {
    2.0 * (2 * k + 1) as f64 * PI / sqrt3()
}

/// `delta_k = e^{-(2k + 1) pi sqrt 3}`; `delta_0 = epsilon()`.
pub fn delta_k(k: u32) -> f64 {
    (-((2 * k + 1) as f64) * PI * sqrt3()).exp()
}

fn check_vector(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::ParameterOutOfRange("empty input vector".into()));
    }
    if let Some(v) = x.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::ParameterOutOfRange(format!("input rates must be nonnegative, got {v}")));
    }
    Ok(x.iter().sum())
}

/// `C_x`: every row equal to `x`.
fn equal_rows(x: &[f64]) -> Matrix {
    Matrix::from_fn(x.len(), |_, j| x[j])
}

/// `M_x = (1 - xbar) 1 + C_x`, Markov for `xbar <= d / (d - 1)`.
pub fn equal_input_markov(x: &[f64]) -> Result<StochasticMatrix> {
    let xbar = check_vector(x)?;
    let d = x.len();
    if d > 1 && xbar > d as f64 / (d - 1) as f64 * (1.0 + 1e-15) {
        return Err(Error::ParameterOutOfRange(format!(
            "equal-input sum {xbar} exceeds d/(d-1) = {}",
            d as f64 / (d - 1) as f64
        )));
    }
    let m = &Matrix::identity(d).scale(1.0 - xbar) + &equal_rows(x);
    StochasticMatrix::new(m, &Tolerances::default())
}

/// `Q_x = -xbar 1 + C_x`.
pub fn equal_input_generator(x: &[f64]) -> Result<RateMatrix> {
    let xbar = check_vector(x)?;
    let q = &Matrix::identity(x.len()).scale(-xbar) + &equal_rows(x);
    RateMatrix::new(q, &Tolerances::default())
}

/// `c (J - d 1)` with `J` the all-ones matrix.
pub fn constant_input_generator(c: f64, d: usize) -> Result<RateMatrix> {
    if !c.is_finite() || c < 0.0 || d == 0 {
        return Err(Error::ParameterOutOfRange(format!("constant input needs c >= 0 and d > 0, got c={c}, d={d}")));
    }
    let q = Matrix::from_fn(d, |i, j| if i == j { c * (1.0 - d as f64) } else { c });
    RateMatrix::new(q, &Tolerances::default())
}

/// `J/3 + mu (1 - J/3)`: the 3x3 constant-input matrix with spectrum `{1, mu, mu}`.
fn constant_input_3(mu: f64) -> Matrix {
    Matrix::from_fn(3, |i, j| if i == j { (1.0 + 2.0 * mu) / 3.0 } else { (1.0 - mu) / 3.0 })
}

/// `M(delta) = (1/3) [[1 - 2 delta, 1 + delta, 1 + delta], ...]` with spectrum
/// `{1, -delta, -delta}`. Accepts `-1 <= delta <= 1/2`; negative values give
/// the positive-spectrum square roots `M(-delta)`.
pub fn m_delta(delta: f64) -> Result<StochasticMatrix> {
    if !delta.is_finite() || !(-1.0..=0.5).contains(&delta) {
        return Err(Error::ParameterOutOfRange(format!("M(delta) needs -1 <= delta <= 1/2, got {delta}")));
    }
    StochasticMatrix::new(constant_input_3(-delta), &Tolerances::default())
}

fn cycle_3() -> Matrix {
    Matrix::from_fn(3, |i, j| {
        if i == j {
            -1.0
        } else if j == (i + 1) % 3 {
            1.0
        } else {
            0.0
        }
    })
}

/// Clockwise and anticlockwise cyclic generators `Q+(lambda)`, `Q-(lambda) = Q+(lambda)^T`.
pub fn q_pair(lambda: f64) -> Result<(RateMatrix, RateMatrix)> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::ParameterOutOfRange(format!("cyclic rate must be positive, got {lambda}")));
    }
    let qp = cycle_3().scale(lambda);
    let qm = qp.transpose();
    let tol = Tolerances::default();
    Ok((RateMatrix::new(qp, &tol)?, RateMatrix::new(qm, &tol)?))
}

/// The 4x4 generator `pi/(2 sqrt 3) [[-9,6,3,0],[2,-9,4,3],[3,0,-9,6],[4,3,2,-9]]`.
pub fn dihedral_generator() -> RateMatrix {
    let rows = [
        [-9.0, 6.0, 3.0, 0.0],
        [2.0, -9.0, 4.0, 3.0],
        [3.0, 0.0, -9.0, 6.0],
        [4.0, 3.0, 2.0, -9.0],
    ];
    let q = Matrix::from_rows(&rows).expect("literal").scale(PI / (2.0 * sqrt3()));
    RateMatrix::new(q, &Tolerances::default()).expect("dihedral generator is valid")
}

fn permutation_matrix(sigma: [usize; 4]) -> Matrix {
    Matrix::from_fn(4, |i, j| if sigma[i] == j { 1.0 } else { 0.0 })
}

/// Same generator built in the permutation representation of the dihedral
/// group: `alpha (a - e) + beta (b - e) + gamma (a^2 - e)` with `a = (1234)`,
/// `b = (12)(34)`.
pub fn dihedral_generator_from_group() -> Matrix {
    let a = permutation_matrix([1, 2, 3, 0]);
    let b = permutation_matrix([1, 0, 3, 2]);
    let e = Matrix::identity(4);
    let alpha = 2.0 * PI / sqrt3();
    let beta = PI / sqrt3();
    let gamma = 3.0 * PI / (2.0 * sqrt3());
    let a2 = a.matmul(&a);
    let terms = [(&a - &e).scale(alpha), (&b - &e).scale(beta), (&a2 - &e).scale(gamma)];
    terms.iter().fold(Matrix::zeros(4), |acc, t| &acc + t)
}

/// `expm(dihedral_generator())`: symmetric, doubly stochastic, spectrum
/// `{1, e, -e, -e}` with `e = dihedral_epsilon()`.
pub fn dihedral_markov() -> StochasticMatrix {
    let m = expm(&dihedral_generator()).expect("bounded generator");
    StochasticMatrix::new(m, &Tolerances::default()).expect("exponential of a generator is Markov")
}

/// Which evaluation route to use for the cyclic exponential components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FBackend {
    Series,
    ClosedForm,
}

/// `f_l(x) = sum_m x^{3m+l} / (3m+l)!`, so that `f_0 + f_1 + f_2 = e^x`.
pub fn f_ell(ell: usize, x: f64, backend: FBackend) -> Result<f64> {
    if ell > 2 {
        return Err(Error::ParameterOutOfRange(format!("ell must be 0, 1 or 2, got {ell}")));
    }
    if !x.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("non-finite argument {x}")));
    }
    Ok(match backend {
        // The alternating series cancels catastrophically for large negative x.
        FBackend::Series if x >= -10.0 => f_ell_series(ell, x),
        _ => f_ell_closed(ell, x),
    })
}

fn f_ell_series(ell: usize, x: f64) -> f64 {
    let mut term = 1.0; // x^n / n!
    let mut sum = 0.0;
    for n in 0..4000usize {
        if n > 0 {
            term *= x / n as f64;
        }
        if n % 3 == ell {
            sum += term;
        }
        if n as f64 > x.abs() && (term == 0.0 || term.abs() <= 1e-17 * sum.abs()) {
            break;
        }
    }
    sum
}

fn f_ell_closed(ell: usize, x: f64) -> f64 {
    let phase = sqrt3() * x / 2.0;
    let damp = (-x / 2.0).exp();
    let (c, s) = (phase.cos(), phase.sin());
    match ell {
        0 => (x.exp() + 2.0 * damp * c) / 3.0,
        1 => (x.exp() - damp * (c - sqrt3() * s)) / 3.0,
        _ => (x.exp() - damp * (c + sqrt3() * s)) / 3.0,
    }
}

/// `P(S_1 = l mod 3)` for a Poisson count with intensity `lambda`, i.e.
/// `e^{-lambda} f_l(lambda)`, evaluated in closed form.
pub fn poisson_cycle_prob(lambda: f64, ell: usize) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::ParameterOutOfRange(format!("Poisson intensity must be positive, got {lambda}")));
    }
    let phase = sqrt3() * lambda / 2.0;
    let damp = (-1.5 * lambda).exp();
    let (c, s) = (phase.cos(), phase.sin());
    Ok(match ell {
        0 => (1.0 + 2.0 * damp * c) / 3.0,
        1 => (1.0 - damp * (c - sqrt3() * s)) / 3.0,
        2 => (1.0 - damp * (c + sqrt3() * s)) / 3.0,
        _ => return Err(Error::ParameterOutOfRange(format!("ell must be 0, 1 or 2, got {ell}"))),
    })
}

/// Commuting balanced pairs `(Q, Q^T)` with `Q = r (P - 1) + c (J - 3 1)`,
/// `P` the cyclic shift, whose exponential is the 3x3 constant-input matrix
/// with double eigenvalue `mu`.
///
/// The nontrivial eigenvalues of `Q` are `-3r/2 - 3c +- i sqrt(3) r / 2`.
/// Matching `e^{...} = mu` forces the phase `sqrt(3) r / 2` to be an odd
/// multiple of `pi` for `mu < 0` and a positive even multiple for `mu > 0`;
/// the modulus then fixes `c = (-ln|mu| - 3r/2) / 3`, which must be `>= 0`.
/// Branch `k` uses the `k`-th admissible phase. Every candidate is verified by
/// exponentiation against `emb_tol`.
pub fn circulant_pair_logs(mu: f64, tol: &Tolerances) -> Vec<GeneratorPair> {
    if !mu.is_finite() || mu == 0.0 || mu.abs() >= 1.0 {
        return Vec::new();
    }
    let target = constant_input_3(mu);
    let log_modulus = -mu.abs().ln();
    let mut pairs = Vec::new();
    for k in 0u32.. {
        let half_turns = if mu < 0.0 { 2 * k + 1 } else { 2 * (k + 1) };
        let rate = 2.0 * half_turns as f64 * PI / sqrt3();
        let mut shift = (log_modulus - 1.5 * rate) / 3.0;
        if shift < -tol.emb_tol {
            break;
        }
        shift = shift.max(0.0);
        let shift_part = constant_input_generator(shift, 3).expect("shift is nonnegative");
        let forward = &cycle_3().scale(rate) + shift_part.matrix();
        let reverse = forward.transpose();
        if let Some(pair) = GeneratorPair::verified(forward, reverse, &target, k as usize, rate, shift, tol) {
            pairs.push(pair);
        }
    }
    pairs
}

/// Balanced generator pairs embedding `M(delta)` for `0 < delta <= delta_0`.
/// At `delta = delta_k` there are exactly `k + 1` of them.
pub fn balanced_pair_logs_d3(delta: f64, tol: &Tolerances) -> Result<Vec<GeneratorPair>> {
    let delta0 = delta_k(0);
    if !delta.is_finite() || delta <= 0.0 || delta > delta0 * (1.0 + 1e-12) {
        return Err(Error::ParameterOutOfRange(format!(
            "M(delta) is embeddable only for 0 < delta <= {delta0}, got {delta}"
        )));
    }
    Ok(circulant_pair_logs(-delta, tol))
}

/// `max |[A, B]|` against a scale-aware threshold.
pub(crate) fn commute(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    let c = commutator(a, b).expect("equal dimensions");
    c.max_abs() <= tol * (1.0 + a.max_abs() * b.max_abs())
}

//! Detailed balance: the time-reversal involution, balanced pairs and the
//! search for reversing measures.
//!
//! A matrix `A` is `p`-reversible when `p_i A_ij = p_j A_ji` for all `i, j`,
//! equivalently `A = D^{-1} A^T D` with `D = diag(p)`. Two matrices `A, B`
//! with `p_i A_ij = p_j B_ji` form a `p`-balanced pair; each is then the
//! time reversal of the other.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::markov::{communication_classes, ProbabilityVector, StochasticMatrix};
use crate::tolerance::Tolerances;

/// Time reversal `D^{-1} A^T D` with `D = diag(p)`. An involution for fixed `p`.
pub fn tilde(a: &Matrix, p: &ProbabilityVector) -> Result<Matrix> {
    check_len(a, p)?;
    p.require_strictly_positive()?;
    Ok(Matrix::from_fn(a.dim(), |i, j| a[(j, i)] * p[j] / p[i]))
}

/// `max_{i,j} |p_i A_ij - p_j A_ji|`. Also meaningful when `p` has zeros.
pub fn detailed_balance_residual(a: &Matrix, p: &[f64]) -> f64 {
    exchange_residual(a, a, p)
}

/// `max_{i,j} |p_i A_ij - p_j B_ji|`.
pub fn exchange_residual(a: &Matrix, b: &Matrix, p: &[f64]) -> f64 {
    let n = a.dim();
    assert_eq!(b.dim(), n, "dimension mismatch");
    assert_eq!(p.len(), n, "dimension mismatch");
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((p[i] * a[(i, j)] - p[j] * b[(j, i)]).abs());
        }
    }
    worst
}

pub fn is_balanced_pair(a: &Matrix, b: &Matrix, p: &ProbabilityVector, db_tol: f64) -> bool {
    a.dim() == b.dim() && a.dim() == p.len() && exchange_residual(a, b, p) <= db_tol
}

/// A validated `p`-balanced pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancedPair {
    pub a: Matrix,
    pub b: Matrix,
    pub p: ProbabilityVector,
}

impl BalancedPair {
    pub fn new(a: Matrix, b: Matrix, p: ProbabilityVector, db_tol: f64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
        }
        check_len(&a, &p)?;
        let residual = exchange_residual(&a, &b, &p);
        if residual > db_tol {
            return Err(Error::NotReversibleForP { residual });
        }
        Ok(Self { a, b, p })
    }
}

/// Jordan product `(AB + BA) / 2`.
pub fn jordan_product(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok((&a.matmul(b) + &b.matmul(a)).scale(0.5))
}

fn check_len(a: &Matrix, p: &[f64]) -> Result<()> {
    if a.dim() != p.len() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: p.len() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Reversible,
    WeaklyReversible,
    NotReversible,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Reversible => "Reversible",
            Verdict::WeaklyReversible => "WeaklyReversible",
            Verdict::NotReversible => "NotReversible",
        }
    }
}

/// Evidence that a closed class admits no reversing measure. Both variants
/// carry a directed cycle whose two orientations have unequal weight products.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Witness {
    /// `M_ij > 0` but `M_ji = 0`; `cycle` starts with `i, j` and returns to `i`.
    AsymmetricZeroPattern {
        i: usize,
        j: usize,
        cycle: Vec<usize>,
        forward_product: f64,
        backward_product: f64,
    },
    /// Cycle closed by the non-tree edge that violates detailed balance.
    Cycle {
        cycle: Vec<usize>,
        forward_product: f64,
        backward_product: f64,
    },
}

impl Witness {
    /// States visited in forward orientation; the last state links back to the first.
    pub fn cycle(&self) -> &[usize] {
        match self {
            Witness::AsymmetricZeroPattern { cycle, .. } | Witness::Cycle { cycle, .. } => cycle,
        }
    }

    /// Recomputes `|F - B| / max(F, B)` for the cycle against `m`.
    pub fn relative_imbalance(&self, m: &Matrix) -> f64 {
        let (f, b) = cycle_products(m, self.cycle());
        let scale = f.max(b);
        if scale == 0.0 {
            0.0
        } else {
            (f - b).abs() / scale
        }
    }
}

/// Products of transition weights along `cycle` and along its reverse.
pub fn cycle_products(m: &Matrix, cycle: &[usize]) -> (f64, f64) {
    let k = cycle.len();
    let mut forward = 1.0;
    let mut backward = 1.0;
    for t in 0..k {
        let (u, v) = (cycle[t], cycle[(t + 1) % k]);
        forward *= m[(u, v)];
        backward *= m[(v, u)];
    }
    (forward, backward)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub states: Vec<usize>,
    pub closed: bool,
    /// `Some(true)` when a reversing measure exists on this closed class.
    /// Transient classes are not checked.
    pub passes: Option<bool>,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversibilityCertificate {
    pub verdict: Verdict,
    /// `Reversible`: one extreme measure per closed class, each positive on its
    /// class; any convex combination is also a reversing measure.
    /// `WeaklyReversible`: a single measure, zero off the passing classes.
    /// `NotReversible`: empty.
    pub measures: Vec<ProbabilityVector>,
    /// First failing closed class's witness, if any class failed.
    pub witness: Option<Witness>,
    pub classes: Vec<ClassReport>,
    /// Largest detailed-balance residual among the returned measures.
    pub max_residual: f64,
}

impl ReversibilityCertificate {
    /// Uniform mixture of the extreme measures, strictly positive for
    /// `Reversible` verdicts.
    pub fn mixture(&self) -> Option<Vec<f64>> {
        let first = self.measures.first()?;
        let k = self.measures.len() as f64;
        let mut mix = vec![0.0; first.len()];
        for p in &self.measures {
            for (acc, v) in mix.iter_mut().zip(p.iter()) {
                *acc += v / k;
            }
        }
        Some(mix)
    }

    /// Strictly positive reversing measure when the verdict is `Reversible`.
    pub fn strictly_positive_measure(&self, tol: &Tolerances) -> Option<ProbabilityVector> {
        if self.verdict != Verdict::Reversible {
            return None;
        }
        let p = ProbabilityVector::from_weights(&self.mixture()?, tol).ok()?;
        p.is_strictly_positive().then_some(p)
    }
}

/// Searches for reversing measures class by class.
///
/// Each closed class is checked for a symmetric zero pattern, then a BFS
/// spanning tree rooted at its smallest state fixes the measure via
/// `p_j = p_i M_ij / M_ji`; detailed balance on the remaining edges is
/// equivalent to Kolmogorov's loop criterion for the class.
pub fn find_reversing_measure(m: &StochasticMatrix, tol: &Tolerances) -> ReversibilityCertificate {
    let n = m.dim();
    let structure = communication_classes(m, tol.edge_tol);
    let edge = |i: usize, j: usize| m[(i, j)] > tol.edge_tol;

    let mut classes = Vec::with_capacity(structure.classes.len());
    let mut passing: Vec<Vec<f64>> = Vec::new();
    let mut first_witness = None;

    for (c, states) in structure.classes.iter().enumerate() {
        let closed = structure.closed_flags[c];
        if !closed {
            classes.push(ClassReport { states: states.clone(), closed, passes: None, witness: None });
            continue;
        }
        match check_class(m, states, &edge, tol.db_tol) {
            Ok(local) => {
                let mut p = vec![0.0; n];
                for (&s, v) in states.iter().zip(local) {
                    p[s] = v;
                }
                passing.push(p);
                classes.push(ClassReport { states: states.clone(), closed, passes: Some(true), witness: None });
            }
            Err(w) => {
                if first_witness.is_none() {
                    first_witness = Some(w.clone());
                }
                classes.push(ClassReport { states: states.clone(), closed, passes: Some(false), witness: Some(w) });
            }
        }
    }

    let all_pass = structure.all_closed() && first_witness.is_none();
    let to_pv = |p: Vec<f64>| ProbabilityVector::from_weights(&p, tol).expect("normalized class measure");
    let (verdict, measures) = if all_pass {
        (Verdict::Reversible, passing.into_iter().map(to_pv).collect::<Vec<_>>())
    } else if !passing.is_empty() {
        let k = passing.len() as f64;
        let mut mix = vec![0.0; n];
        for p in &passing {
            for (acc, v) in mix.iter_mut().zip(p) {
                *acc += v / k;
            }
        }
        (Verdict::WeaklyReversible, vec![to_pv(mix)])
    } else {
        (Verdict::NotReversible, Vec::new())
    };
    let max_residual = measures
        .iter()
        .map(|p| detailed_balance_residual(m, p))
        .fold(0.0, f64::max);

    ReversibilityCertificate { verdict, measures, witness: first_witness, classes, max_residual }
}

/// Returns the normalized measure on `states` (same order) or a witness.
fn check_class(
    m: &Matrix,
    states: &[usize],
    edge: &impl Fn(usize, usize) -> bool,
    db_tol: f64,
) -> std::result::Result<Vec<f64>, Witness> {
    // Zero-pattern symmetry, lexicographic scan.
    for &i in states {
        for &j in states {
            if i != j && edge(i, j) && !edge(j, i) {
                let mut cycle = vec![i];
                cycle.extend(directed_path(m, states, edge, j, i));
                cycle.pop();
                let (forward_product, backward_product) = cycle_products(m, &cycle);
                return Err(Witness::AsymmetricZeroPattern { i, j, cycle, forward_product, backward_product });
            }
        }
    }

    // BFS spanning tree from the smallest state.
    let root = states[0];
    let n = m.dim();
    let mut weight = vec![0.0; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut queue = VecDeque::from([root]);
    weight[root] = 1.0;
    visited[root] = true;
    while let Some(i) = queue.pop_front() {
        for &j in states {
            if !visited[j] && edge(i, j) {
                visited[j] = true;
                parent[j] = Some(i);
                weight[j] = weight[i] * m[(i, j)] / m[(j, i)];
                queue.push_back(j);
            }
        }
    }
    let total: f64 = states.iter().map(|&s| weight[s]).sum();
    let p: Vec<f64> = (0..n).map(|s| weight[s] / total).collect();

    for (a, &i) in states.iter().enumerate() {
        for &j in &states[a + 1..] {
            if !edge(i, j) {
                continue;
            }
            let is_tree = parent[j] == Some(i) || parent[i] == Some(j);
            if is_tree {
                continue;
            }
            if (p[i] * m[(i, j)] - p[j] * m[(j, i)]).abs() > db_tol {
                let cycle = tree_cycle(&parent, i, j);
                let (forward_product, backward_product) = cycle_products(m, &cycle);
                return Err(Witness::Cycle { cycle, forward_product, backward_product });
            }
        }
    }
    Ok(states.iter().map(|&s| p[s]).collect())
}

/// Shortest directed path `from -> ... -> to` inside `states` (inclusive).
fn directed_path(
    m: &Matrix,
    states: &[usize],
    edge: &impl Fn(usize, usize) -> bool,
    from: usize,
    to: usize,
) -> Vec<usize> {
    let n = m.dim();
    let mut prev: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for &v in states {
            if !seen[v] && edge(u, v) {
                seen[v] = true;
                prev[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    while let Some(p) = prev[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    path
}

/// Tree path `i -> ... -> j`; the closing edge is `j -> i`.
fn tree_cycle(parent: &[Option<usize>], i: usize, j: usize) -> Vec<usize> {
    let ancestors = |mut v: usize| {
        let mut chain = vec![v];
        while let Some(p) = parent[v] {
            chain.push(p);
            v = p;
        }
        chain
    };
    let up_i = ancestors(i);
    let up_j = ancestors(j);
    let lca = *up_i.iter().find(|v| up_j.contains(v)).expect("common root");
    let mut cycle: Vec<usize> = up_i.iter().copied().take_while(|&v| v != lca).collect();
    cycle.push(lca);
    let down: Vec<usize> = up_j.iter().copied().take_while(|&v| v != lca).collect();
    cycle.extend(down.into_iter().rev());
    cycle
}

/// Closed-form measure of an irreducible birth-death chain:
/// `p_{i+1} = p_i M_{i,i+1} / M_{i+1,i}`, then normalized.
pub fn tridiagonal_reversing_measure(m: &StochasticMatrix, tol: &Tolerances) -> Result<ProbabilityVector> {
    let n = m.dim();
    for i in 0..n {
        for j in 0..n {
            if i.abs_diff(j) > 1 && m[(i, j)] != 0.0 {
                return Err(Error::NotTridiagonal { i, j });
            }
        }
    }
    let mut w = vec![1.0; n];
    for i in 0..n.saturating_sub(1) {
        let up = m[(i, i + 1)];
        let down = m[(i + 1, i)];
        if !(up > 0.0) {
            return Err(Error::ZeroTransition { state: i });
        }
        if !(down > 0.0) {
            return Err(Error::ZeroTransition { state: i + 1 });
        }
        w[i + 1] = w[i] * up / down;
    }
    ProbabilityVector::from_weights(&w, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn stoch(rows: &[&[f64]]) -> StochasticMatrix {
        StochasticMatrix::new(Matrix::from_rows(rows).unwrap(), &tol()).unwrap()
    }

    fn q_plus(lambda: f64) -> Matrix {
        Matrix::from_rows(&[[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, -1.0]])
            .unwrap()
            .scale(lambda)
    }

    #[test]
    fn tilde_with_uniform_measure_is_transpose() {
        let m = Matrix::from_rows(&[[0.5, 0.5, 0.0], [0.1, 0.2, 0.7], [0.3, 0.3, 0.4]]).unwrap();
        let p = ProbabilityVector::uniform(3);
        assert!(tilde(&m, &p).unwrap().max_abs_diff(&m.transpose()) < 1e-16);
        let qp = q_plus(1.0);
        assert!(tilde(&qp, &p).unwrap().max_abs_diff(&qp.transpose()) < 1e-16);
    }

    #[test]
    fn tilde_rejects_zero_measure() {
        let p = ProbabilityVector::new(vec![1.0, 0.0], &tol()).unwrap();
        assert!(matches!(tilde(&Matrix::identity(2), &p), Err(Error::NotStrictlyPositive { .. })));
    }

    #[test]
    fn residual_examples() {
        let sym = Matrix::from_rows(&[[0.2, 0.8], [0.8, 0.2]]).unwrap();
        assert_eq!(detailed_balance_residual(&sym, &[0.5, 0.5]), 0.0);
        assert_eq!(detailed_balance_residual(&Matrix::identity(3), &[0.2, 0.3, 0.5]), 0.0);
        // (1/3) * 1 - (1/3) * 0
        assert!((detailed_balance_residual(&q_plus(1.0), &[1.0 / 3.0; 3]) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn balanced_pair_examples() {
        let p = ProbabilityVector::uniform(3);
        let lambda = 2.0 * std::f64::consts::PI / 3f64.sqrt();
        let qp = q_plus(lambda);
        let qm = qp.transpose();
        assert!(is_balanced_pair(&qp, &qm, &p, 1e-9));
        assert!(!is_balanced_pair(&qp, &qp, &p, 1e-9));
        assert!(BalancedPair::new(qp.clone(), qm, p.clone(), 1e-9).is_ok());
        assert!(matches!(BalancedPair::new(qp.clone(), qp, p, 1e-9), Err(Error::NotReversibleForP { .. })));
    }

    #[test]
    fn jordan_product_basics() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(jordan_product(&a, &Matrix::identity(2)).unwrap(), a);
        assert_eq!(jordan_product(&a, &a).unwrap(), a.matmul(&a));
        assert!(jordan_product(&a, &Matrix::zeros(3)).is_err());
    }

    #[test]
    fn two_state_reversible() {
        let (a, b) = (0.3, 0.6);
        let cert = find_reversing_measure(&stoch(&[&[1.0 - a, a], &[b, 1.0 - b]]), &tol());
        assert_eq!(cert.verdict, Verdict::Reversible);
        assert_eq!(cert.measures.len(), 1);
        assert!((cert.measures[0][0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((cert.measures[0][1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_state_with_zero_rate_is_weakly_reversible() {
        let cert = find_reversing_measure(&stoch(&[&[1.0, 0.0], &[0.4, 0.6]]), &tol());
        assert_eq!(cert.verdict, Verdict::WeaklyReversible);
        assert_eq!(cert.measures[0].to_vec(), vec![1.0, 0.0]);
    }

    #[test]
    fn equal_input_measure() {
        let x = [0.2, 0.3, 0.1];
        let xbar: f64 = x.iter().sum();
        let m = Matrix::from_fn(3, |i, j| x[j] + if i == j { 1.0 - xbar } else { 0.0 });
        let cert = find_reversing_measure(&StochasticMatrix::new(m, &tol()).unwrap(), &tol());
        assert_eq!(cert.verdict, Verdict::Reversible);
        for k in 0..3 {
            assert!((cert.measures[0][k] - x[k] / xbar).abs() < 1e-15);
        }
    }

    #[test]
    fn biased_cycle_has_cycle_witness() {
        let m = Matrix::from_fn(3, |i, j| {
            if i == j {
                0.9
            } else if j == (i + 1) % 3 {
                0.1
            } else {
                0.0
            }
        });
        let cert = find_reversing_measure(&StochasticMatrix::new(m.clone(), &tol()).unwrap(), &tol());
        assert_eq!(cert.verdict, Verdict::NotReversible);
        let w = cert.witness.unwrap();
        assert_eq!(w.cycle(), &[0, 1, 2]);
        assert!(w.relative_imbalance(&m) > 1e-9);

        // Brute force over both orientations of the only 3-cycle.
        let (f, b) = cycle_products(&m, &[0, 1, 2]);
        assert!((f - 1e-3).abs() < 1e-18 && b == 0.0);
    }

    #[test]
    fn two_way_biased_cycle_uses_tree_witness() {
        let m = Matrix::from_fn(3, |i, j| {
            if i == j {
                0.6
            } else if j == (i + 1) % 3 {
                0.3
            } else {
                0.1
            }
        });
        let cert = find_reversing_measure(&StochasticMatrix::new(m.clone(), &tol()).unwrap(), &tol());
        assert_eq!(cert.verdict, Verdict::NotReversible);
        let w = cert.witness.unwrap();
        assert!(matches!(w, Witness::Cycle { .. }));
        assert_eq!(w.cycle().len(), 3);
        let (f, b) = cycle_products(&m, w.cycle());
        assert!((f.max(b) - 0.027).abs() < 1e-15 && (f.min(b) - 0.001).abs() < 1e-15);
    }

    #[test]
    fn transient_state_gives_weak_reversibility() {
        let cert = find_reversing_measure(
            &stoch(&[&[0.5, 0.5, 0.0], &[0.5, 0.5, 0.0], &[0.2, 0.3, 0.5]]),
            &tol(),
        );
        assert_eq!(cert.verdict, Verdict::WeaklyReversible);
        assert_eq!(cert.measures[0].support(), vec![0, 1]);
        assert_eq!(cert.classes[1].passes, None);
    }

    #[test]
    fn identity_is_reversible_with_extreme_measures() {
        let cert = find_reversing_measure(&StochasticMatrix::new(Matrix::identity(3), &tol()).unwrap(), &tol());
        assert_eq!(cert.verdict, Verdict::Reversible);
        assert_eq!(cert.measures.len(), 3);
        let p = cert.strictly_positive_measure(&tol()).unwrap();
        assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn birth_death_closed_form() {
        let m = stoch(&[&[0.7, 0.3], &[0.6, 0.4]]);
        let p = tridiagonal_reversing_measure(&m, &tol()).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);

        let sym = stoch(&[&[0.5, 0.5, 0.0], &[0.5, 0.0, 0.5], &[0.0, 0.5, 0.5]]);
        let p = tridiagonal_reversing_measure(&sym, &tol()).unwrap();
        assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));

        let full = stoch(&[&[0.5, 0.25, 0.25], &[0.5, 0.0, 0.5], &[0.1, 0.4, 0.5]]);
        assert!(matches!(tridiagonal_reversing_measure(&full, &tol()), Err(Error::NotTridiagonal { i: 0, j: 2 })));
        let broken = stoch(&[&[1.0, 0.0], &[0.5, 0.5]]);
        assert!(matches!(tridiagonal_reversing_measure(&broken, &tol()), Err(Error::ZeroTransition { state: 0 })));
    }
}

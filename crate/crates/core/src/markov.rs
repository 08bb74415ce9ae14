//! Stochastic and rate matrices, communication classes and equilibrium vectors.

use std::ops::Deref;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{solve_linear, Matrix};
use crate::tolerance::Tolerances;

/// Residual bound for each per-class equilibrium solve.
const EQUILIBRIUM_RESIDUAL: f64 = 1e-9;

/// Row-stochastic matrix: nonnegative entries, unit row sums.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct StochasticMatrix(Matrix);

/// Markov generator: nonnegative off-diagonal entries, zero row sums.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RateMatrix(Matrix);

impl StochasticMatrix {
    pub fn new(raw: Matrix, tol: &Tolerances) -> Result<Self> {
        validate_stochastic(raw, tol.entry_tol, tol.row_tol)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// `M - 1`, a matrix with zero row sums.
    pub fn minus_identity(&self) -> Matrix {
        &self.0 - &Matrix::identity(self.0.dim())
    }
}

impl RateMatrix {
    pub fn new(raw: Matrix, tol: &Tolerances) -> Result<Self> {
        validate_generator(raw, tol.entry_tol, tol.row_tol)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl Deref for StochasticMatrix {
    type Target = Matrix;
    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl Deref for RateMatrix {
    type Target = Matrix;
    fn deref(&self) -> &Matrix {
        &self.0
    }
}

/// Checks nonnegativity and unit row sums. Negative entries no smaller than
/// `-entry_tol` are clamped to zero; row sums are checked, never rescaled.
pub fn validate_stochastic(raw: Matrix, entry_tol: f64, row_tol: f64) -> Result<StochasticMatrix> {
    let mut m = raw;
    clamp_entries(&mut m, entry_tol, |_, _| true)?;
    check_row_sums(&m, 1.0, row_tol)?;
    Ok(StochasticMatrix(m))
}

/// Checks nonnegative off-diagonal entries and zero row sums.
pub fn validate_generator(raw: Matrix, entry_tol: f64, row_tol: f64) -> Result<RateMatrix> {
    let mut m = raw;
    clamp_entries(&mut m, entry_tol, |i, j| i != j)?;
    check_row_sums(&m, 0.0, row_tol)?;
    Ok(RateMatrix(m))
}

fn clamp_entries(m: &mut Matrix, entry_tol: f64, applies: impl Fn(usize, usize) -> bool) -> Result<()> {
    let n = m.dim();
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(Error::NonFinite(i, j));
            }
            if applies(i, j) && v < 0.0 {
                if v < -entry_tol {
                    return Err(Error::NegativeEntry { i, j, value: v });
                }
                m[(i, j)] = 0.0;
            }
        }
    }
    Ok(())
}

fn check_row_sums(m: &Matrix, target: f64, row_tol: f64) -> Result<()> {
    for (row, sum) in m.row_sums().into_iter().enumerate() {
        if (sum - target).abs() > row_tol {
            return Err(Error::RowSum { row, sum, target });
        }
    }
    Ok(())
}

/// Nonnegative vector summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityVector {
    p: Vec<f64>,
    strictly_positive: bool,
}

impl ProbabilityVector {
    pub fn new(p: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidProbabilityVector("empty".into()));
        }
        if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -tol.entry_tol) {
            return Err(Error::InvalidProbabilityVector(format!("entry {i} = {v}")));
        }
        let p: Vec<f64> = p.into_iter().map(|v| v.max(0.0)).collect();
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > tol.row_tol {
            return Err(Error::InvalidProbabilityVector(format!("sums to {sum}")));
        }
        let strictly_positive = p.iter().all(|&v| v > tol.pos_tol);
        Ok(Self { p, strictly_positive })
    }

    /// Normalizes a nonnegative weight vector.
    pub fn from_weights(w: &[f64], tol: &Tolerances) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidProbabilityVector(format!("weights sum to {sum}")));
        }
        Self::new(w.iter().map(|v| v / sum).collect(), tol)
    }

    pub fn uniform(d: usize) -> Self {
        Self { p: vec![1.0 / d as f64; d], strictly_positive: d > 0 }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    pub fn support(&self) -> Vec<usize> {
        self.p.iter().enumerate().filter(|(_, v)| **v > 0.0).map(|(i, _)| i).collect()
    }

    /// Fails with the first offending index unless strictly positive.
    pub fn require_strictly_positive(&self) -> Result<()> {
        if self.strictly_positive {
            return Ok(());
        }
        let (index, &value) = self
            .p
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        Err(Error::NotStrictlyPositive { index, value })
    }
}

impl Deref for ProbabilityVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.p
    }
}

/// Communication classes of the positive-entry digraph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassStructure {
    /// Each class sorted ascending; classes ordered by their smallest state.
    pub classes: Vec<Vec<usize>>,
    /// `closed_flags[c]` iff no positive transition leaves class `c`.
    pub closed_flags: Vec<bool>,
    /// Class indices in topological order of the condensation (sources first).
    pub class_order: Vec<usize>,
    /// `class_of[state]` is the index of the class containing `state`.
    pub class_of: Vec<usize>,
}

impl ClassStructure {
    pub fn closed_classes(&self) -> impl Iterator<Item = (usize, &[usize])> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(|(c, _)| self.closed_flags[*c])
            .map(|(c, states)| (c, states.as_slice()))
    }

    pub fn all_closed(&self) -> bool {
        self.closed_flags.iter().all(|&f| f)
    }
}

/// Strongly connected components of the digraph with an edge `i -> j` iff
/// `M[i][j] > edge_tol` (Tarjan, iterative).
pub fn communication_classes(m: &Matrix, edge_tol: f64) -> ClassStructure {
    let n = m.dim();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| m[(i, j)] > edge_tol).collect())
        .collect();

    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // (vertex, next neighbour position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }

    comps.sort_by_key(|c| c[0]);
    let mut class_of = vec![0usize; n];
    for (c, states) in comps.iter().enumerate() {
        for &s in states {
            class_of[s] = c;
        }
    }

    let k = comps.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut indegree = vec![0usize; k];
    let mut closed_flags = vec![true; k];
    for i in 0..n {
        for &j in &adj[i] {
            let (a, b) = (class_of[i], class_of[j]);
            if a != b {
                closed_flags[a] = false;
                if !succ[a].contains(&b) {
                    succ[a].push(b);
                    indegree[b] += 1;
                }
            }
        }
    }

    // Kahn's algorithm, smallest class index first.
    let mut ready: std::collections::BTreeSet<usize> = (0..k).filter(|&c| indegree[c] == 0).collect();
    let mut class_order = Vec::with_capacity(k);
    while let Some(c) = ready.pop_first() {
        class_order.push(c);
        for &b in &succ[c] {
            indegree[b] -= 1;
            if indegree[b] == 0 {
                ready.insert(b);
            }
        }
    }

    ClassStructure { classes: comps, closed_flags, class_order, class_of }
}

/// Solves `p (M_C - 1) = 0`, `sum p = 1` on one class; returns the local vector.
fn class_equilibrium(m: &Matrix, class: &[usize]) -> Result<Vec<f64>> {
    let k = class.len();
    let sub = m.submatrix(class);
    if k == 1 {
        return Ok(vec![1.0]);
    }
    // Rows of (M_C^T - 1); the last equation is replaced by the normalization.
    let mut a = Matrix::from_fn(k, |i, j| sub[(j, i)] - if i == j { 1.0 } else { 0.0 });
    let mut rhs = vec![0.0; k];
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    rhs[k - 1] = 1.0;
    let p = solve_linear(&a, &rhs)
        .map_err(|e| Error::NumericalFailure(format!("equilibrium solve on class {class:?}: {e}")))?;
    let pm = sub.left_mul_vec(&p);
    let residual = pm.iter().zip(&p).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()));
    if residual > EQUILIBRIUM_RESIDUAL || p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(format!(
            "equilibrium residual {residual:e} on class {class:?}"
        )));
    }
    Ok(p)
}

/// One extreme equilibrium vector per closed class, supported on that class.
/// Every equilibrium vector of `M` is a convex combination of these.
pub fn equilibrium_basis(m: &StochasticMatrix, tol: &Tolerances) -> Result<Vec<ProbabilityVector>> {
    let structure = communication_classes(m, tol.edge_tol);
    equilibrium_basis_for(m, &structure, tol)
}

pub(crate) fn equilibrium_basis_for(
    m: &Matrix,
    structure: &ClassStructure,
    tol: &Tolerances,
) -> Result<Vec<ProbabilityVector>> {
    let n = m.dim();
    structure
        .closed_classes()
        .map(|(_, class)| {
            let local = class_equilibrium(m, class)?;
            let mut p = vec![0.0; n];
            for (&s, v) in class.iter().zip(local) {
                p[s] = v.max(0.0);
            }
            ProbabilityVector::from_weights(&p, tol)
        })
        .collect()
}

/// Direct-sum decomposition into irreducible blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockDecomposition {
    /// New index `k` corresponds to original state `permutation[k]`.
    pub permutation: Vec<usize>,
    /// Original state indices of each block, in block order.
    pub block_states: Vec<Vec<usize>>,
    pub blocks: Vec<StochasticMatrix>,
}

impl BlockDecomposition {
    pub fn s(&self) -> usize {
        self.blocks.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BlockOutcome {
    Decomposed(BlockDecomposition),
    /// Some class is not closed, so no strictly positive equilibrium exists.
    StrictPositiveEquilibriumImpossible { class: Vec<usize> },
}

/// Splits `M` into irreducible diagonal blocks when every communication class
/// is closed; this holds iff `M` has a strictly positive equilibrium vector.
pub fn block_decompose(m: &StochasticMatrix, tol: &Tolerances) -> Result<BlockOutcome> {
    let structure = communication_classes(m, tol.edge_tol);
    if let Some(c) = structure.closed_flags.iter().position(|&f| !f) {
        return Ok(BlockOutcome::StrictPositiveEquilibriumImpossible { class: structure.classes[c].clone() });
    }
    let permutation: Vec<usize> = structure.classes.iter().flatten().copied().collect();
    let blocks = structure
        .classes
        .iter()
        .map(|class| StochasticMatrix::new(m.submatrix(class), tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockOutcome::Decomposed(BlockDecomposition {
        permutation,
        block_states: structure.classes,
        blocks,
    }))
}

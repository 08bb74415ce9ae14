use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has no rows")]
    Empty,

    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("matrix exponential overflowed")]
    Overflow,

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("negative entry {value:e} at ({i}, {j})")]
    NegativeEntry { i: usize, j: usize, value: f64 },

    #[error("row {row} sums to {sum} (target {target})")]
    RowSum { row: usize, sum: f64, target: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("probability vector is not strictly positive (entry {index} = {value:e})")]
    NotStrictlyPositive { index: usize, value: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidProbabilityVector(String),

    #[error("matrix is not tridiagonal: entry ({i}, {j}) is nonzero")]
    NotTridiagonal { i: usize, j: usize },

    #[error("birth-death chain has a zero transition out of state {state}")]
    ZeroTransition { state: usize },

    #[error("spectrum is not positive: eigenvalue {eigenvalue:e}")]
    NonPositiveSpectrum { eigenvalue: f64 },

    #[error("matrix is not reversible for the given measure (residual {residual:e})")]
    NotReversibleForP { residual: f64 },

    #[error("Mercator series diverges: spectral radius bound {radius} of M - 1 is not below 1")]
    SeriesDivergence { radius: f64 },

    #[error("off-diagonal parameter b must be nonzero")]
    ZeroB,

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("unknown tolerance name `{0}`")]
    UnknownTolerance(String),
}

//! Reversibility and embeddability analysis for finite-state Markov matrices.
//!
//! The crate decides whether a stochastic matrix `M` satisfies detailed
//! balance, whether it is the exponential of a Markov generator, and when the
//! spectrum allows it, produces the generators themselves.
//!
//! ```
//! use revembed::{catalog, classify_embeddability, Classification, Tolerances};
//!
//! let m = catalog::m_delta(catalog::epsilon()).unwrap();
//! let report = classify_embeddability(&m, &Tolerances::default());
//! assert!(matches!(report.classification, Classification::EmbeddableNotReversibly { .. }));
//! ```

pub mod catalog;
pub mod embedding;
pub mod error;
pub mod linalg;
pub mod markov;
pub mod reversibility;
pub mod tolerance;

pub use embedding::{
    classify_embeddability, is_markov_generator, kendall_2x2, Classification, EmbeddabilityReport, GeneratorPair,
    LogCandidate, LogMethod,
};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use markov::{ProbabilityVector, RateMatrix, StochasticMatrix};
pub use reversibility::{find_reversing_measure, ReversibilityCertificate, Verdict};
pub use tolerance::Tolerances;

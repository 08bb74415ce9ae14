//! Numerical tolerances shared by every analysis step.
//!
//! The underlying characterizations are exact statements; every threshold
//! here is an engineering choice and is echoed in reports so results can be
//! reproduced.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Negative entries down to `-entry_tol` are clamped to zero.
    pub entry_tol: f64,
    /// Allowed deviation of a row sum from its target (1 or 0).
    pub row_tol: f64,
    /// A transition `i -> j` exists iff `M[i][j] > edge_tol`.
    pub edge_tol: f64,
    /// A probability vector is strictly positive iff `min p > pos_tol`.
    pub pos_tol: f64,
    /// Absolute detailed-balance residual accepted as balanced.
    pub db_tol: f64,
    /// Eigenvalues closer than this are treated as one cluster.
    pub cluster_tol: f64,
    /// An eigenvalue cluster counts as positive iff its center exceeds this.
    pub spec_tol: f64,
    /// Accepted `||expm(Q) - M||_inf` for an embedding witness.
    pub emb_tol: f64,
    /// Symmetry check for the eigensolver, relative to `max |S_ij|`.
    pub sym_tol: f64,
    /// Hit threshold for the semigroup coincidence probe.
    pub probe_tol: f64,
    /// Safety margin below 1 for the Mercator series spectral radius.
    pub rho_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            entry_tol: 1e-12,
            row_tol: 1e-10,
            edge_tol: 1e-12,
            pos_tol: 1e-12,
            db_tol: 1e-9,
            cluster_tol: 1e-8,
            spec_tol: 1e-10,
            emb_tol: 1e-9,
            sym_tol: 1e-9,
            probe_tol: 1e-9,
            rho_margin: 1e-6,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 11] = [
        "entry_tol",
        "row_tol",
        "edge_tol",
        "pos_tol",
        "db_tol",
        "cluster_tol",
        "spec_tol",
        "emb_tol",
        "sym_tol",
        "probe_tol",
        "rho_margin",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        let slot = match name {
            "entry_tol" => &mut self.entry_tol,
            "row_tol" => &mut self.row_tol,
            "edge_tol" => &mut self.edge_tol,
            "pos_tol" => &mut self.pos_tol,
            "db_tol" => &mut self.db_tol,
            "cluster_tol" => &mut self.cluster_tol,
            "spec_tol" => &mut self.spec_tol,
            "emb_tol" => &mut self.emb_tol,
            "sym_tol" => &mut self.sym_tol,
            "probe_tol" => &mut self.probe_tol,
            "rho_margin" => &mut self.rho_margin,
            _ => return None,
        };
        Some(slot)
    }

    /// Overrides one tolerance by name. Values must be finite and nonnegative.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::ParameterOutOfRange(format!(
                "tolerance {name} must be finite and nonnegative, got {value}"
            )));
        }
        let slot = self
            .slot(name)
            .ok_or_else(|| Error::UnknownTolerance(name.to_string()))?;
        *slot = value;
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let mut copy = *self;
        copy.slot(name).map(|v| *v)
    }
}

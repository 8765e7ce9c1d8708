//! Numerical tolerances shared by every module.
//!
//! All values are double-precision thresholds; counts (`dense_cutoff`,
//! `max_iters`, `block_cutoff`, `curve_cutoff`) are stored as integers.

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Row-sum check when loading a matrix.
    pub stochastic_tol: f64,
    /// An entry above this value is an edge of the support graph.
    pub support_tol: f64,
    /// Maximum outgoing mass of a closed class.
    pub closure_tol: f64,
    /// Residual bound for stationary vectors.
    pub solver_tol: f64,
    pub dense_cutoff: usize,
    pub max_iters: usize,
    pub herm_tol: f64,
    pub psd_tol: f64,
    pub trace_tol: f64,
    pub iso_tol: f64,
    /// Largest admissible number of k-tuples in a density block.
    pub block_cutoff: usize,
    pub curve_cutoff: usize,
    pub support_mass_tol: f64,
    /// Eigenvalue threshold for numerical rank.
    pub rank_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            stochastic_tol: 1e-9,
            support_tol: 1e-14,
            closure_tol: 1e-12,
            solver_tol: 1e-10,
            dense_cutoff: 2000,
            max_iters: 1_000_000,
            herm_tol: 1e-10,
            psd_tol: 1e-10,
            trace_tol: 1e-10,
            iso_tol: 1e-10,
            block_cutoff: 4096,
            curve_cutoff: 512,
            support_mass_tol: 1e-12,
            rank_tol: 1e-10,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 14] = [
        "stochastic_tol",
        "support_tol",
        "closure_tol",
        "solver_tol",
        "dense_cutoff",
        "max_iters",
        "herm_tol",
        "psd_tol",
        "trace_tol",
        "iso_tol",
        "block_cutoff",
        "curve_cutoff",
        "support_mass_tol",
        "rank_tol",
    ];

    /// Override one tolerance by name, parsing `value` as a float or count.
    pub fn set(&mut self, name: &str, value: &str) -> Result<()> {
        let float = || -> Result<f64> {
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("tolerance `{name}`: `{value}` is not a number")))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Invalid(format!("tolerance `{name}` must be finite and >= 0")));
            }
            Ok(v)
        };
        let count = || -> Result<usize> {
            value.trim().parse().map_err(|_| Error::Parse(format!("tolerance `{name}`: `{value}` is not a count")))
        };
        match name {
            "stochastic_tol" => self.stochastic_tol = float()?,
            "support_tol" => self.support_tol = float()?,
            "closure_tol" => self.closure_tol = float()?,
            "solver_tol" => self.solver_tol = float()?,
            "dense_cutoff" => self.dense_cutoff = count()?,
            "max_iters" => self.max_iters = count()?,
            "herm_tol" => self.herm_tol = float()?,
            "psd_tol" => self.psd_tol = float()?,
            "trace_tol" => self.trace_tol = float()?,
            "iso_tol" => self.iso_tol = float()?,
            "block_cutoff" => self.block_cutoff = count()?,
            "curve_cutoff" => self.curve_cutoff = count()?,
            "support_mass_tol" => self.support_mass_tol = float()?,
            "rank_tol" => self.rank_tol = float()?,
            other => return Err(Error::Invalid(format!("unknown tolerance `{other}`"))),
        }
        Ok(())
    }
}

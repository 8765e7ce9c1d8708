//! Entangled Markov chains lifted from classical stochastic matrices.
//!
//! A classical chain `Π` is lifted to a quantum Markov chain by replacing the
//! transition probabilities with their square roots and the ordinary matrix
//! product with the Schur (entrywise) product. Everything here works on finite
//! state spaces; infinite chains are handled through truncation windows whose
//! leaked mass is tracked explicitly.
//!
//! - [`classical`]: stochastic matrices, ergodic classification, stationary vectors.
//! - [`schur`]: the embedding `Φ`, the contraction `m` and the Schur product.
//! - [`entangled`]: the entangled operator `P_χ`, the transition expectation,
//!   the generating isometry and the quantum measure `Q(π)`.
//! - [`correlator`]: finite-dimensional distributions and density blocks.
//! - [`ergodic`]: ergodic components and the clustering verdict.
//! - [`groups`]: random walks on finite and truncated discrete groups.

pub mod classical;
pub mod correlator;
pub mod entangled;
pub mod ergodic;
mod error;
pub mod groups;
pub mod linalg;
pub mod sampling;
pub mod schur;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;

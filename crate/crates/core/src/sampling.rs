//! Seeded random generators for matrices, chains and phases used by the
//! invariant suites.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::CMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_matrix<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn hermitian_matrix<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let g = complex_matrix(rng, n);
    (&g + g.adjoint()).scale(0.5)
}

/// `G G*` normalized to unit trace.
pub fn density_matrix<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let g = complex_matrix(rng, n);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale(tr)
}

/// A row-stochastic matrix; roughly `zero_fraction` of the entries are zeroed
/// (the diagonal is kept positive so no row becomes empty).
pub fn stochastic_matrix<R: Rng>(rng: &mut R, n: usize, zero_fraction: f64) -> DMatrix<f64> {
    let mut m =
        DMatrix::from_fn(
            n,
            n,
            |i, j| {
                if i != j && rng.gen::<f64>() < zero_fraction {
                    0.0
                } else {
                    rng.gen_range(0.05..1.0)
                }
            },
        );
    for mut row in m.row_iter_mut() {
        let s: f64 = row.sum();
        row /= s;
    }
    m
}

/// Phases `e^{iθ}` with θ uniform on `[0, 2π)`.
pub fn phases<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
}

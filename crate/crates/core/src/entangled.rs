//! The entangled lift of a classical chain.
//!
//! For a stochastic matrix `Π` and unit-modulus phases `χ`, the entangled
//! operator acts as
//!
//! ```text
//! P_χ(A)_ij = Σ_{k,l} conj(χ_ik) χ_jl √(Π_ik Π_jl) A_kl = (W A W*)_ij,   W_ik = conj(χ_ik) √Π_ik
//! ```
//!
//! and the transition expectation is `E(A ⊗ B) = A ⋄ P_χ(B)`. `P_χ` itself is
//! never materialized as a superoperator; only its action is exposed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{StationaryDistribution, StochasticMatrix};
use crate::linalg::{self, CMatrix, ZERO};
use crate::sampling;
use crate::schur::{self, ProductMatrix};
use crate::{Error, Result};

/// Allowed deviation of `|χ_ij|` from one.
pub const PHASE_TOL: f64 = 1e-12;

/// Unit-modulus gauge phases `χ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    entries: CMatrix,
}

impl PhaseMatrix {
    /// The trivial gauge `χ ≡ 1`.
    pub fn ones(n: usize) -> Self {
        PhaseMatrix { entries: CMatrix::from_element(n, n, linalg::ONE) }
    }

    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::shape("square phase matrix", format!("{}x{}", entries.nrows(), entries.ncols())));
        }
        let phases = PhaseMatrix { entries };
        phases.validate()?;
        Ok(phases)
    }

    /// `e^{iθ}` with θ uniform, deterministic per seed.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = sampling::rng(seed);
        PhaseMatrix { entries: sampling::phases(&mut rng, n) }
    }

    /// Skips validation; used to exercise the validator.
    #[doc(hidden)]
    pub fn new_unchecked(entries: CMatrix) -> Self {
        PhaseMatrix { entries }
    }

    pub fn modulus_defect(&self) -> f64 {
        self.entries.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let defect = self.modulus_defect();
        if defect.is_nan() || defect > PHASE_TOL {
            return Err(Error::Invariant { name: "phase_unit_modulus".into(), residual: defect, tol: PHASE_TOL });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }
}

/// Phase input: rows of `[re, im]` pairs, or `{"seed": n}` for random phases.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum PhaseSpec {
    Explicit(Vec<Vec<[f64; 2]>>),
    Seeded { seed: u64 },
}

impl PhaseSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("phase spec: {e}")))
    }

    pub fn build(&self, n: usize) -> Result<PhaseMatrix> {
        match self {
            PhaseSpec::Seeded { seed } => Ok(PhaseMatrix::random(n, *seed)),
            PhaseSpec::Explicit(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::shape(format!("{n}x{n} phases"), format!("{} rows", rows.len())));
                }
                PhaseMatrix::new(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
            }
        }
    }
}

/// `Π` together with its phases and the cached square roots.
#[derive(Debug, Clone)]
pub struct EntangledSpec {
    base: StochasticMatrix,
    phases: PhaseMatrix,
    sqrt_cache: DMatrix<f64>,
    // W_ik = conj(χ_ik) √Π_ik
    factor: CMatrix,
}

impl EntangledSpec {
    pub fn new(base: StochasticMatrix, phases: PhaseMatrix) -> Result<Self> {
        if phases.len() != base.len() {
            return Err(Error::shape(format!("{}x{} phases", base.len(), base.len()), phases.len()));
        }
        phases.validate()?;
        let sqrt_cache = base.entries().map(f64::sqrt);
        let factor = build_factor(&sqrt_cache, &phases);
        Ok(EntangledSpec { base, phases, sqrt_cache, factor })
    }

    pub fn unphased(base: StochasticMatrix) -> Self {
        let n = base.len();
        Self::new(base, PhaseMatrix::ones(n)).expect("trivial phases are valid")
    }

    pub fn base(&self) -> &StochasticMatrix {
        &self.base
    }

    pub fn phases(&self) -> &PhaseMatrix {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn sqrt_cache(&self) -> &DMatrix<f64> {
        &self.sqrt_cache
    }

    /// `W` with `P_χ(A) = W A W*`.
    pub fn factor(&self) -> &CMatrix {
        &self.factor
    }

    /// `max |cache_ij² − Π_ij|`.
    pub fn sqrt_cache_defect(&self) -> f64 {
        self.sqrt_cache.iter().zip(self.base.entries().iter()).map(|(s, p)| (s * s - p).abs()).fold(0.0, f64::max)
    }

    /// Corrupts one cached square root; negative control for the invariant suite.
    #[doc(hidden)]
    pub fn perturb_sqrt_cache(&mut self, i: usize, j: usize, delta: f64) {
        self.sqrt_cache[(i, j)] += delta;
        self.factor = build_factor(&self.sqrt_cache, &self.phases);
    }

    fn check(&self, a: &CMatrix) -> Result<()> {
        let n = self.len();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::shape(format!("{n}x{n}"), format!("{}x{}", a.nrows(), a.ncols())));
        }
        Ok(())
    }

    /// `P_χ(A)`.
    pub fn apply(&self, a: &CMatrix) -> Result<CMatrix> {
        self.check(a)?;
        Ok(&self.factor * a * self.factor.adjoint())
    }

    /// The single entry `P_χ(X)_ab`.
    pub fn apply_entry(&self, a: usize, b: usize, x: &CMatrix) -> Complex64 {
        let n = self.len();
        let mut acc = ZERO;
        for k in 0..n {
            let wak = self.factor[(a, k)];
            if wak == ZERO {
                continue;
            }
            let mut inner = ZERO;
            for l in 0..n {
                inner += x[(k, l)] * self.factor[(b, l)].conj();
            }
            acc += wak * inner;
        }
        acc
    }

    /// `P_χ(e_cd)_ab = W_ac conj(W_bd)`.
    #[inline]
    pub fn apply_unit_entry(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        self.factor[(a, c)] * self.factor[(b, d)].conj()
    }

    /// `P_χ(1) = W W*`.
    pub fn p_of_identity(&self) -> CMatrix {
        &self.factor * self.factor.adjoint()
    }

    pub fn identity_report(&self) -> SchurIdentityReport {
        let p1 = self.p_of_identity();
        let n = self.len();
        let mut diag: f64 = 0.0;
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    diag = diag.max((p1[(i, i)] - linalg::ONE).norm());
                } else {
                    off = off.max(p1[(i, j)].norm());
                }
            }
        }
        SchurIdentityReport {
            identity_preserving: diag <= 1e-10,
            entangled: off > 1e-10,
            max_diagonal_defect: diag,
            max_off_diagonal: off,
        }
    }

    /// `V e_i = Σ_j χ_ij √Π_ij e_i ⊗ e_j`.
    pub fn isometry(&self) -> IsometryV {
        let n = self.len();
        let columns = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| self.sqrt_cache[(i, j)] != 0.0)
                    .map(|j| (j, self.phases.get(i, j) * self.sqrt_cache[(i, j)]))
                    .collect()
            })
            .collect();
        IsometryV { n, columns }
    }

    /// `E(A ⊗ B) = A ⋄ P_χ(B)`.
    pub fn transition_expectation(&self, a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
        self.check(a)?;
        schur::schur_product(a, &self.apply(b)?)
    }

    /// `E_1(X) = E(1 ⊗ X)`, a diagonal matrix.
    pub fn markov_operator(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check(x)?;
        let n = self.len();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = self.apply_entry(i, i, x);
        }
        Ok(out)
    }

    /// `Q_χ(π)` for a stationary distribution.
    pub fn quantum_measure(&self, pi: &StationaryDistribution) -> Result<QuantumMeasure> {
        self.quantum_measure_from_weights(&pi.weights, true)
    }

    /// `Q_χ(π)_ij = Σ_k π_k χ_ki conj(χ_kj) √(Π_ki Π_kj) = (W* diag(π) W)_ij`.
    ///
    /// `normalized` marks weights that form a probability vector; otherwise the
    /// result is an unnormalized positive matrix without state semantics.
    pub fn quantum_measure_from_weights(&self, weights: &[f64], normalized: bool) -> Result<QuantumMeasure> {
        let n = self.len();
        if weights.len() != n {
            return Err(Error::shape(format!("{n} weights"), weights.len()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Invalid(format!("weight {i} is {w}, must be >= 0")));
        }
        let mut q = CMatrix::zeros(n, n);
        for (k, &pk) in weights.iter().enumerate() {
            if pk == 0.0 {
                continue;
            }
            for i in 0..n {
                let wki = self.factor[(k, i)];
                if wki == ZERO {
                    continue;
                }
                for j in 0..n {
                    q[(i, j)] += wki.conj() * self.factor[(k, j)] * pk;
                }
            }
        }
        Ok(QuantumMeasure { matrix: q, weights: weights.to_vec(), normalized })
    }
}

fn build_factor(sqrt_cache: &DMatrix<f64>, phases: &PhaseMatrix) -> CMatrix {
    CMatrix::from_fn(sqrt_cache.nrows(), sqrt_cache.ncols(), |i, k| phases.get(i, k).conj() * sqrt_cache[(i, k)])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchurIdentityReport {
    pub identity_preserving: bool,
    pub entangled: bool,
    pub max_diagonal_defect: f64,
    pub max_off_diagonal: f64,
}

/// The generating isometry, stored column by column: column `i` lives on the
/// pairs `(i, j)`.
#[derive(Debug, Clone)]
pub struct IsometryV {
    n: usize,
    columns: Vec<Vec<(usize, Complex64)>>,
}

impl IsometryV {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Nonzero entries of `V e_i` as `(j, coefficient of e_i ⊗ e_j)`.
    pub fn column(&self, i: usize) -> &[(usize, Complex64)] {
        &self.columns[i]
    }

    pub fn column_norm_sqr(&self, i: usize) -> f64 {
        self.columns[i].iter().map(|(_, z)| z.norm_sqr()).sum()
    }

    /// `V*V`.
    pub fn gram(&self) -> CMatrix {
        let mut g = CMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            g[(i, i)] = Complex64::new(self.column_norm_sqr(i), 0.0);
        }
        // columns i ≠ k live on disjoint pairs, so V*V is diagonal
        g
    }

    /// `max_i |(V*V)_ii − (1 − deficiency_i)|`.
    pub fn isometry_defect(&self, deficiency: &[f64]) -> f64 {
        (0..self.n).map(|i| (self.column_norm_sqr(i) - (1.0 - deficiency[i])).abs()).fold(0.0, f64::max)
    }

    /// Dense `n² × n` matrix.
    pub fn to_dense(&self) -> CMatrix {
        let mut v = CMatrix::zeros(self.n * self.n, self.n);
        for (i, col) in self.columns.iter().enumerate() {
            for &(j, z) in col {
                v[(i * self.n + j, i)] = z;
            }
        }
        v
    }

    /// `V* X V`.
    pub fn sandwich(&self, x: &ProductMatrix) -> Result<CMatrix> {
        if x.factor() != self.n {
            return Err(Error::shape(format!("factor {}", self.n), format!("factor {}", x.factor())));
        }
        let n = self.n;
        Ok(CMatrix::from_fn(n, n, |i, k| {
            let mut acc = ZERO;
            for &(j, vij) in &self.columns[i] {
                for &(l, vkl) in &self.columns[k] {
                    acc += vij.conj() * x.get((i, j), (k, l)) * vkl;
                }
            }
            acc
        }))
    }
}

/// The one-site measure `Q_χ(π)` paired with observables as `Tr(Q X)`.
#[derive(Debug, Clone)]
pub struct QuantumMeasure {
    matrix: CMatrix,
    weights: Vec<f64>,
    normalized: bool,
}

impl QuantumMeasure {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// The classical weights `π` the measure was built from.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Tr(Q X)`.
    pub fn expectation(&self, x: &CMatrix) -> Complex64 {
        linalg::trace_of_product(&self.matrix, x)
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// Largest violation of `|Q_ij| ≤ √(π_i π_j)` relative to the classical
    /// one-step marginal `πΠ` (equal to `π` for invariant weights).
    pub fn holder_excess(&self, marginal: &[f64]) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max(self.matrix[(i, j)].norm() - (marginal[i] * marginal[j]).sqrt());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix_unit, ONE};

    fn spec(rows: &[&[f64]]) -> EntangledSpec {
        EntangledSpec::unphased(
            StochasticMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap(),
        )
    }

    // the defining quadruple sum
    fn apply_by_definition(s: &EntangledSpec, a: &CMatrix) -> CMatrix {
        let n = s.len();
        let pi = s.base();
        let chi = s.phases();
        CMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for k in 0..n {
                for l in 0..n {
                    acc += chi.get(i, k).conj() * chi.get(j, l) * (pi.get(i, k) * pi.get(j, l)).sqrt() * a[(k, l)];
                }
            }
            acc
        })
    }

    #[test]
    fn identity_chain_gives_identity_operator() {
        let s = spec(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let mut rng = sampling::rng(1);
        let a = sampling::complex_matrix(&mut rng, 3);
        assert!(linalg::max_abs_diff(&s.apply(&a).unwrap(), &a) < 1e-15);
        let r = s.identity_report();
        assert!(r.identity_preserving && !r.entangled);
    }

    #[test]
    fn uniform_two_state_chain() {
        let s = spec(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let p1 = s.p_of_identity();
        assert!(linalg::max_abs_diff(&p1, &CMatrix::from_element(2, 2, ONE)) < 1e-15);
        let r = s.identity_report();
        assert!(r.identity_preserving && r.entangled);
    }

    #[test]
    fn flip_chain_is_not_entangled() {
        let r = spec(&[&[0.0, 1.0], &[1.0, 0.0]]).identity_report();
        assert!(r.identity_preserving && !r.entangled);
    }

    #[test]
    fn factorized_action_matches_definition() {
        let mut rng = sampling::rng(2);
        for seed in 0..5 {
            let pi = StochasticMatrix::from_dense(sampling::stochastic_matrix(&mut rng, 4, 0.3)).unwrap();
            let s = EntangledSpec::new(pi, PhaseMatrix::random(4, seed)).unwrap();
            let a = sampling::complex_matrix(&mut rng, 4);
            assert!(linalg::max_abs_diff(&s.apply(&a).unwrap(), &apply_by_definition(&s, &a)) < 1e-12);
            for (i, j) in [(0, 0), (1, 3), (3, 2)] {
                assert!((s.apply_entry(i, j, &a) - apply_by_definition(&s, &a)[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn holder_bound_on_entries() {
        let mut rng = sampling::rng(9);
        let rows = sampling::stochastic_matrix(&mut rng, 5, 0.4);
        let s = EntangledSpec::unphased(StochasticMatrix::from_dense(rows).unwrap());
        let a = sampling::complex_matrix(&mut rng, 5);
        let op_norm = linalg::singular_values(&a).into_iter().fold(0.0, f64::max);
        assert!(linalg::max_abs(&s.apply(&a).unwrap()) <= op_norm + 1e-12);
    }

    #[test]
    fn isometry_columns() {
        let id = spec(&[&[1.0, 0.0], &[0.0, 1.0]]).isometry();
        assert_eq!(id.column(0), &[(0, ONE)]);
        assert_eq!(id.column(1), &[(1, ONE)]);
        let v = spec(&[&[0.5, 0.5], &[0.5, 0.5]]).isometry();
        let h = Complex64::new(0.5f64.sqrt(), 0.0);
        assert_eq!(v.column(0), &[(0, h), (1, h)]);
    }

    #[test]
    fn deficient_rows_give_sub_isometry() {
        let pi = crate::classical::parse_csv("0.3,0.3;0.2,0.2", &Default::default()).unwrap();
        let v = EntangledSpec::unphased(pi.clone()).isometry();
        assert!((v.column_norm_sqr(0) - 0.6).abs() < 1e-15);
        assert!(v.isometry_defect(pi.row_deficiency()) < 1e-15);
    }

    #[test]
    fn expectation_of_unit_tensor_identity() {
        let mut rng = sampling::rng(4);
        let rows = sampling::stochastic_matrix(&mut rng, 4, 0.2);
        let s = EntangledSpec::unphased(StochasticMatrix::from_dense(rows).unwrap());
        let p1 = s.p_of_identity();
        let e = s.transition_expectation(&matrix_unit(4, 1, 2), &linalg::identity(4)).unwrap();
        assert!(linalg::max_abs_diff(&e, &matrix_unit(4, 1, 2).scale(p1[(1, 2)].re)) < 1e-15);
        let one = s.transition_expectation(&linalg::identity(4), &linalg::identity(4)).unwrap();
        assert!(linalg::max_abs_diff(&one, &linalg::identity(4)) < 1e-12);
    }

    #[test]
    fn markov_operator_on_diagonals_is_classical() {
        let pi = StochasticMatrix::from_rows(&[vec![0.2, 0.8, 0.0], vec![0.1, 0.6, 0.3], vec![0.5, 0.0, 0.5]]).unwrap();
        let d = [0.3, -1.0, 2.0];
        let expected = pi.right_multiply(&d);
        for seed in [0, 7, 21] {
            let s = EntangledSpec::new(pi.clone(), PhaseMatrix::random(3, seed)).unwrap();
            let out = s.markov_operator(&linalg::diagonal(&d)).unwrap();
            for i in 0..3 {
                assert!((out[(i, i)] - Complex64::new(expected[i], 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn projection_chain_measure_is_rank_one() {
        let p = [0.5, 0.3, 0.2];
        let s = spec(&[&p, &p, &p]);
        let q = s.quantum_measure_from_weights(&p, true).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((q.matrix()[(i, j)].re - (p[i] * p[j]).sqrt()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn flip_chain_measure_is_diagonal() {
        let q = spec(&[&[0.0, 1.0], &[1.0, 0.0]]).quantum_measure_from_weights(&[0.5, 0.5], true).unwrap();
        assert!(linalg::max_abs_diff(q.matrix(), &linalg::diagonal(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn measure_rejects_negative_weight() {
        let s = spec(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(s.quantum_measure_from_weights(&[1.5, -0.5], true).is_err());
        assert!(s.quantum_measure_from_weights(&[1.0], true).is_err());
    }

    #[test]
    fn phase_validation() {
        assert!(PhaseMatrix::random(4, 3).validate().is_ok());
        let mut bad = PhaseMatrix::random(2, 3).entries().clone();
        bad[(0, 1)] *= 1.01;
        assert!(PhaseMatrix::new(bad).is_err());
        assert_eq!(PhaseMatrix::random(3, 42), PhaseMatrix::random(3, 42));
    }

    #[test]
    fn phase_spec_parsing() {
        let seeded = PhaseSpec::parse(r#"{"seed": 5}"#).unwrap().build(3).unwrap();
        assert_eq!(seeded, PhaseMatrix::random(3, 5));
        let explicit = PhaseSpec::parse("[[[1,0],[0,1]],[[0,-1],[-1,0]]]").unwrap().build(2).unwrap();
        assert_eq!(explicit.get(0, 1), Complex64::new(0.0, 1.0));
        assert!(PhaseSpec::parse("[[[2,0]]]").unwrap().build(1).is_err());
        assert!(PhaseSpec::parse("[[[1,0]]]").unwrap().build(2).is_err());
    }

    #[test]
    fn sqrt_cache_is_consistent() {
        let mut s = spec(&[&[0.3, 0.7], &[0.6, 0.4]]);
        assert!(s.sqrt_cache_defect() < 1e-15);
        s.perturb_sqrt_cache(0, 1, 0.1);
        assert!(s.sqrt_cache_defect() > 0.1);
    }
}

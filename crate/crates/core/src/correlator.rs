//! Finite-dimensional distributions of the entangled chain.
//!
//! A word `A₁ ⊗ … ⊗ Aₙ` is evaluated right to left,
//! `X ← 1; X ← E(A_m ⊗ X) for m = n..1; ω = Tr(Q X)`.
//!
//! Density blocks store the reduced density matrix `ρ` of `k` consecutive
//! sites, so that `ω(A) = Tr(ρ A)` and `ρ_{(i)(j)} = ω(e_{j₁i₁} ⊗ … ⊗ e_{j_k i_k})`.
//! Rows and columns are `k`-tuples flattened row-major in alphabet order.
//! Two independent routes build the block:
//!
//! * [`density_block_recursive`] nests transition expectations of matrix
//!   units and closes with the diagonal embedding of `π`;
//! * [`density_block_closed`] multiplies `Q(π)`, one `Γ` factor per bond and
//!   `P(1)`, with `Γ` computed from `Π` directly rather than from the cached
//!   square roots.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::entangled::{EntangledSpec, QuantumMeasure};
use crate::linalg::{self, CMatrix, ZERO};
use crate::schur::ProductMatrix;
use crate::tolerance::Tolerances;
use crate::{Error, Result};

/// An ordered list of one-site observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableWord {
    sites: Vec<CMatrix>,
}

impl ObservableWord {
    pub fn new(sites: Vec<CMatrix>) -> Result<Self> {
        let first = sites.first().ok_or_else(|| Error::Invalid("observable word must be nonempty".into()))?;
        let n = first.nrows();
        for (m, a) in sites.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::shape(format!("{n}x{n} at site {m}"), format!("{}x{}", a.nrows(), a.ncols())));
            }
        }
        Ok(ObservableWord { sites })
    }

    /// `A ⊗ 1^{⊗gap} ⊗ B`.
    pub fn with_gap(a: &CMatrix, gap: usize, b: &CMatrix) -> Result<Self> {
        let mut sites = vec![a.clone()];
        sites.extend(std::iter::repeat_n(linalg::identity(a.nrows()), gap));
        sites.push(b.clone());
        ObservableWord::new(sites)
    }

    /// Diagonal matrix units `e_{i₁i₁} ⊗ … ⊗ e_{i_k i_k}`.
    pub fn diagonal_units(n: usize, indices: &[usize]) -> Result<Self> {
        ObservableWord::new(indices.iter().map(|&i| linalg::matrix_unit(n, i, i)).collect())
    }

    /// `1^{⊗shift} ⊗ word`, i.e. the word translated `shift` sites to the right.
    pub fn shifted(&self, shift: usize) -> Self {
        let n = self.dim();
        let mut sites: Vec<CMatrix> = std::iter::repeat_n(linalg::identity(n), shift).collect();
        sites.extend(self.sites.iter().cloned());
        ObservableWord { sites }
    }

    pub fn sites(&self) -> &[CMatrix] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.sites[0].nrows()
    }

    /// Comma-separated sites: `1` for the identity, `e<i>:<j>` for a matrix unit.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let sites = text.split(',').map(|tok| parse_site(tok.trim(), n)).collect::<Result<Vec<_>>>()?;
        ObservableWord::new(sites)
    }
}

/// One site token: `1` or `e<i>:<j>`.
pub fn parse_site(token: &str, n: usize) -> Result<CMatrix> {
    if token == "1" || token == "I" {
        return Ok(linalg::identity(n));
    }
    let bad = || Error::Parse(format!("observable `{token}`: expected `1` or `e<i>:<j>`"));
    let rest = token.strip_prefix('e').ok_or_else(bad)?;
    let (i, j) = rest.split_once(':').ok_or_else(bad)?;
    let i: usize = i.parse().map_err(|_| bad())?;
    let j: usize = j.parse().map_err(|_| bad())?;
    if i >= n || j >= n {
        return Err(Error::Invalid(format!("observable `{token}` outside a {n}-symbol alphabet")));
    }
    Ok(linalg::matrix_unit(n, i, j))
}

fn check_word(spec: &EntangledSpec, q: &QuantumMeasure, word: &ObservableWord) -> Result<()> {
    let n = spec.len();
    if word.dim() != n {
        return Err(Error::shape(format!("{n}x{n} observables"), format!("{0}x{0}", word.dim())));
    }
    if q.len() != n {
        return Err(Error::shape(format!("measure over {n} symbols"), q.len()));
    }
    Ok(())
}

/// `Tr(Q · E_{A₁}∘…∘E_{Aₙ}(terminal))`.
pub fn correlate_with_terminal(
    spec: &EntangledSpec,
    q: &QuantumMeasure,
    word: &ObservableWord,
    terminal: &CMatrix,
) -> Result<Complex64> {
    check_word(spec, q, word)?;
    let mut x = terminal.clone();
    for a in word.sites().iter().rev() {
        x = spec.transition_expectation(a, &x)?;
    }
    Ok(q.expectation(&x))
}

/// `ω(A₁ ⊗ … ⊗ Aₙ)`.
pub fn finite_correlation(spec: &EntangledSpec, q: &QuantumMeasure, word: &ObservableWord) -> Result<Complex64> {
    correlate_with_terminal(spec, q, word, &linalg::identity(spec.len()))
}

/// `ω(A ⊗ 1^{⊗gap} ⊗ B)`; the spacers are applied through the Markov operator.
pub fn shift_correlation(
    spec: &EntangledSpec,
    q: &QuantumMeasure,
    a: &CMatrix,
    b: &CMatrix,
    gap: usize,
) -> Result<Complex64> {
    let mut x = spec.transition_expectation(b, &linalg::identity(spec.len()))?;
    for _ in 0..gap {
        x = spec.markov_operator(&x)?;
    }
    Ok(q.expectation(&spec.transition_expectation(a, &x)?))
}

/// `ω(A ⊗ 1^{⊗g} ⊗ B)` for `g = 0..=max_gap`.
pub fn shift_correlation_series(
    spec: &EntangledSpec,
    q: &QuantumMeasure,
    a: &CMatrix,
    b: &CMatrix,
    max_gap: usize,
) -> Result<Vec<Complex64>> {
    let mut x = spec.transition_expectation(b, &linalg::identity(spec.len()))?;
    let mut out = Vec::with_capacity(max_gap + 1);
    for gap in 0..=max_gap {
        if gap > 0 {
            x = spec.markov_operator(&x)?;
        }
        out.push(q.expectation(&spec.transition_expectation(a, &x)?));
    }
    Ok(out)
}

/// The reduced density matrix of `k` consecutive sites.
#[derive(Debug, Clone)]
pub struct DensityBlock {
    k: usize,
    labels: Vec<String>,
    matrix: CMatrix,
    trace: f64,
}

impl DensityBlock {
    fn new(k: usize, labels: Vec<String>, matrix: CMatrix) -> Self {
        let trace = linalg::trace(&matrix).re;
        DensityBlock { k, labels, matrix, trace }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Alphabet size of one site.
    pub fn site_dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// Row-major digits of a flattened tuple index.
    pub fn tuple(&self, mut index: usize) -> Vec<usize> {
        let n = self.site_dim();
        let mut digits = vec![0; self.k];
        for d in digits.iter_mut().rev() {
            *d = index % n;
            index /= n;
        }
        digits
    }

    pub fn index_of(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &i| acc * self.site_dim() + i)
    }

    pub fn get(&self, row: &[usize], col: &[usize]) -> Complex64 {
        self.matrix[(self.index_of(row), self.index_of(col))]
    }

    /// Hermitian, positive semidefinite and (when `unit_trace`) of trace one.
    pub fn validate(&self, tol: &Tolerances, unit_trace: bool) -> Result<()> {
        let defect = linalg::hermitian_defect(&self.matrix);
        if defect > tol.herm_tol {
            return Err(Error::Invariant { name: "density_hermitian".into(), residual: defect, tol: tol.herm_tol });
        }
        let min = linalg::min_eigenvalue(&self.matrix);
        if min < -tol.psd_tol {
            return Err(Error::Invariant { name: "density_psd".into(), residual: -min, tol: tol.psd_tol });
        }
        if unit_trace && (self.trace - 1.0).abs() > tol.trace_tol {
            return Err(Error::Invariant {
                name: "density_unit_trace".into(),
                residual: (self.trace - 1.0).abs(),
                tol: tol.trace_tol,
            });
        }
        Ok(())
    }

    pub fn to_json(&self, eigenvalues: Option<Vec<f64>>) -> DensityBlockJson {
        let dim = self.matrix.nrows();
        let mut entries = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                let z = self.matrix[(r, c)];
                if z != ZERO {
                    entries.push((self.tuple(r), self.tuple(c), z.re, z.im));
                }
            }
        }
        DensityBlockJson { k: self.k, labels: self.labels.clone(), entries, trace: self.trace, eigenvalues }
    }

    /// Diagonal (classical) marginals: one row per tuple, `site_1..site_k,probability`.
    pub fn diagonal_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.k).map(|s| format!("site_{s}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",probability\n");
        for r in 0..self.matrix.nrows() {
            let labels: Vec<&str> = self.tuple(r).iter().map(|&i| self.labels[i].as_str()).collect();
            out.push_str(&labels.join(","));
            out.push_str(&format!(",{}\n", self.matrix[(r, r)].re));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityBlockJson {
    pub k: usize,
    pub labels: Vec<String>,
    pub entries: Vec<(Vec<usize>, Vec<usize>, f64, f64)>,
    pub trace: f64,
    pub eigenvalues: Option<Vec<f64>>,
}

fn block_dim(n: usize, k: usize, tol: &Tolerances) -> Result<usize> {
    if k == 0 {
        return Err(Error::Invalid("block length k must be >= 1".into()));
    }
    let size = u32::try_from(k).ok().and_then(|k| n.checked_pow(k)).unwrap_or(usize::MAX);
    if size > tol.block_cutoff {
        return Err(Error::BlockTooLarge { size, cutoff: tol.block_cutoff });
    }
    Ok(size)
}

fn digits(mut index: usize, n: usize, k: usize, out: &mut [usize]) {
    for d in out[..k].iter_mut().rev() {
        *d = index % n;
        index /= n;
    }
}

fn assemble<F>(n: usize, k: usize, dim: usize, entry: F) -> CMatrix
where
    F: Fn(&[usize], &[usize]) -> Complex64 + Sync,
{
    let rows: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|r| {
            let mut i = vec![0; k];
            let mut j = vec![0; k];
            digits(r, n, k, &mut i);
            (0..dim)
                .map(|c| {
                    digits(c, n, k, &mut j);
                    entry(&i, &j)
                })
                .collect()
        })
        .collect();
    CMatrix::from_fn(dim, dim, |r, c| rows[r][c])
}

/// Density block from nested transition expectations,
/// `ω(e_{ab}) = Tr(E_{D_π} ∘ E_{e_{a₁b₁}} ∘ … ∘ E_{e_{a_k b_k}}(1))`.
///
/// Every intermediate `E_{e_ab}(X)` is a multiple of `e_ab`, so each entry is
/// evaluated with one scalar per site.
pub fn density_block_recursive(
    spec: &EntangledSpec,
    q: &QuantumMeasure,
    k: usize,
    tol: &Tolerances,
) -> Result<DensityBlock> {
    let n = spec.len();
    if q.len() != n {
        return Err(Error::shape(format!("measure over {n} symbols"), q.len()));
    }
    let dim = block_dim(n, k, tol)?;
    let p1 = spec.p_of_identity();
    let pi = q.weights();
    let matrix = assemble(n, k, dim, |i, j| {
        // ρ_{(i)(j)} = ω(e_{j i}); a = j, b = i
        let (a, b) = (j, i);
        let mut coeff = p1[(a[k - 1], b[k - 1])];
        for m in (0..k - 1).rev() {
            if coeff == ZERO {
                return ZERO;
            }
            coeff *= spec.apply_unit_entry(a[m], b[m], a[m + 1], b[m + 1]);
        }
        // Tr(D_π ⋄ P(coeff · e_{a₁b₁}))
        let mut acc = ZERO;
        for (s, &w) in pi.iter().enumerate() {
            if w != 0.0 {
                acc += spec.apply_unit_entry(s, s, a[0], b[0]) * w;
            }
        }
        coeff * acc
    });
    Ok(DensityBlock::new(k, spec.base().alphabet().labels().to_vec(), matrix))
}

/// `Γ_{(i,j)(k,l)} = χ_ij conj(χ_kl) √(Π_ij Π_kl)`, a rank-one product matrix
/// stored through its amplitudes `χ_ij √Π_ij`.
#[derive(Debug, Clone)]
pub struct GammaMatrix {
    amplitudes: CMatrix,
}

impl GammaMatrix {
    /// Built from the entries of `Π` and the phases, independently of the
    /// spec's square-root cache.
    pub fn new(spec: &EntangledSpec) -> Self {
        let pi = spec.base();
        let chi = spec.phases();
        let n = spec.len();
        GammaMatrix { amplitudes: CMatrix::from_fn(n, n, |i, j| chi.get(i, j) * pi.get(i, j).sqrt()) }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.nrows() == 0
    }

    #[inline]
    pub fn get(&self, (i, j): (usize, usize), (k, l): (usize, usize)) -> Complex64 {
        self.amplitudes[(i, j)] * self.amplitudes[(k, l)].conj()
    }

    pub fn to_product_matrix(&self) -> ProductMatrix {
        let n = self.len();
        let mut out = ProductMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        out.set((i, j), (k, l), self.get((i, j), (k, l)));
                    }
                }
            }
        }
        out
    }
}

/// Density block from the closed product
/// `ρ_{(i)(j)} = Q_{i₁j₁} · Π_m Γ_{(i_m,i_{m+1})(j_m,j_{m+1})} · P(1)_{j_k i_k}`.
pub fn density_block_closed(
    spec: &EntangledSpec,
    q: &QuantumMeasure,
    k: usize,
    tol: &Tolerances,
) -> Result<DensityBlock> {
    let n = spec.len();
    if q.len() != n {
        return Err(Error::shape(format!("measure over {n} symbols"), q.len()));
    }
    let dim = block_dim(n, k, tol)?;
    let gamma = GammaMatrix::new(spec);
    let p1 = spec.p_of_identity();
    let qm = q.matrix();
    let matrix = assemble(n, k, dim, |i, j| {
        let mut value = qm[(i[0], j[0])];
        for m in 0..k - 1 {
            if value == ZERO {
                return ZERO;
            }
            value *= gamma.get((i[m], i[m + 1]), (j[m], j[m + 1]));
        }
        value * p1[(j[k - 1], i[k - 1])]
    });
    Ok(DensityBlock::new(k, spec.base().alphabet().labels().to_vec(), matrix))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Traces out the first (`Left`) or last (`Right`) site.
pub fn partial_trace_site(block: &DensityBlock, side: Side) -> Result<DensityBlock> {
    if block.k < 2 {
        return Err(Error::Invalid("partial trace needs a block of length >= 2".into()));
    }
    let n = block.site_dim();
    let inner = block.matrix.nrows() / n;
    let index = |rest: usize, s: usize| match side {
        Side::Right => rest * n + s,
        Side::Left => s * inner + rest,
    };
    let matrix = CMatrix::from_fn(inner, inner, |r, c| (0..n).map(|s| block.matrix[(index(r, s), index(c, s))]).sum());
    Ok(DensityBlock::new(block.k - 1, block.labels.clone(), matrix))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDiagnostics {
    /// Decreasing order.
    pub eigenvalues: Vec<f64>,
    pub rank: usize,
    /// `−Σ λ ln λ` over positive eigenvalues.
    pub entropy: f64,
}

pub fn spectral_diagnostics(block: &DensityBlock, rank_tol: f64) -> SpectralDiagnostics {
    spectral_diagnostics_of(block.matrix(), rank_tol)
}

pub fn spectral_diagnostics_of(matrix: &CMatrix, rank_tol: f64) -> SpectralDiagnostics {
    let eigenvalues = linalg::hermitian_eigenvalues(matrix);
    let rank = eigenvalues.iter().filter(|&&l| l > rank_tol).count();
    let entropy = eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum::<f64>().max(0.0);
    SpectralDiagnostics { eigenvalues, rank, entropy }
}

/// `π_{i₁} Π_{i₁i₂} … Π_{i_{k−1}i_k}`.
pub fn classical_path_probability(pi: &crate::classical::StochasticMatrix, weights: &[f64], path: &[usize]) -> f64 {
    let mut p = weights[path[0]];
    for w in path.windows(2) {
        p *= pi.get(w[0], w[1]);
    }
    p
}

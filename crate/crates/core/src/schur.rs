//! Schur multiplication calculus.
//!
//! Matrices over `I × I` are stored as [`ProductMatrix`], which keeps the
//! factor size explicit and addresses entries by index pairs. The pair
//! `(i, j)` is flattened row-major to `i * n + j`, the same order used by the
//! Kronecker product, so `(A ⊗ B)_{(i,j)(k,l)} = A_ik B_jl`.

use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::{self, CMatrix, ZERO};
use crate::{Error, Result};

/// Largest dense dimension accepted by [`schatten_norm`].
pub const NORM_DIM_CUTOFF: usize = 256;

/// A matrix indexed by pairs of alphabet symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMatrix {
    factor: usize,
    data: CMatrix,
}

impl ProductMatrix {
    pub fn zeros(factor: usize) -> Self {
        ProductMatrix { factor, data: CMatrix::zeros(factor * factor, factor * factor) }
    }

    pub fn identity(factor: usize) -> Self {
        ProductMatrix { factor, data: linalg::identity(factor * factor) }
    }

    /// Wraps a dense `n² × n²` matrix.
    pub fn from_dense(factor: usize, data: CMatrix) -> Result<Self> {
        let dim = factor * factor;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::shape(format!("{dim}x{dim}"), format!("{}x{}", data.nrows(), data.ncols())));
        }
        Ok(ProductMatrix { factor, data })
    }

    /// `A ⊗ B`.
    pub fn tensor(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        check_square_same(a, b)?;
        Ok(ProductMatrix { factor: a.nrows(), data: linalg::kron(a, b) })
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn dense(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_dense(self) -> CMatrix {
        self.data
    }

    #[inline]
    pub fn pair_index(&self, (i, j): (usize, usize)) -> usize {
        i * self.factor + j
    }

    #[inline]
    pub fn get(&self, row: (usize, usize), col: (usize, usize)) -> Complex64 {
        self.data[(self.pair_index(row), self.pair_index(col))]
    }

    #[inline]
    pub fn set(&mut self, row: (usize, usize), col: (usize, usize), value: Complex64) {
        let (r, c) = (self.pair_index(row), self.pair_index(col));
        self.data[(r, c)] = value;
    }

    pub fn adjoint(&self) -> Self {
        ProductMatrix { factor: self.factor, data: self.data.adjoint() }
    }

    pub fn mul(&self, other: &ProductMatrix) -> Result<Self> {
        if self.factor != other.factor {
            return Err(Error::shape(format!("factor {}", self.factor), format!("factor {}", other.factor)));
        }
        Ok(ProductMatrix { factor: self.factor, data: &self.data * &other.data })
    }

    /// `Tr ⊗ Tr`.
    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.data)
    }
}

fn check_square_same(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::shape("square matrix", format!("{}x{}", a.nrows(), a.ncols())));
    }
    if a.shape() != b.shape() {
        return Err(Error::shape(format!("{}x{}", a.nrows(), a.ncols()), format!("{}x{}", b.nrows(), b.ncols())));
    }
    Ok(())
}

/// `(A ⋄ B)_ij = A_ij B_ij`.
pub fn schur_product(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.shape() != b.shape() {
        return Err(Error::shape(format!("{}x{}", a.nrows(), a.ncols()), format!("{}x{}", b.nrows(), b.ncols())));
    }
    Ok(a.component_mul(b))
}

/// `Φ(A)_{(i,j)(k,l)} = A_ik δ_ij δ_kl`.
pub fn phi_embed(a: &CMatrix) -> Result<ProductMatrix> {
    if !a.is_square() {
        return Err(Error::shape("square matrix", format!("{}x{}", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    let mut out = ProductMatrix::zeros(n);
    for i in 0..n {
        for k in 0..n {
            out.set((i, i), (k, k), a[(i, k)]);
        }
    }
    Ok(out)
}

/// `m(X)_ij = X_{(i,i)(j,j)}`.
pub fn schur_contract(x: &ProductMatrix) -> CMatrix {
    let n = x.factor();
    CMatrix::from_fn(n, n, |i, j| x.get((i, i), (j, j)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schatten {
    /// Sum of singular values.
    One,
    /// Frobenius norm.
    Two,
}

/// Schatten 1- or 2-norm of a dense matrix of dimension at most
/// [`NORM_DIM_CUTOFF`].
pub fn schatten_norm(m: &CMatrix, p: Schatten) -> Result<f64> {
    let dim = m.nrows().max(m.ncols());
    if dim > NORM_DIM_CUTOFF {
        return Err(Error::Invalid(format!("Schatten norm limited to dimension {NORM_DIM_CUTOFF}, got {dim}")));
    }
    Ok(match p {
        Schatten::One => linalg::singular_values(m).iter().sum(),
        Schatten::Two => m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
    })
}

/// A Hermitian positive semidefinite matrix with finite trace.
#[derive(Debug, Clone)]
pub struct TraceClassMatrix {
    matrix: CMatrix,
    trace: f64,
}

impl TraceClassMatrix {
    pub fn new(matrix: CMatrix, herm_tol: f64, psd_tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::shape("square matrix", format!("{}x{}", matrix.nrows(), matrix.ncols())));
        }
        let defect = linalg::hermitian_defect(&matrix);
        if defect > herm_tol {
            return Err(Error::Invariant { name: "hermitian".into(), residual: defect, tol: herm_tol });
        }
        let min = linalg::min_eigenvalue(&matrix);
        if min < -psd_tol {
            return Err(Error::Invariant { name: "positive_semidefinite".into(), residual: -min, tol: psd_tol });
        }
        let trace = linalg::trace(&matrix).re;
        Ok(TraceClassMatrix { matrix, trace })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// Re-checks the stored trace against the matrix.
    pub fn trace_defect(&self) -> f64 {
        (linalg::trace(&self.matrix).re - self.trace).abs()
    }
}

/// Sparse complex triplet document `{"n", "labels", "entries": [[i, j, [re, im]], ...]}`.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexMatrixJson {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub entries: Vec<(usize, usize, [f64; 2])>,
}

impl ComplexMatrixJson {
    pub fn from_matrix(m: &CMatrix, labels: Option<Vec<String>>) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                if z != ZERO {
                    entries.push((i, j, [z.re, z.im]));
                }
            }
        }
        ComplexMatrixJson { n: m.nrows(), labels, entries }
    }
}

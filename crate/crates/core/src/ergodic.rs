//! Ergodic components of the entangled chain and the clustering verdict.
//!
//! For a recurrent class `λ` with projection `p_λ` and period `m`,
//! `ω_λ(A₁ ⊗ … ⊗ Aₙ) = π(p_λ)⁻¹ Tr(Q E_{A₁}∘…∘E_{Aₙ}(p_λ))`.
//! The completely ergodic component `φ_λ` uses the cyclic subclasses
//! `p_{λ,0}, …, p_{λ,m−1}` (subclass 0 holds the class minimum). The Markov
//! operator pulls a subclass back one step, `E₁(p_{λ,j}) = p_{λ,j−1}`, so a
//! word of length `n` is closed with `p_{λ,n mod m}` and the first site is
//! localized in subclass 0:
//! `φ_λ(A₁ ⊗ … ⊗ Aₙ) = π(p_{λ,0})⁻¹ Tr(Q E_{A₁}∘…∘E_{Aₙ}(p_{λ,n mod m}))`.
//! Translates `φ_λ∘τ^s` prepend `s` identities.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::classical::{ChainDecomposition, StationaryDistribution};
use crate::correlator::{self, ObservableWord};
use crate::entangled::{EntangledSpec, QuantumMeasure};
use crate::linalg::{self, CMatrix};
use crate::sampling;
use crate::tolerance::Tolerances;
use crate::{Error, Result};

/// Residuals below this are treated as exact zeros when fitting decay rates.
pub const FIT_NOISE_FLOOR: f64 = 1e-12;

/// Recurrent classes carrying more than `support_mass_tol` of `π`.
pub fn support_classes(decomp: &ChainDecomposition, pi: &StationaryDistribution, tol: &Tolerances) -> Vec<usize> {
    decomp
        .classes
        .iter()
        .enumerate()
        .filter(|(_, c)| pi.mass(&c.states) > tol.support_mass_tol)
        .map(|(id, _)| id)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicComponent {
    pub class_id: usize,
    pub states: Vec<usize>,
    /// `π(p_λ)`.
    pub weight: f64,
    pub period: usize,
    /// Cyclic subclasses; index 0 is the reference subclass.
    pub subclasses: Vec<Vec<usize>>,
    /// `π(p_{λ,0})`.
    pub reference_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Omega,
    /// `φ_λ∘τ^shift`.
    Phi {
        shift: usize,
    },
}

fn projection(n: usize, states: &[usize]) -> CMatrix {
    let mut d = vec![0.0; n];
    for &i in states {
        d[i] = 1.0;
    }
    linalg::diagonal(&d)
}

/// Components of `ω` together with the state they decompose.
#[derive(Debug, Clone)]
pub struct ErgodicAnalysis<'a> {
    spec: &'a EntangledSpec,
    q: &'a QuantumMeasure,
    components: Vec<ErgodicComponent>,
    max_word_len: usize,
}

impl<'a> ErgodicAnalysis<'a> {
    pub fn new(
        spec: &'a EntangledSpec,
        q: &'a QuantumMeasure,
        decomp: &ChainDecomposition,
        pi: &StationaryDistribution,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = spec.len();
        if pi.weights.len() != n || q.len() != n {
            return Err(Error::shape(format!("{n} states"), pi.weights.len()));
        }
        let components = support_classes(decomp, pi, tol)
            .into_iter()
            .map(|id| {
                let class = &decomp.classes[id];
                ErgodicComponent {
                    class_id: id,
                    states: class.states.clone(),
                    weight: pi.mass(&class.states),
                    period: class.period,
                    subclasses: class.subclasses.clone(),
                    reference_weight: pi.mass(&class.subclasses[0]),
                }
            })
            .collect();
        Ok(ErgodicAnalysis { spec, q, components, max_word_len: tol.curve_cutoff + 1 })
    }

    pub fn components(&self) -> &[ErgodicComponent] {
        &self.components
    }

    pub fn component(&self, class_id: usize) -> Option<&ErgodicComponent> {
        self.components.iter().find(|c| c.class_id == class_id)
    }

    /// `ω(word)` of the full state.
    pub fn state_correlation(&self, word: &ObservableWord) -> Result<Complex64> {
        correlator::finite_correlation(self.spec, self.q, word)
    }

    pub fn component_correlation(
        &self,
        component: &ErgodicComponent,
        word: &ObservableWord,
        which: Which,
    ) -> Result<Complex64> {
        let n = self.spec.len();
        match which {
            Which::Omega => {
                self.check_len(word.len())?;
                let terminal = projection(n, &component.states);
                Ok(correlator::correlate_with_terminal(self.spec, self.q, word, &terminal)? / component.weight)
            }
            Which::Phi { shift } => {
                let len = word.len() + shift;
                self.check_len(len)?;
                let terminal = projection(n, &component.subclasses[len % component.period]);
                let shifted = word.shifted(shift);
                Ok(correlator::correlate_with_terminal(self.spec, self.q, &shifted, &terminal)?
                    / component.reference_weight)
            }
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len > self.max_word_len {
            return Err(Error::Invalid(format!("word length {len} exceeds {}", self.max_word_len)));
        }
        Ok(())
    }

    /// Residuals of `ω = Σ_λ π(p_λ) ω_λ`, `ω = Σ_λ (π(p_λ)/m_λ) Σ_k φ_λ∘τ^k`
    /// and `ω_λ = (1/m_λ) Σ_k φ_λ∘τ^k` over the given words.
    pub fn decomposition_check(&self, words: &[ObservableWord]) -> Result<DecompositionCheck> {
        let per_word = words
            .par_iter()
            .map(|word| {
                let lhs = self.state_correlation(word)?;
                let mut omega_mix = Complex64::new(0.0, 0.0);
                let mut phi_mix = Complex64::new(0.0, 0.0);
                let mut phi_avg = 0.0f64;
                for c in &self.components {
                    let omega = self.component_correlation(c, word, Which::Omega)?;
                    let mut avg = Complex64::new(0.0, 0.0);
                    for shift in 0..c.period {
                        avg += self.component_correlation(c, word, Which::Phi { shift })?;
                    }
                    avg /= c.period as f64;
                    omega_mix += omega * c.weight;
                    phi_mix += avg * c.weight;
                    phi_avg = phi_avg.max((omega - avg).norm());
                }
                Ok([(lhs - omega_mix).norm(), (lhs - phi_mix).norm(), phi_avg])
            })
            .collect::<Result<Vec<_>>>()?;
        let max = |k: usize| per_word.iter().map(|r| r[k]).fold(0.0, f64::max);
        Ok(DecompositionCheck {
            words: words.len(),
            omega_mixture_residual: max(0),
            max_residual: max(1),
            phi_average_residual: max(2),
        })
    }

    /// `Σ_λ π(p_λ) ω_λ(A) ω_λ(B) − ω(A) ω(B)`, the Cesàro limit of
    /// `ω(A τ^k B) − ω(A)ω(B)`.
    pub fn class_covariance(&self, a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
        let wa = ObservableWord::new(vec![a.clone()])?;
        let wb = ObservableWord::new(vec![b.clone()])?;
        let mut mix = Complex64::new(0.0, 0.0);
        for c in &self.components {
            mix += self.component_correlation(c, &wa, Which::Omega)?
                * self.component_correlation(c, &wb, Which::Omega)?
                * c.weight;
        }
        Ok(mix - self.state_correlation(&wa)? * self.state_correlation(&wb)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionCheck {
    pub words: usize,
    pub omega_mixture_residual: f64,
    pub max_residual: f64,
    pub phi_average_residual: f64,
}

/// Matrix units for alphabets of size at most 4 (all one-site units, all
/// two-site products and, for `n ≤ 3`, all three-site diagonal words);
/// otherwise 20 seeded random Hermitian words of length 1 to 3.
pub fn standard_test_words(n: usize, seed: u64) -> Vec<ObservableWord> {
    let mut words = Vec::new();
    if n <= 4 {
        let units: Vec<CMatrix> = (0..n * n).map(|u| linalg::matrix_unit(n, u / n, u % n)).collect();
        for a in &units {
            words.push(ObservableWord::new(vec![a.clone()]).unwrap());
        }
        for a in &units {
            for b in &units {
                words.push(ObservableWord::new(vec![a.clone(), b.clone()]).unwrap());
            }
        }
        if n <= 3 {
            for t in 0..n * n * n {
                let idx = [t / (n * n), (t / n) % n, t % n];
                words.push(ObservableWord::diagonal_units(n, &idx).unwrap());
            }
        }
    } else {
        let mut rng = sampling::rng(seed);
        for w in 0..20 {
            let sites = (0..1 + w % 3).map(|_| sampling::hermitian_matrix(&mut rng, n)).collect();
            words.push(ObservableWord::new(sites).unwrap());
        }
    }
    words
}

/// Diagonal observables for curves: one state per supported class first,
/// then further states in index order, at most four.
pub fn curve_states(analysis: &ErgodicAnalysis<'_>, n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = analysis.components().iter().map(|c| c.states[0]).collect();
    out.sort_unstable();
    out.truncate(4);
    for i in 0..n {
        if out.len() >= 4 {
            break;
        }
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

/// `raw[k−1] = ω(A τ^k B)` and `cesaro[N−1] = (1/N) Σ_{k≤N} raw[k−1]` for
/// `k, N = 1..len`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CesaroCurve {
    pub raw: Vec<Complex64>,
    pub cesaro: Vec<Complex64>,
    /// `ω(A) ω(B)`.
    pub product: Complex64,
}

impl CesaroCurve {
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn raw_residual(&self) -> f64 {
        self.raw.last().map_or(0.0, |r| (r - self.product).norm())
    }

    pub fn cesaro_residual(&self) -> f64 {
        self.cesaro.last().map_or(0.0, |c| (c - self.product).norm())
    }

    /// Geometric rate of `|raw[k] − product|`: least squares on the logarithm
    /// over the last half of the points above [`FIT_NOISE_FLOOR`].
    pub fn fitted_rate(&self) -> Option<f64> {
        let points: Vec<(f64, f64)> = self
            .raw
            .iter()
            .enumerate()
            .map(|(k, r)| ((k + 1) as f64, (r - self.product).norm()))
            .filter(|&(_, r)| r > FIT_NOISE_FLOOR)
            .collect();
        let tail = &points[points.len() / 2..];
        if tail.len() < 2 {
            return None;
        }
        let m = tail.len() as f64;
        let (sx, sy) = tail.iter().fold((0.0, 0.0), |(sx, sy), &(x, r)| (sx + x, sy + r.ln()));
        let (mx, my) = (sx / m, sy / m);
        let (sxy, sxx) = tail
            .iter()
            .fold((0.0, 0.0), |(sxy, sxx), &(x, r)| (sxy + (x - mx) * (r.ln() - my), sxx + (x - mx).powi(2)));
        Some((sxy / sxx).exp())
    }

    /// `n,raw,cesaro` with real parts.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,raw,cesaro\n");
        for (k, (r, c)) in self.raw.iter().zip(&self.cesaro).enumerate() {
            out.push_str(&format!("{},{},{}\n", k + 1, r.re, c.re));
        }
        out
    }
}

pub fn cesaro_curve(
    spec: &EntangledSpec,
    q: &QuantumMeasure,
    a: &CMatrix,
    b: &CMatrix,
    len: usize,
    tol: &Tolerances,
) -> Result<CesaroCurve> {
    if len > tol.curve_cutoff {
        return Err(Error::Invalid(format!("curve length {len} exceeds curve_cutoff {}", tol.curve_cutoff)));
    }
    let raw = if len == 0 { Vec::new() } else { correlator::shift_correlation_series(spec, q, a, b, len - 1)? };
    let mut cesaro = Vec::with_capacity(len);
    let mut sum = Complex64::new(0.0, 0.0);
    for (k, r) in raw.iter().enumerate() {
        sum += r;
        cesaro.push(sum / (k + 1) as f64);
    }
    let one = |m: &CMatrix| correlator::finite_correlation(spec, q, &ObservableWord::new(vec![m.clone()])?);
    let product = one(a)? * one(b)?;
    Ok(CesaroCurve { raw, cesaro, product })
}

/// Default curve observables as state pairs `(i, j)` for `(e_ii, e_jj)`:
/// every diagonal pair of [`curve_states`] and the cross pair of the first
/// two.
pub fn curve_pairs(analysis: &ErgodicAnalysis<'_>) -> Vec<(usize, usize)> {
    let states = curve_states(analysis, analysis.spec.len());
    let mut pairs: Vec<(usize, usize)> = states.iter().map(|&i| (i, i)).collect();
    if states.len() >= 2 {
        pairs.push((states[0], states[1]));
    }
    pairs
}

/// Curves for [`curve_pairs`], computed concurrently.
pub fn default_curves(
    analysis: &ErgodicAnalysis<'_>,
    len: usize,
    tol: &Tolerances,
) -> Result<Vec<((usize, usize), CesaroCurve)>> {
    let n = analysis.spec.len();
    curve_pairs(analysis)
        .into_par_iter()
        .map(|(i, j)| {
            let a = linalg::matrix_unit(n, i, i);
            let b = linalg::matrix_unit(n, j, j);
            Ok(((i, j), cesaro_curve(analysis.spec, analysis.q, &a, &b, len, tol)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary {
    pub id: usize,
    pub weight: f64,
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveResiduals {
    /// `max |ω(A τ^N B) − ω(A)ω(B)|` over the curves.
    pub raw: f64,
    /// `max |C_N − ω(A)ω(B)|` over the curves.
    pub cesaro: f64,
    pub curve_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterVerdict {
    pub ergodic: bool,
    pub strongly_clustering: bool,
    pub classes: Vec<ClassSummary>,
    pub residuals: CurveResiduals,
    /// Largest fitted decay rate over the curves; absent when every curve
    /// is exact to noise level.
    pub fitted_rate: Option<f64>,
}

impl ClusterVerdict {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn periods(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.period).collect()
    }
}

/// Structural verdict: ergodic iff one class carries `π`, strongly
/// clustering iff moreover that class is aperiodic. Curves are attached as
/// evidence.
pub fn verdict(
    decomp: &ChainDecomposition,
    pi: &StationaryDistribution,
    curves: &[CesaroCurve],
    tol: &Tolerances,
) -> ClusterVerdict {
    let classes: Vec<ClassSummary> = support_classes(decomp, pi, tol)
        .into_iter()
        .map(|id| ClassSummary { id, weight: pi.mass(&decomp.classes[id].states), period: decomp.classes[id].period })
        .collect();
    let ergodic = classes.len() == 1;
    let strongly_clustering = ergodic && classes[0].period == 1;
    let residuals = CurveResiduals {
        raw: curves.iter().map(CesaroCurve::raw_residual).fold(0.0, f64::max),
        cesaro: curves.iter().map(CesaroCurve::cesaro_residual).fold(0.0, f64::max),
        curve_length: curves.iter().map(CesaroCurve::len).max().unwrap_or(0),
    };
    let fitted_rate = curves.iter().filter_map(CesaroCurve::fitted_rate).reduce(f64::max);
    ClusterVerdict { ergodic, strongly_clustering, classes, residuals, fitted_rate }
}

//! Library results checked against independent reference computations.

use approx::assert_abs_diff_eq;
use emc_core::classical::{decompose, mix_stationary, uniform_alpha, StochasticMatrix};
use emc_core::correlator::{self, ObservableWord};
use emc_core::entangled::{EntangledSpec, PhaseMatrix, QuantumMeasure};
use emc_core::ergodic::{self, ErgodicAnalysis, Which};
use emc_core::groups::{walk_matrix, Group, GroupMeasure, WalkSide};
use emc_core::linalg::{self, CMatrix};
use emc_core::{sampling, Tolerances};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn chain(seed: u64, n: usize) -> StochasticMatrix {
    let mut rng = sampling::rng(seed);
    StochasticMatrix::from_dense(sampling::stochastic_matrix(&mut rng, n, 0.3)).unwrap()
}

fn stationary_state(base: StochasticMatrix, phases: PhaseMatrix) -> (EntangledSpec, QuantumMeasure, Vec<f64>) {
    let tol = Tolerances::default();
    let decomp = decompose(&base, &tol).unwrap();
    let pi = mix_stationary(&decomp, &uniform_alpha(&decomp)).unwrap();
    let spec = EntangledSpec::new(base, phases).unwrap();
    let q = spec.quantum_measure(&pi).unwrap();
    (spec, q, pi.weights)
}

/// `V e_i = Σ_j χ_ij √Π_ij e_i ⊗ e_j` assembled densely from the raw entries.
fn dense_isometry(base: &StochasticMatrix, phases: &PhaseMatrix) -> CMatrix {
    let n = base.len();
    let mut v = CMatrix::zeros(n * n, n);
    for i in 0..n {
        for j in 0..n {
            v[(i * n + j, i)] = phases.get(i, j) * base.entries()[(i, j)].sqrt();
        }
    }
    v
}

/// `π_{i₁} Π_{i₁i₂} ⋯ Π_{i_{k−1}i_k}` read straight from the dense matrix.
fn path_probability(base: &StochasticMatrix, pi: &[f64], path: &[usize]) -> f64 {
    path.windows(2).fold(pi[path[0]], |p, w| p * base.entries()[(w[0], w[1])])
}

#[test]
fn transition_expectation_equals_isometry_sandwich() {
    let mut rng = sampling::rng(900);
    for (seed, n) in [(1, 2), (2, 3), (3, 5), (4, 6)] {
        let base = chain(seed, n);
        let phases = PhaseMatrix::random(n, seed + 100);
        let v = dense_isometry(&base, &phases);
        let spec = EntangledSpec::new(base, phases).unwrap();
        for _ in 0..5 {
            let a = sampling::complex_matrix(&mut rng, n);
            let b = sampling::complex_matrix(&mut rng, n);
            let oracle = v.adjoint() * linalg::kron(&a, &b) * &v;
            let got = spec.transition_expectation(&a, &b).unwrap();
            assert!(linalg::max_abs_diff(&got, &oracle) < 1e-12);
        }
    }
}

#[test]
fn diagonal_words_reduce_to_path_probabilities() {
    for (seed, n) in [(10, 2), (11, 3), (12, 4)] {
        let base = chain(seed, n);
        let (spec, q, pi) = stationary_state(base.clone(), PhaseMatrix::random(n, seed));
        for len in 1..=3usize {
            for t in 0..n.pow(len as u32) {
                let path: Vec<usize> = (0..len).map(|m| (t / n.pow((len - 1 - m) as u32)) % n).collect();
                let word = ObservableWord::diagonal_units(n, &path).unwrap();
                let got = correlator::finite_correlation(&spec, &q, &word).unwrap();
                assert_abs_diff_eq!(got.re, path_probability(&base, &pi, &path), epsilon = 1e-12);
                assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn density_block_entries_match_word_evaluation() {
    let n = 3;
    let (spec, q, _) = stationary_state(chain(21, n), PhaseMatrix::random(n, 5));
    let tol = Tolerances::default();
    let closed = correlator::density_block_closed(&spec, &q, 2, &tol).unwrap();
    let recursive = correlator::density_block_recursive(&spec, &q, 2, &tol).unwrap();
    for r in 0..n * n {
        for c in 0..n * n {
            let (i, j) = (closed.tuple(r), closed.tuple(c));
            let word =
                ObservableWord::new(vec![linalg::matrix_unit(n, j[0], i[0]), linalg::matrix_unit(n, j[1], i[1])])
                    .unwrap();
            let oracle = correlator::finite_correlation(&spec, &q, &word).unwrap();
            assert!((closed.matrix()[(r, c)] - oracle).norm() < 1e-13);
            assert!((recursive.matrix()[(r, c)] - oracle).norm() < 1e-13);
        }
    }
}

#[test]
fn quantum_measure_against_definition() {
    let n = 4;
    let base = chain(31, n);
    let phases = PhaseMatrix::random(n, 31);
    let weights = [0.1, 0.2, 0.3, 0.4];
    let spec = EntangledSpec::new(base.clone(), phases.clone()).unwrap();
    let q = spec.quantum_measure_from_weights(&weights, true).unwrap();
    for i in 0..n {
        for j in 0..n {
            let oracle: Complex64 = (0..n)
                .map(|k| {
                    phases.get(k, i) * phases.get(k, j).conj() * (base.get(k, i) * base.get(k, j)).sqrt() * weights[k]
                })
                .sum();
            assert!((q.matrix()[(i, j)] - oracle).norm() < 1e-15);
        }
    }
}

#[test]
fn shift_correlations_follow_matrix_powers() {
    let n = 4;
    let base = chain(41, n);
    let (spec, q, pi) = stationary_state(base.clone(), PhaseMatrix::ones(n));
    let dense: DMatrix<f64> = base.entries().clone();
    let mut power = dense.clone();
    let (a, b) = (1, 3);
    let series = correlator::shift_correlation_series(
        &spec,
        &q,
        &linalg::matrix_unit(n, a, a),
        &linalg::matrix_unit(n, b, b),
        30,
    )
    .unwrap();
    for value in series {
        assert_abs_diff_eq!(value.re, pi[a] * power[(a, b)], epsilon = 1e-13);
        power = &power * &dense;
    }
}

#[test]
fn stationary_vector_matches_lazy_power_iteration() {
    let n = 6;
    let base = StochasticMatrix::from_dense(sampling::stochastic_matrix(&mut sampling::rng(51), n, 0.0)).unwrap();
    let tol = Tolerances::default();
    let decomp = decompose(&base, &tol).unwrap();
    assert_eq!(decomp.classes.len(), 1);
    let pi = mix_stationary(&decomp, &[1.0]).unwrap();
    let lazy = (base.entries() + DMatrix::<f64>::identity(n, n)) * 0.5;
    let mut x = nalgebra::RowDVector::from_element(n, 1.0 / n as f64);
    for _ in 0..5000 {
        x = &x * &lazy;
    }
    for i in 0..n {
        assert_abs_diff_eq!(pi.weights[i], x[i], epsilon = 1e-12);
    }
}

#[test]
fn absorbing_class_variance_by_hand() {
    let base = StochasticMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let tol = Tolerances::default();
    let decomp = decompose(&base, &tol).unwrap();
    let pi = mix_stationary(&decomp, &[0.5, 0.5]).unwrap();
    let spec = EntangledSpec::unphased(base);
    let q = spec.quantum_measure(&pi).unwrap();
    let an = ErgodicAnalysis::new(&spec, &q, &decomp, &pi, &tol).unwrap();
    let a = linalg::diagonal(&[0.8, -0.2]);
    let b = linalg::diagonal(&[0.3, 1.1]);
    // ω_a and ω_b evaluate the diagonal entry of their absorbing state
    let hand = 0.25 * (0.8 - -0.2) * (0.3 - 1.1);
    assert_abs_diff_eq!(an.class_covariance(&a, &b).unwrap().re, hand, epsilon = 1e-14);
    let curve = ergodic::cesaro_curve(&spec, &q, &a, &b, 200, &tol).unwrap();
    let limit = curve.cesaro.last().unwrap() - curve.product;
    assert_abs_diff_eq!(limit.re, hand, epsilon = 1e-12);
}

#[test]
fn cyclic_subclass_localization_oracle() {
    // 0 -> {1,2} -> 0 with period 2
    let base = StochasticMatrix::from_rows(&[vec![0.0, 0.5, 0.5], vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
    let tol = Tolerances::default();
    let decomp = decompose(&base, &tol).unwrap();
    let pi = mix_stationary(&decomp, &[1.0]).unwrap();
    let spec = EntangledSpec::unphased(base);
    let q = spec.quantum_measure(&pi).unwrap();
    let an = ErgodicAnalysis::new(&spec, &q, &decomp, &pi, &tol).unwrap();
    let c = &an.components()[0];
    // classical oracle: the chain started in subclass s visits s, s+1, ...
    for shift in 0..2 {
        for state in 0..3 {
            let word = ObservableWord::diagonal_units(3, &[state]).unwrap();
            let got = an.component_correlation(c, &word, Which::Phi { shift }).unwrap().re;
            let subclass = if state == 0 { 0 } else { 1 };
            let expected = if subclass == shift % 2 { [1.0, 0.5, 0.5][state] } else { 0.0 };
            assert_abs_diff_eq!(got, expected, epsilon = 1e-14);
        }
    }
}

#[test]
fn cyclic_walk_is_a_circulant() {
    let n = 6;
    let g = Group::cyclic(n).unwrap();
    let mu = GroupMeasure::random(&g, 3);
    let pi = walk_matrix(&g, &mu, WalkSide::Right, &Tolerances::default()).unwrap();
    // element k of Z_n as an integer
    let value = |i: usize| g.element(i)[0] as usize;
    let mut mass = vec![0.0; n];
    for &(i, w) in mu.weights() {
        mass[value(i)] += w;
    }
    for x in 0..n {
        for y in 0..n {
            assert_abs_diff_eq!(pi.get(x, y), mass[(value(y) + n - value(x)) % n], epsilon = 1e-15);
        }
    }
}

#[test]
fn free_ball_sizes() {
    for rank in 1..=3usize {
        for radius in 0..=3usize {
            let expected = 1 + (0..radius).map(|k| 2 * rank * (2 * rank - 1).pow(k as u32)).sum::<usize>();
            assert_eq!(Group::free(rank, radius).unwrap().len(), expected);
        }
    }
}

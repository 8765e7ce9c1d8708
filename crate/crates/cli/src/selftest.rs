//! The invariant suite behind `emc selftest`.
//!
//! Checks run in a fixed order and stop at the first breach. The two
//! mutations are negative controls: `sqrt-cache` corrupts one cached square
//! root of the sample chain and `phase-modulus` gives one phase modulus 1.25.

use emc_core::classical::{decompose, fixed_point_residual, mix_stationary, uniform_alpha, StochasticMatrix};
use emc_core::correlator::{self, ObservableWord, Side};
use emc_core::entangled::{EntangledSpec, PhaseMatrix, PHASE_TOL};
use emc_core::ergodic::{self, ErgodicAnalysis};
use emc_core::groups::{self, Group, GroupMeasure, Translation, WalkSide};
use emc_core::linalg::{self, CMatrix};
use emc_core::schur::{self, ProductMatrix};
use emc_core::{sampling, Tolerances};
use serde::Serialize;

use crate::args::Mutation;
use crate::commands::{GROUP_TOL, MIXTURE_TOL, ROUTE_TOL};
use crate::config::RunConfig;
use crate::report::Outputs;
use crate::Failure;

const SAMPLE_SIZE: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

type Check<'a> = (&'static str, f64, Box<dyn Fn() -> Result<f64, Failure> + 'a>);

struct Fixture {
    spec: EntangledSpec,
    phases: PhaseMatrix,
    base: StochasticMatrix,
    pi: Vec<f64>,
}

fn fixture(seed: u64, mutation: Option<Mutation>, tol: &Tolerances) -> Result<Fixture, Failure> {
    let mut rng = sampling::rng(seed);
    let base = StochasticMatrix::from_dense(sampling::stochastic_matrix(&mut rng, SAMPLE_SIZE, 0.3))?;
    let mut phases = PhaseMatrix::random(SAMPLE_SIZE, seed.wrapping_add(1));
    if mutation == Some(Mutation::PhaseModulus) {
        let mut entries = phases.entries().clone();
        entries[(0, 1)] *= 1.25;
        phases = PhaseMatrix::new_unchecked(entries);
    }
    let decomp = decompose(&base, tol)?;
    let pi = mix_stationary(&decomp, &uniform_alpha(&decomp))?.weights;
    // built with unit phases when the phases are corrupted, so that the
    // modulus check is what reports the breach
    let valid = if phases.modulus_defect() <= PHASE_TOL { phases.clone() } else { PhaseMatrix::ones(SAMPLE_SIZE) };
    let mut spec = EntangledSpec::new(base.clone(), valid)?;
    if mutation == Some(Mutation::SqrtCache) {
        let j = (0..SAMPLE_SIZE).find(|&j| base.get(0, j) > 0.0).unwrap_or(0);
        spec.perturb_sqrt_cache(0, j, 1e-3);
    }
    Ok(Fixture { spec, phases, base, pi })
}

fn max_over<I: IntoIterator<Item = Result<f64, Failure>>>(it: I) -> Result<f64, Failure> {
    it.into_iter().try_fold(0.0f64, |m, r| Ok(m.max(r?)))
}

fn random_pairs(seed: u64, count: usize, n: usize) -> Vec<(CMatrix, CMatrix)> {
    let mut rng = sampling::rng(seed);
    (0..count).map(|_| (sampling::complex_matrix(&mut rng, n), sampling::complex_matrix(&mut rng, n))).collect()
}

fn verdict_mismatch(
    rows: &[Vec<f64>],
    alpha: &[f64],
    expected: (bool, bool),
    tol: &Tolerances,
) -> Result<f64, Failure> {
    let base = StochasticMatrix::from_rows(rows)?;
    let decomp = decompose(&base, tol)?;
    let pi = mix_stationary(&decomp, alpha)?;
    let v = ergodic::verdict(&decomp, &pi, &[], tol);
    Ok(f64::from(u8::from((v.ergodic, v.strongly_clustering) != expected || (v.strongly_clustering && !v.ergodic))))
}

fn mixture_residual(rows: &[Vec<f64>], seed: u64, tol: &Tolerances) -> Result<[f64; 2], Failure> {
    let base = StochasticMatrix::from_rows(rows)?;
    let decomp = decompose(&base, tol)?;
    let pi = mix_stationary(&decomp, &uniform_alpha(&decomp))?;
    let spec = EntangledSpec::unphased(base);
    let q = spec.quantum_measure(&pi)?;
    let an = ErgodicAnalysis::new(&spec, &q, &decomp, &pi, tol)?;
    let check = an.decomposition_check(&ergodic::standard_test_words(spec.len(), seed))?;
    Ok([check.max_residual.max(check.omega_mixture_residual), check.phi_average_residual])
}

fn sample_chains(f: &Fixture) -> Vec<Vec<Vec<f64>>> {
    let n = f.base.len();
    vec![
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![vec![0.2, 0.4, 0.4], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        (0..n).map(|i| (0..n).map(|j| f.base.get(i, j)).collect()).collect(),
    ]
}

fn checks<'a>(f: &'a Fixture, seed: u64, tol: &'a Tolerances) -> Vec<Check<'a>> {
    let n = f.base.len();
    let q = move || f.spec.quantum_measure_from_weights(&f.pi, true).map_err(Failure::from);
    vec![
        ("phase_unit_modulus", PHASE_TOL, Box::new(move || Ok(f.phases.modulus_defect()))),
        (
            "route_equivalence",
            ROUTE_TOL,
            Box::new(move || {
                let q = q()?;
                max_over((1..=3).map(|k| {
                    let a = correlator::density_block_recursive(&f.spec, &q, k, tol)?;
                    let b = correlator::density_block_closed(&f.spec, &q, k, tol)?;
                    Ok(linalg::max_abs_diff(a.matrix(), b.matrix()))
                }))
            }),
        ),
        (
            "schur_contraction_inverts_embedding",
            0.0,
            Box::new(move || {
                max_over(
                    random_pairs(seed, 20, n)
                        .into_iter()
                        .map(|(a, _)| Ok(linalg::max_abs_diff(&schur::schur_contract(&schur::phi_embed(&a)?), &a))),
                )
            }),
        ),
        (
            "schur_embedding_homomorphism",
            1e-12,
            Box::new(move || {
                max_over(random_pairs(seed, 20, n).into_iter().map(|(a, b)| {
                    let (pa, pb) = (schur::phi_embed(&a)?, schur::phi_embed(&b)?);
                    let mul = linalg::max_abs_diff(pa.mul(&pb)?.dense(), schur::phi_embed(&(&a * &b))?.dense());
                    let adj = linalg::max_abs_diff(pa.adjoint().dense(), schur::phi_embed(&a.adjoint())?.dense());
                    Ok(mul.max(adj))
                }))
            }),
        ),
        (
            "identity_preserving",
            1e-12,
            Box::new(move || {
                let p1 = f.spec.p_of_identity();
                Ok((0..n).map(|i| (p1[(i, i)].re - 1.0).abs()).fold(0.0, f64::max))
            }),
        ),
        (
            "pure_generation",
            1e-10,
            Box::new(move || {
                let v = f.spec.isometry();
                max_over(random_pairs(seed + 1, 20, n).into_iter().map(|(a, b)| {
                    let direct = f.spec.transition_expectation(&a, &b)?;
                    let sandwich = v.sandwich(&ProductMatrix::tensor(&a, &b)?)?;
                    Ok(linalg::max_abs_diff(&direct, &sandwich))
                }))
            }),
        ),
        ("isometry", tol.iso_tol, Box::new(move || Ok(f.spec.isometry().isometry_defect(f.base.row_deficiency())))),
        ("stationary_residual", tol.solver_tol, Box::new(move || Ok(fixed_point_residual(&f.base, &f.pi)))),
        (
            "quantum_measure_marginal",
            1e-12,
            Box::new(move || {
                let q = q()?;
                Ok((0..n).map(|i| (q.matrix()[(i, i)].re - f.pi[i]).abs()).fold(0.0, f64::max))
            }),
        ),
        (
            "markov_invariance",
            1e-10,
            Box::new(move || {
                let q = q()?;
                let mut rng = sampling::rng(seed + 2);
                max_over((0..10).map(|_| {
                    let x = sampling::complex_matrix(&mut rng, n);
                    Ok((q.expectation(&f.spec.markov_operator(&x)?) - q.expectation(&x)).norm())
                }))
            }),
        ),
        (
            "diagonal_restriction",
            1e-10,
            Box::new(move || {
                let q = q()?;
                max_over((0..n * n * n).map(|t| {
                    let path = [t / (n * n), (t / n) % n, t % n];
                    let word = ObservableWord::diagonal_units(n, &path)?;
                    let got = correlator::finite_correlation(&f.spec, &q, &word)?;
                    let want = correlator::classical_path_probability(&f.base, &f.pi, &path);
                    Ok((got - num_complex::Complex64::new(want, 0.0)).norm())
                }))
            }),
        ),
        (
            "density_state",
            1e-10,
            Box::new(move || {
                let d = correlator::density_block_closed(&f.spec, &q()?, 3, tol)?;
                let psd = (-linalg::min_eigenvalue(d.matrix())).max(0.0);
                Ok(linalg::hermitian_defect(d.matrix()).max(psd).max((d.trace() - 1.0).abs()))
            }),
        ),
        (
            "partial_trace_consistency",
            ROUTE_TOL,
            Box::new(move || {
                let q = q()?;
                let d2 = correlator::density_block_closed(&f.spec, &q, 2, tol)?;
                let d3 = correlator::density_block_closed(&f.spec, &q, 3, tol)?;
                max_over([Side::Left, Side::Right].map(|side| {
                    Ok(linalg::max_abs_diff(correlator::partial_trace_site(&d3, side)?.matrix(), d2.matrix()))
                }))
            }),
        ),
        (
            "pure_product_state",
            1e-10,
            Box::new(move || {
                let p = [0.5, 0.3, 0.2];
                let spec = EntangledSpec::unphased(StochasticMatrix::from_rows(&vec![p.to_vec(); 3])?);
                let q = spec.quantum_measure_from_weights(&p, true)?;
                let d1 = correlator::density_block_closed(&spec, &q, 1, tol)?;
                let d3 = correlator::density_block_closed(&spec, &q, 3, tol)?;
                let product = linalg::kron(&linalg::kron(d1.matrix(), d1.matrix()), d1.matrix());
                let diag = correlator::spectral_diagnostics(&d3, tol.rank_tol);
                let rank_defect = diag.rank.abs_diff(1) as f64;
                Ok(linalg::max_abs_diff(d3.matrix(), &product).max(diag.entropy).max(rank_defect))
            }),
        ),
        (
            "mixture_exactness",
            MIXTURE_TOL,
            Box::new(move || max_over(sample_chains(f).iter().map(|rows| Ok(mixture_residual(rows, seed, tol)?[0])))),
        ),
        (
            "phi_averaging",
            MIXTURE_TOL,
            Box::new(move || max_over(sample_chains(f).iter().map(|rows| Ok(mixture_residual(rows, seed, tol)?[1])))),
        ),
        (
            "verdict_dichotomy",
            0.0,
            Box::new(move || {
                let chains = sample_chains(f);
                Ok(verdict_mismatch(&chains[0], &[0.5, 0.5], (false, false), tol)?
                    .max(verdict_mismatch(&chains[1], &[1.0], (true, false), tol)?)
                    .max(verdict_mismatch(&[vec![0.7, 0.3], vec![0.3, 0.7]], &[1.0], (true, true), tol)?))
            }),
        ),
        (
            "group_axioms",
            0.0,
            Box::new(move || {
                let worst = [Group::cyclic(6)?, Group::dihedral(3)?, Group::dihedral(4)?]
                    .iter()
                    .map(|g| g.axiom_violations(100, seed))
                    .max()
                    .unwrap_or(0);
                Ok(worst as f64)
            }),
        ),
        (
            "walk_doubly_stochastic",
            GROUP_TOL,
            Box::new(move || {
                max_over([Group::cyclic(6)?, Group::dihedral(3)?].iter().flat_map(|g| {
                    let mu = GroupMeasure::random(g, seed);
                    [WalkSide::Right, WalkSide::Left].map(|side| {
                        let w = groups::walk_matrix(g, &mu, side, tol)?;
                        let rows = (0..w.len()).map(|i| (w.entries().row(i).sum() - 1.0).abs());
                        let cols = w.column_sums().into_iter().map(|c| (c - 1.0).abs());
                        Ok(rows.chain(cols).fold(0.0, f64::max))
                    })
                }))
            }),
        ),
        (
            "group_equivariance",
            GROUP_TOL,
            Box::new(move || {
                let g = Group::dihedral(3)?;
                let mu = GroupMeasure::random(&g, seed);
                max_over((0..g.len()).flat_map(|e| {
                    let g = &g;
                    let mu = &mu;
                    [(WalkSide::Right, Translation::Left), (WalkSide::Left, Translation::Right)]
                        .map(move |(w, t)| Ok(groups::equivariance_residual(g, mu, w, t, e, 5, seed)?))
                }))
            }),
        ),
        (
            "symmetric_walk",
            1e-15,
            Box::new(move || {
                let g = Group::dihedral(5)?;
                let mu = GroupMeasure::from_words(&g, &[("r".into(), 0.3), ("R".into(), 0.3), ("s".into(), 0.4)])?;
                let w = groups::walk_matrix(&g, &mu, WalkSide::Right, tol)?;
                Ok((w.entries() - w.entries().transpose()).abs().max())
            }),
        ),
        (
            "truncation_deficiency",
            1e-15,
            Box::new(move || {
                let g = Group::free(2, 3)?;
                let w = groups::walk_matrix(&g, &GroupMeasure::uniform_on_generators(&g)?, WalkSide::Right, tol)?;
                Ok(g.labels()
                    .iter()
                    .zip(w.row_deficiency())
                    .map(|(l, d)| (d - if l.len() == 3 { 0.75 } else { 0.0 }).abs())
                    .fold(0.0, f64::max))
            }),
        ),
    ]
}

pub fn run(config: &RunConfig) -> Result<Outputs, Failure> {
    let tol = &config.tolerances;
    let f = fixture(config.seed, config.mutate, tol)?;
    let mut results = Vec::new();
    for (name, limit, check) in checks(&f, config.seed, tol) {
        let residual = check()?;
        let pass = residual <= limit && !residual.is_nan();
        println!("[{}] {name}: residual {residual:e} (tol {limit:e})", if pass { "PASS" } else { "FAIL" });
        results.push(CheckResult { name, residual, tol: limit, pass });
        if !pass {
            if let Some(dir) = config.out.as_deref() {
                Outputs::new(config, &[], &results)?.emit(config.command, Some(dir))?;
            }
            return Err(Failure::invariant(name, residual, limit));
        }
    }
    println!("selftest: {} checks passed", results.len());
    let out = Outputs::new(config, &[], &results)?;
    Ok(match config.out {
        Some(_) => out,
        // the per-check lines are the stdout report
        None => Outputs::default(),
    })
}

//! Acceptance criteria, one test per criterion. Each prints a single
//! `[PASS]` or `[FAIL]` line before asserting.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use emc_core::classical::{decompose, evolve, mix_stationary, uniform_alpha, StochasticMatrix};
use emc_core::correlator::{self, ObservableWord, Side};
use emc_core::entangled::{EntangledSpec, PhaseMatrix};
use emc_core::ergodic::{self, CesaroCurve, ErgodicAnalysis};
use emc_core::groups::{self, Group, GroupMeasure, Translation, WalkSide};
use emc_core::linalg::{self, matrix_unit};
use emc_core::schur::{self, Schatten};
use emc_core::{sampling, Tolerances};
use num_complex::Complex64;

fn verdict(criterion: u32, summary: &str, ok: bool, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {criterion}: {summary} ({detail})");
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn chain(seed: u64, n: usize) -> StochasticMatrix {
    let mut rng = sampling::rng(seed);
    StochasticMatrix::from_dense(sampling::stochastic_matrix(&mut rng, n, 0.3)).unwrap()
}

#[test]
fn criterion_1_schur_calculus() {
    let start = Instant::now();
    let mut rng = sampling::rng(1001);
    let (mut inverse, mut hom) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let a = sampling::complex_matrix(&mut rng, 4);
        let b = sampling::complex_matrix(&mut rng, 4);
        let (pa, pb) = (schur::phi_embed(&a).unwrap(), schur::phi_embed(&b).unwrap());
        inverse = inverse.max(linalg::max_abs_diff(&schur::schur_contract(&pa), &a));
        let prod = schur::phi_embed(&(&a * &b)).unwrap();
        hom = hom.max(linalg::max_abs_diff(pa.mul(&pb).unwrap().dense(), prod.dense()));
        let adj = schur::phi_embed(&a.adjoint()).unwrap();
        hom = hom.max(linalg::max_abs_diff(pa.adjoint().dense(), adj.dense()));
    }
    let mut trace_norm = 0.0f64;
    for t in 0..50 {
        // trace-class samples with traces other than one
        let scale = Complex64::new(0.1 + 0.3 * (t % 10) as f64, 0.0);
        let rho = sampling::density_matrix(&mut rng, 4) * scale;
        let phi = schur::phi_embed(&rho).unwrap();
        trace_norm = trace_norm.max((phi.trace() - linalg::trace(&rho)).norm());
        for p in [Schatten::One, Schatten::Two] {
            let lhs = schur::schatten_norm(phi.dense(), p).unwrap();
            let rhs = schur::schatten_norm(&rho, p).unwrap();
            trace_norm = trace_norm.max((lhs - rhs).abs());
        }
    }
    let elapsed = start.elapsed();
    let ok = inverse == 0.0 && hom <= 1e-12 && trace_norm <= 1e-10 && elapsed < Duration::from_secs(5);
    verdict(
        1,
        "Schur calculus suite",
        ok,
        format!("m∘Φ residual {inverse:e}, homomorphism {hom:e}, trace/norm {trace_norm:e}, {elapsed:?}"),
    );
}

#[test]
fn criterion_2_pure_generation() {
    let start = Instant::now();
    let mut rng = sampling::rng(2002);
    let mut worst = 0.0f64;
    for t in 0..100u64 {
        let n = 2 + (t as usize % 5);
        let base = chain(200 + t, n);
        let phases = if t < 20 { PhaseMatrix::random(n, 300 + t) } else { PhaseMatrix::ones(n) };
        let spec = EntangledSpec::new(base, phases).unwrap();
        let a = sampling::complex_matrix(&mut rng, n);
        let b = sampling::complex_matrix(&mut rng, n);
        let direct = spec.transition_expectation(&a, &b).unwrap();
        let sandwich = spec.isometry().sandwich(&schur::ProductMatrix::tensor(&a, &b).unwrap()).unwrap();
        worst = worst.max(linalg::max_abs_diff(&direct, &sandwich));
    }
    let elapsed = start.elapsed();
    let ok = worst <= 1e-10 && elapsed < Duration::from_secs(10);
    verdict(2, "pure generation A⋄P(B) = V*(A⊗B)V", ok, format!("max residual {worst:e}, {elapsed:?}"));
}

#[test]
fn criterion_3_diagonal_restriction() {
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    let mut words = 0usize;
    for c in 0..20u64 {
        let n = 2 + (c as usize % 5);
        let base = chain(3000 + c, n);
        let decomp = decompose(&base, &tol).unwrap();
        let pi = mix_stationary(&decomp, &uniform_alpha(&decomp)).unwrap();
        for variant in 0..6u64 {
            let phases = if variant == 0 { PhaseMatrix::ones(n) } else { PhaseMatrix::random(n, 100 * c + variant) };
            let spec = EntangledSpec::new(base.clone(), phases).unwrap();
            let q = spec.quantum_measure(&pi).unwrap();
            for len in 1..=4u32 {
                for t in 0..n.pow(len) {
                    let path: Vec<usize> = (0..len).map(|m| (t / n.pow(len - 1 - m)) % n).collect();
                    let word = ObservableWord::diagonal_units(n, &path).unwrap();
                    let got = correlator::finite_correlation(&spec, &q, &word).unwrap();
                    let want = path.windows(2).fold(pi.weights[path[0]], |p, w| p * base.get(w[0], w[1]));
                    worst = worst.max((got - Complex64::new(want, 0.0)).norm());
                    words += 1;
                }
            }
        }
    }
    verdict(
        3,
        "diagonal restriction to the classical chain",
        worst <= 1e-10,
        format!("{words} words, max residual {worst:e}"),
    );
}

#[test]
fn criterion_4_density_routes() {
    let start = Instant::now();
    let tol = Tolerances::default();
    let (mut routes, mut traces) = (0.0f64, 0.0f64);
    for n in 2..=6usize {
        let base = chain(4000 + n as u64, n);
        let decomp = decompose(&base, &tol).unwrap();
        let pi = mix_stationary(&decomp, &uniform_alpha(&decomp)).unwrap();
        for phased in [false, true] {
            let phases = if phased { PhaseMatrix::random(n, 40 + n as u64) } else { PhaseMatrix::ones(n) };
            let spec = EntangledSpec::new(base.clone(), phases).unwrap();
            let q = spec.quantum_measure(&pi).unwrap();
            let mut previous: Option<correlator::DensityBlock> = None;
            for k in 1..=5u32 {
                if n.pow(k) > tol.block_cutoff {
                    let prev = previous.as_ref().unwrap();
                    traces = traces.max(sampled_partial_traces(&spec, &q, prev, 7 * n as u64));
                    break;
                }
                let closed = correlator::density_block_closed(&spec, &q, k as usize, &tol).unwrap();
                if k <= 4 {
                    let rec = correlator::density_block_recursive(&spec, &q, k as usize, &tol).unwrap();
                    routes = routes.max(linalg::max_abs_diff(rec.matrix(), closed.matrix()));
                }
                if let Some(prev) = &previous {
                    for side in [Side::Left, Side::Right] {
                        let reduced = correlator::partial_trace_site(&closed, side).unwrap();
                        traces = traces.max(linalg::max_abs_diff(reduced.matrix(), prev.matrix()));
                    }
                }
                previous = Some(closed);
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = routes <= 1e-10 && traces <= 1e-10 && elapsed < Duration::from_secs(60);
    verdict(
        4,
        "density-block route equivalence and partial traces",
        ok,
        format!("routes {routes:e}, partial traces {traces:e}, {elapsed:?}"),
    );
}

/// Partial traces of the next block on sampled entries of `block`, with the
/// next block's entries evaluated directly as word expectations.
fn sampled_partial_traces(
    spec: &EntangledSpec,
    q: &emc_core::entangled::QuantumMeasure,
    block: &correlator::DensityBlock,
    seed: u64,
) -> f64 {
    use rand::Rng;
    let n = block.site_dim();
    let dim = block.matrix().nrows();
    let mut rng = sampling::rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..40 {
        let (r, c) = (rng.gen_range(0..dim), rng.gen_range(0..dim));
        let (row, col) = (block.tuple(r), block.tuple(c));
        let units: Vec<_> = row.iter().zip(&col).map(|(&i, &j)| matrix_unit(n, j, i)).collect();
        let (mut left, mut right) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for x in 0..n {
            let mut sites = units.clone();
            sites.push(matrix_unit(n, x, x));
            right += correlator::finite_correlation(spec, q, &ObservableWord::new(sites).unwrap()).unwrap();
            let mut sites = vec![matrix_unit(n, x, x)];
            sites.extend(units.iter().cloned());
            left += correlator::finite_correlation(spec, q, &ObservableWord::new(sites).unwrap()).unwrap();
        }
        let want = block.matrix()[(r, c)];
        worst = worst.max((left - want).norm()).max((right - want).norm());
    }
    worst
}

#[test]
fn criterion_5_pure_product_example() {
    let tol = Tolerances::default();
    let p = [0.5, 0.3, 0.2];
    let spec = EntangledSpec::unphased(StochasticMatrix::from_rows(&vec![p.to_vec(); 3]).unwrap());
    let q = spec.quantum_measure_from_weights(&p, true).unwrap();
    let d1 = correlator::density_block_closed(&spec, &q, 1, &tol).unwrap();
    let mut first = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            first = first.max((d1.matrix()[(i, j)] - Complex64::new((p[i] * p[j]).sqrt(), 0.0)).norm());
        }
    }
    let d3 = correlator::density_block_closed(&spec, &q, 3, &tol).unwrap();
    let product = linalg::kron(&linalg::kron(d1.matrix(), d1.matrix()), d1.matrix());
    let third = linalg::max_abs_diff(d3.matrix(), &product);
    let diag = correlator::spectral_diagnostics(&d3, 1e-10);
    let ok = first <= 1e-12 && third <= 1e-10 && diag.rank == 1 && diag.entropy <= 1e-10;
    verdict(
        5,
        "pure product state example",
        ok,
        format!("D1 {first:e}, D3 {third:e}, rank {}, entropy {:e}", diag.rank, diag.entropy),
    );
}

struct Setup {
    spec: EntangledSpec,
    decomp: emc_core::classical::ChainDecomposition,
    pi: emc_core::classical::StationaryDistribution,
}

fn setup(rows: &[Vec<f64>], alpha: &[f64]) -> Setup {
    let tol = Tolerances::default();
    let base = StochasticMatrix::from_rows(rows).unwrap();
    let decomp = decompose(&base, &tol).unwrap();
    let pi = mix_stationary(&decomp, alpha).unwrap();
    Setup { spec: EntangledSpec::unphased(base), decomp, pi }
}

#[test]
fn criterion_6_ergodicity_dichotomy() {
    let tol = Tolerances::default();
    let n_curve = 200;

    // (a) two absorbing states
    let s = setup(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.5, 0.5]);
    let q = s.spec.quantum_measure(&s.pi).unwrap();
    let v = ergodic::verdict(&s.decomp, &s.pi, &[], &tol);
    let mut variance_gap = 0.0f64;
    for (a, b) in [(0, 0), (0, 1), (1, 1)] {
        let curve =
            ergodic::cesaro_curve(&s.spec, &q, &matrix_unit(2, a, a), &matrix_unit(2, b, b), n_curve, &tol).unwrap();
        // ω_a(e_ii) = δ_ia, ω_b(e_ii) = δ_ib
        let delta = |i: usize, c: usize| f64::from(u8::from(i == c));
        let hand = 0.25 * (delta(a, 0) - delta(a, 1)) * (delta(b, 0) - delta(b, 1));
        let measured = (curve.cesaro.last().unwrap() - curve.product).re;
        variance_gap = variance_gap.max((measured - hand).abs());
    }
    let ok_a = !v.ergodic && !v.strongly_clustering && variance_gap <= 1e-6;

    // (b) period two
    let s = setup(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[1.0]);
    let q = s.spec.quantum_measure(&s.pi).unwrap();
    let e00 = matrix_unit(2, 0, 0);
    let curve = ergodic::cesaro_curve(&s.spec, &q, &e00, &e00, n_curve, &tol).unwrap();
    let v = ergodic::verdict(&s.decomp, &s.pi, std::slice::from_ref(&curve), &tol);
    let tail_swing = curve.raw[n_curve - 10..].windows(2).map(|w| (w[0] - w[1]).norm()).fold(f64::INFINITY, f64::min);
    let ok_b = v.ergodic && !v.strongly_clustering && tail_swing >= 0.25 && curve.cesaro_residual() <= 1e-6;

    // (c) strongly clustering
    let s = setup(&[vec![0.7, 0.3], vec![0.3, 0.7]], &[1.0]);
    let q = s.spec.quantum_measure(&s.pi).unwrap();
    let analysis = ErgodicAnalysis::new(&s.spec, &q, &s.decomp, &s.pi, &tol).unwrap();
    let curves: Vec<CesaroCurve> =
        ergodic::default_curves(&analysis, n_curve, &tol).unwrap().into_iter().map(|(_, c)| c).collect();
    let v = ergodic::verdict(&s.decomp, &s.pi, &curves, &tol);
    let rate = v.fitted_rate.unwrap_or(f64::NAN);
    let ok_c = v.ergodic && v.strongly_clustering && (rate - 0.4).abs() <= 0.02;

    verdict(
        6,
        "ergodicity / strong clustering dichotomy",
        ok_a && ok_b && ok_c,
        format!(
            "(a) class-variance gap {variance_gap:e}; (b) raw swing {tail_swing}, Cesàro residual {:e}; (c) fitted rate {rate}",
            curve.cesaro_residual()
        ),
    );
}

#[test]
fn criterion_7_group_equivariance() {
    let tol = Tolerances::default();
    let groups = [Group::cyclic(3), Group::cyclic(6), Group::dihedral(3), Group::dihedral(4)].map(Result::unwrap);
    let (mut correct, mut stochastic) = (0.0f64, 0.0f64);
    for (gi, g) in groups.iter().enumerate() {
        for m in 0..2u64 {
            let mu = GroupMeasure::random(g, 70 + 10 * gi as u64 + m);
            for side in [WalkSide::Right, WalkSide::Left] {
                let w = groups::walk_matrix(g, &mu, side, &tol).unwrap();
                let rows = (0..w.len()).map(|i| (w.entries().row(i).sum() - 1.0).abs());
                let cols = w.column_sums().into_iter().map(|c| (c - 1.0).abs());
                stochastic = stochastic.max(rows.chain(cols).fold(0.0, f64::max));
            }
            for e in 0..g.len() {
                for (walk, translation) in [(WalkSide::Right, Translation::Left), (WalkSide::Left, Translation::Right)]
                {
                    let r = groups::equivariance_residual(g, &mu, walk, translation, e, 20, 7).unwrap();
                    correct = correct.max(r);
                }
            }
        }
    }
    let d3 = &groups[2];
    let mu = GroupMeasure::random(d3, 90);
    let mismatched = (0..d3.len())
        .map(|e| groups::equivariance_residual(d3, &mu, WalkSide::Left, Translation::Left, e, 20, 7).unwrap())
        .fold(0.0, f64::max);
    let ok = correct <= 1e-10 && stochastic <= 1e-10 && mismatched > 1e-2;
    verdict(
        7,
        "group-walk equivariance",
        ok,
        format!("matched pairings {correct:e}, double stochasticity {stochastic:e}, mismatched pairing {mismatched:e}"),
    );
}

#[test]
fn criterion_8_truncation_sanity() {
    let tol = Tolerances::default();
    let g = Group::free(2, 3).unwrap();
    let mu = GroupMeasure::uniform_on_generators(&g).unwrap();
    let walk = groups::walk_matrix(&g, &mu, WalkSide::Right, &tol).unwrap();
    let boundary: Vec<usize> = (0..g.len()).filter(|&i| g.labels()[i].len() == 3).collect();
    let boundary_exact = boundary.iter().all(|&i| walk.row_deficiency()[i] == 0.75)
        && (0..g.len()).filter(|i| !boundary.contains(i)).all(|i| walk.row_deficiency()[i] == 0.0);
    // uniform weights on the deficiency-free interior
    let interior: Vec<usize> = (0..g.len()).filter(|&i| g.labels()[i] == "e" || g.labels()[i].len() < 3).collect();
    let mut pi = vec![0.0; g.len()];
    for &i in &interior {
        pi[i] = 1.0 / interior.len() as f64;
    }
    let spec = EntangledSpec::unphased(walk.clone());
    let q = spec.quantum_measure_from_weights(&pi, true).unwrap();
    let d2 = correlator::density_block_closed(&spec, &q, 2, &tol).unwrap();
    let start = evolve(&walk, &pi, 1);
    let leaked = start.iter().sum::<f64>() - evolve(&walk, &start, 2).iter().sum::<f64>();
    let residual = (d2.trace() - (1.0 - leaked)).abs();
    let ok = boundary_exact && boundary.len() == 36 && residual <= 1e-10;
    verdict(
        8,
        "free-group ball truncation",
        ok,
        format!(
            "{} boundary rows, Tr D2 {} vs 1 − leaked {}, residual {residual:e}",
            boundary.len(),
            d2.trace(),
            1.0 - leaked
        ),
    );
}

fn run_emc(args: &[&str], out: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_emc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "emc {args:?} failed");
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_9_determinism() {
    let work = tempfile::tempdir().unwrap();
    let input = work.path().join("chain.csv");
    std::fs::write(&input, "0.5,0.3,0.2\n0.1,0.6,0.3\n0.4,0.4,0.2\n").unwrap();
    let group = work.path().join("group.json");
    std::fs::write(&group, r#"{"kind":"dihedral","params":{"n":4},"measure":[["r",0.4],["R",0.4],["s",0.2]]}"#)
        .unwrap();
    let input = input.to_str().unwrap();
    let group = group.to_str().unwrap();
    let runs: [&[&str]; 6] = [
        &["classify", "--input", input],
        &["density", "--input", input, "--k", "3", "--phases", r#"{"seed": 5}"#],
        &["correlate", "--input", input, "--word", "e0:1,1,e1:0", "--a", "e0:0", "--b", "e2:2", "--gap-max", "64"],
        &["cluster", "--input", input, "--seed", "11"],
        &["groupwalk", "--group", group, "--seed", "3"],
        &["selftest", "--seed", "4"],
    ];
    let mut files = 0;
    let mut identical = true;
    for (r, args) in runs.iter().enumerate() {
        let first = work.path().join(format!("run{r}a"));
        let second = work.path().join(format!("run{r}b"));
        run_emc(args, &first);
        run_emc(args, &second);
        let (a, b) = (snapshot(&first), snapshot(&second));
        files += a.len();
        identical &= !a.is_empty() && a == b;
    }
    verdict(
        9,
        "byte-identical CLI outputs for repeated runs",
        identical,
        format!("{} commands, {files} files compared", runs.len()),
    );
}

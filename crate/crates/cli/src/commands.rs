use emc_core::classical::{
    self, decompose, fixed_point_residual, mix_stationary, uniform_alpha, ChainDecomposition, DecompositionReport,
    MatrixJson, StationaryDistribution, StochasticMatrix,
};
use emc_core::correlator::{self, DensityBlockJson, ObservableWord, Side};
use emc_core::entangled::{EntangledSpec, PhaseMatrix, PhaseSpec, QuantumMeasure};
use emc_core::ergodic::{self, ClusterVerdict, DecompositionCheck, ErgodicAnalysis};
use emc_core::groups::{self, GroupInput, Translation, WalkSide};
use emc_core::linalg;
use serde::Serialize;

use crate::config::RunConfig;
use crate::report::Outputs;
use crate::{ensure, Failure};

/// Agreement required between the two density-block routes and between a
/// block and the partial traces of the next one.
pub const ROUTE_TOL: f64 = 1e-10;
/// Mixture and φ-averaging residuals of the ergodic decomposition.
pub const MIXTURE_TOL: f64 = 1e-10;
/// Equivariance and double-stochasticity residuals on exact groups.
pub const GROUP_TOL: f64 = 1e-10;
/// Density-block entries are listed in the report up to this dimension.
pub const BLOCK_JSON_DIM: usize = 256;
pub const DEFAULT_K: usize = 2;
pub const DEFAULT_GAP_MAX: usize = 200;
const EQUIVARIANCE_SAMPLES: usize = 20;
const EQUIVARIANCE_ELEMENTS: usize = 24;

fn load_group(config: &RunConfig) -> Result<Option<GroupInput>, Failure> {
    config.group.as_ref().map(|(_, text)| groups::parse_group_spec(text).map_err(Failure::from)).transpose()
}

/// The input chain: a matrix file, or the walk of a group specification.
pub fn load_base(config: &RunConfig) -> Result<StochasticMatrix, Failure> {
    match (&config.input, load_group(config)?) {
        (Some((path, text)), _) => classical::parse_matrix(text, &config.tolerances).map_err(|e| {
            let mut f = Failure::from(e);
            f.message = format!("{}: {}", path.display(), f.message);
            f
        }),
        (None, Some(g)) => Ok(groups::walk_matrix(&g.group, &g.measure, g.side, &config.tolerances)?),
        (None, None) => Err(Failure::validation("one of --input or --group is required")),
    }
}

fn phases(config: &RunConfig, n: usize) -> Result<PhaseMatrix, Failure> {
    match &config.phases {
        Some(text) => Ok(PhaseSpec::parse(text)?.build(n)?),
        None => Ok(PhaseMatrix::ones(n)),
    }
}

struct Chain {
    base: StochasticMatrix,
    decomp: ChainDecomposition,
    pi: StationaryDistribution,
}

fn chain(config: &RunConfig) -> Result<Chain, Failure> {
    let tol = &config.tolerances;
    let base = load_base(config)?;
    let decomp = decompose(&base, tol)?;
    let alpha = match &config.alpha {
        Some(a) => a.clone(),
        None => uniform_alpha(&decomp),
    };
    let pi = mix_stationary(&decomp, &alpha)?;
    ensure("stationary_residual", fixed_point_residual(&base, &pi.weights), tol.solver_tol)?;
    Ok(Chain { base, decomp, pi })
}

fn entangled(config: &RunConfig, chain: &Chain) -> Result<(EntangledSpec, QuantumMeasure), Failure> {
    let spec = EntangledSpec::new(chain.base.clone(), phases(config, chain.base.len())?)?;
    let q = spec.quantum_measure(&chain.pi)?;
    Ok((spec, q))
}

#[derive(Serialize)]
struct ClassifyResult<'a> {
    n: usize,
    labels: &'a [String],
    decomposition: DecompositionReport,
    mixture_coefficients: &'a [f64],
    stationary: &'a [f64],
    stationary_residual: f64,
}

pub fn classify(config: &RunConfig) -> Result<Outputs, Failure> {
    let c = chain(config)?;
    let result = ClassifyResult {
        n: c.base.len(),
        labels: c.base.alphabet().labels(),
        decomposition: c.decomp.report(),
        mixture_coefficients: &c.pi.mixture_coefficients,
        stationary: &c.pi.weights,
        stationary_residual: fixed_point_residual(&c.base, &c.pi.weights),
    };
    Outputs::new(config, c.base.row_deficiency(), result)
}

#[derive(Serialize)]
struct DensityResult {
    k: usize,
    trace: f64,
    route_residual: f64,
    /// Distance of the left and right partial traces from the block of length `k − 1`.
    partial_trace_residuals: Option<[f64; 2]>,
    rank: usize,
    entropy: f64,
    pure: bool,
    block: DensityBlockJson,
}

pub fn density(config: &RunConfig) -> Result<Outputs, Failure> {
    let tol = &config.tolerances;
    let c = chain(config)?;
    let (spec, q) = entangled(config, &c)?;
    let k = config.k.unwrap_or(DEFAULT_K);
    let recursive = correlator::density_block_recursive(&spec, &q, k, tol)?;
    let closed = correlator::density_block_closed(&spec, &q, k, tol)?;
    let route_residual = linalg::max_abs_diff(recursive.matrix(), closed.matrix());
    ensure("route_equivalence", route_residual, ROUTE_TOL)?;
    closed.validate(tol, c.base.is_exact())?;
    let partial_trace_residuals = if k >= 2 {
        let shorter = correlator::density_block_closed(&spec, &q, k - 1, tol)?;
        let residual = |side| -> Result<f64, Failure> {
            let reduced = correlator::partial_trace_site(&closed, side)?;
            Ok(linalg::max_abs_diff(reduced.matrix(), shorter.matrix()))
        };
        let pair = [residual(Side::Left)?, residual(Side::Right)?];
        if c.base.is_exact() {
            ensure("partial_trace_consistency", pair[0].max(pair[1]), ROUTE_TOL)?;
        }
        Some(pair)
    } else {
        None
    };
    let spectral = correlator::spectral_diagnostics(&closed, tol.rank_tol);
    let mut block = closed.to_json(Some(spectral.eigenvalues.clone()));
    if closed.matrix().nrows() > BLOCK_JSON_DIM {
        block.entries.clear();
    }
    let result = DensityResult {
        k,
        trace: closed.trace(),
        route_residual,
        partial_trace_residuals,
        rank: spectral.rank,
        entropy: spectral.entropy,
        pure: spectral.rank == 1,
        block,
    };
    let mut out = Outputs::new(config, c.base.row_deficiency(), result)?;
    out.add("density_diagonal.csv", closed.diagonal_csv());
    Ok(out)
}

#[derive(Serialize)]
struct CurveSummary {
    a: String,
    b: String,
    length: usize,
    product: [f64; 2],
    raw_residual: f64,
    cesaro_residual: f64,
    fitted_rate: Option<f64>,
}

#[derive(Serialize)]
struct CorrelateResult {
    word: Option<String>,
    value: Option<[f64; 2]>,
    curve: Option<CurveSummary>,
}

pub fn correlate(config: &RunConfig) -> Result<Outputs, Failure> {
    let tol = &config.tolerances;
    let c = chain(config)?;
    let (spec, q) = entangled(config, &c)?;
    let n = spec.len();
    let mut result = CorrelateResult { word: config.word.clone(), value: None, curve: None };
    if let Some(text) = &config.word {
        let z = correlator::finite_correlation(&spec, &q, &ObservableWord::parse(text, n)?)?;
        result.value = Some([z.re, z.im]);
    }
    let mut csv = None;
    match (&config.a, &config.b) {
        (Some(a), Some(b)) => {
            let len = config.gap_max.unwrap_or(DEFAULT_GAP_MAX.min(tol.curve_cutoff));
            let curve = ergodic::cesaro_curve(
                &spec,
                &q,
                &correlator::parse_site(a, n)?,
                &correlator::parse_site(b, n)?,
                len,
                tol,
            )?;
            csv = Some(curve.to_csv());
            result.curve = Some(CurveSummary {
                a: a.clone(),
                b: b.clone(),
                length: curve.len(),
                product: [curve.product.re, curve.product.im],
                raw_residual: curve.raw_residual(),
                cesaro_residual: curve.cesaro_residual(),
                fitted_rate: curve.fitted_rate(),
            });
        }
        (None, None) if config.word.is_some() => {}
        (None, None) => return Err(Failure::validation("correlate needs --word or both --a and --b")),
        _ => return Err(Failure::validation("a curve needs both --a and --b")),
    }
    let mut out = Outputs::new(config, c.base.row_deficiency(), result)?;
    if let Some(csv) = csv {
        out.add("curve.csv", csv);
    }
    Ok(out)
}

#[derive(Serialize)]
struct ClusterCurve {
    a: usize,
    b: usize,
    file: String,
    raw_residual: f64,
    cesaro_residual: f64,
    class_covariance: f64,
    fitted_rate: Option<f64>,
}

#[derive(Serialize)]
struct ClusterResult {
    #[serde(flatten)]
    verdict: ClusterVerdict,
    decomposition: DecompositionCheck,
    curves: Vec<ClusterCurve>,
}

pub fn cluster(config: &RunConfig) -> Result<Outputs, Failure> {
    let tol = &config.tolerances;
    let c = chain(config)?;
    let (spec, q) = entangled(config, &c)?;
    let n = spec.len();
    let analysis = ErgodicAnalysis::new(&spec, &q, &c.decomp, &c.pi, tol)?;
    let check = analysis.decomposition_check(&ergodic::standard_test_words(n, config.seed))?;
    ensure("mixture_exactness", check.max_residual.max(check.omega_mixture_residual), MIXTURE_TOL)?;
    ensure("phi_averaging", check.phi_average_residual, MIXTURE_TOL)?;
    let len = config.gap_max.unwrap_or(DEFAULT_GAP_MAX.min(tol.curve_cutoff));
    let curves = ergodic::default_curves(&analysis, len, tol)?;
    let plain: Vec<_> = curves.iter().map(|(_, curve)| curve.clone()).collect();
    let verdict = ergodic::verdict(&c.decomp, &c.pi, &plain, tol);
    let mut files = Vec::new();
    let mut summaries = Vec::new();
    for ((i, j), curve) in &curves {
        let file = format!("curve_{i}_{j}.csv");
        let covariance = analysis.class_covariance(&linalg::matrix_unit(n, *i, *i), &linalg::matrix_unit(n, *j, *j))?;
        summaries.push(ClusterCurve {
            a: *i,
            b: *j,
            file: file.clone(),
            raw_residual: curve.raw_residual(),
            cesaro_residual: curve.cesaro_residual(),
            class_covariance: covariance.re,
            fitted_rate: curve.fitted_rate(),
        });
        files.push((file, curve.to_csv()));
    }
    let result = ClusterResult { verdict, decomposition: check, curves: summaries };
    let mut out = Outputs::new(config, c.base.row_deficiency(), result)?;
    for (name, csv) in files {
        out.add(name, csv);
    }
    Ok(out)
}

#[derive(Serialize)]
struct Equivariance {
    translation: Translation,
    elements_checked: usize,
    samples: usize,
    max_residual: f64,
}

#[derive(Serialize)]
struct GroupwalkResult<'a> {
    elements: &'a [String],
    exact: bool,
    side: WalkSide,
    measure: Vec<(String, f64)>,
    symmetric_measure: bool,
    doubly_stochastic: Option<bool>,
    equivariance: Option<Equivariance>,
    matrix: MatrixJson,
}

pub fn groupwalk(config: &RunConfig) -> Result<Outputs, Failure> {
    let tol = &config.tolerances;
    let input = load_group(config)?.ok_or_else(|| Failure::validation("groupwalk needs --group"))?;
    let GroupInput { group, measure, side } = &input;
    let walk = groups::walk_matrix(group, measure, *side, tol)?;
    let (doubly_stochastic, equivariance) = if group.is_exact() {
        let ds = groups::double_stochastic_check(&walk, GROUP_TOL);
        if !ds {
            return Err(Failure::invariant("double_stochasticity", 1.0, GROUP_TOL));
        }
        let translation = match side {
            WalkSide::Right => Translation::Left,
            WalkSide::Left => Translation::Right,
        };
        let elements: Vec<usize> = (0..group.len().min(EQUIVARIANCE_ELEMENTS)).collect();
        let mut worst = 0.0f64;
        for &g in &elements {
            let r = groups::equivariance_residual(
                group,
                measure,
                *side,
                translation,
                g,
                EQUIVARIANCE_SAMPLES,
                config.seed,
            )?;
            worst = worst.max(r);
        }
        ensure("equivariance", worst, GROUP_TOL)?;
        let eq = Equivariance {
            translation,
            elements_checked: elements.len(),
            samples: EQUIVARIANCE_SAMPLES,
            max_residual: worst,
        };
        (Some(ds), Some(eq))
    } else {
        (None, None)
    };
    let labels = group.labels();
    let matrix = walk.to_json();
    let result = GroupwalkResult {
        elements: labels,
        exact: group.is_exact(),
        side: *side,
        measure: measure.weights().iter().map(|&(i, w)| (labels[i].clone(), w)).collect(),
        symmetric_measure: measure.is_symmetric(group),
        doubly_stochastic,
        equivariance,
        matrix: matrix.clone(),
    };
    let mut out = Outputs::new(config, walk.row_deficiency(), result)?;
    let mut bytes = serde_json::to_vec_pretty(&matrix).map_err(|e| Failure::validation(e.to_string()))?;
    bytes.push(b'\n');
    out.add("walk_matrix.json", bytes);
    Ok(out)
}

//! Classical stochastic matrices on labeled, possibly truncated alphabets and
//! their ergodic classification: communication classes, transient/recurrent
//! split, periods, cyclic subclasses and per-class stationary vectors.
//!
//! Truncating an infinite state space leaves rows whose sum is below one. The
//! missing mass is kept in `row_deficiency` and never renormalized away, so a
//! class that leaks through the truncation boundary is reported as transient.

use std::collections::{HashSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::tolerance::Tolerances;
use crate::{Error, Result};

/// Ordered, duplicate-free state labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Invalid("alphabet must not be empty".into()));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::Invalid(format!("duplicate alphabet label `{label}`")));
            }
        }
        Ok(Alphabet { labels })
    }

    /// Labels `"0"`, `"1"`, ..., `"n-1"`.
    pub fn indexed(n: usize) -> Self {
        Alphabet { labels: (0..n).map(|i| i.to_string()).collect() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A nonnegative matrix whose rows sum to at most one.
#[derive(Debug, Clone)]
pub struct StochasticMatrix {
    alphabet: Alphabet,
    entries: DMatrix<f64>,
    row_deficiency: Vec<f64>,
    // positive entries per row, ascending column order
    rows: Vec<Vec<(usize, f64)>>,
}

impl StochasticMatrix {
    pub fn new(alphabet: Alphabet, entries: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let n = alphabet.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::shape(format!("{n}x{n}"), format!("{}x{}", entries.nrows(), entries.ncols())));
        }
        let mut row_deficiency = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut sum = 0.0;
            let mut row = Vec::new();
            for j in 0..n {
                let v = entries[(i, j)];
                if !v.is_finite() {
                    return Err(Error::Parse(format!("non-finite entry at row {i}, col {j}")));
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry { row: i, col: j, value: v });
                }
                if v > 0.0 {
                    row.push((j, v));
                }
                sum += v;
            }
            if sum > 1.0 + tol.stochastic_tol {
                return Err(Error::RowSumExceeded { row: i, sum, tol: tol.stochastic_tol });
            }
            let deficiency = 1.0 - sum;
            row_deficiency.push(if deficiency.abs() <= tol.stochastic_tol { 0.0 } else { deficiency });
            rows.push(row);
        }
        Ok(StochasticMatrix { alphabet, entries, row_deficiency, rows })
    }

    /// Dense rows over an indexed alphabet, default tolerances.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::shape(format!("{n} columns"), format!("{} in row {i}", r.len())));
        }
        let entries = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        StochasticMatrix::new(Alphabet::indexed(n), entries, &Tolerances::default())
    }

    /// Dense matrix over an indexed alphabet, default tolerances.
    pub fn from_dense(entries: DMatrix<f64>) -> Result<Self> {
        StochasticMatrix::new(Alphabet::indexed(entries.nrows()), entries, &Tolerances::default())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphabet.is_empty()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn row_deficiency(&self) -> &[f64] {
        &self.row_deficiency
    }

    /// Positive entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn is_exact(&self) -> bool {
        self.row_deficiency.iter().all(|&d| d == 0.0)
    }

    /// Column sums, for double-stochasticity checks.
    pub fn column_sums(&self) -> Vec<f64> {
        self.entries.row_sum().iter().copied().collect()
    }

    /// `dist · Π` for a row vector `dist`.
    pub fn left_multiply(&self, dist: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, &w) in dist.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for &(j, p) in &self.rows[i] {
                out[j] += w * p;
            }
        }
        out
    }

    /// `Π · d` for a column vector `d`.
    pub fn right_multiply(&self, d: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|&(j, p)| p * d[j]).sum()).collect()
    }

    /// Adjacency lists of the support graph: `i -> j` iff `Π_ij > support_tol`.
    pub fn support_graph(&self, support_tol: f64) -> Vec<Vec<usize>> {
        self.rows.iter().map(|row| row.iter().filter(|&&(_, p)| p > support_tol).map(|&(j, _)| j).collect()).collect()
    }

    pub fn to_json(&self) -> MatrixJson {
        let mut entries = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                entries.push((i, j, p));
            }
        }
        MatrixJson { n: self.len(), labels: Some(self.alphabet.labels.clone()), entries }
    }
}

/// Sparse-triplet matrix document `{"n", "labels", "entries": [[i, j, value], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub entries: Vec<(usize, usize, f64)>,
}

/// Where a matrix comes from.
#[derive(Debug, Clone)]
pub enum MatrixSource {
    File(std::path::PathBuf),
    Inline(String),
}

pub fn load_matrix(source: &MatrixSource, tol: &Tolerances) -> Result<StochasticMatrix> {
    match source {
        MatrixSource::File(path) => {
            let text = std::fs::read_to_string(path)?;
            parse_matrix(&text, tol)
        }
        MatrixSource::Inline(text) => parse_matrix(text, tol),
    }
}

/// JSON if the text starts with `{`, CSV otherwise.
pub fn parse_matrix(text: &str, tol: &Tolerances) -> Result<StochasticMatrix> {
    if text.trim_start().starts_with('{') {
        parse_json(text, tol)
    } else {
        parse_csv(text, tol)
    }
}

/// Rows separated by `;` or newlines, columns by `,`.
pub fn parse_csv(text: &str, tol: &Tolerances) -> Result<StochasticMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, line) in text.split([';', '\n']).enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(c, cell)| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {r}, col {c}: `{}` is not a number", cell.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::shape(format!("{n} columns"), format!("{} columns in row {i}", row.len())));
        }
    }
    StochasticMatrix::new(Alphabet::indexed(n), DMatrix::from_fn(n, n, |i, j| rows[i][j]), tol)
}

pub fn parse_json(text: &str, tol: &Tolerances) -> Result<StochasticMatrix> {
    let doc: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.n == 0 {
        return Err(Error::Parse("matrix size n must be positive".into()));
    }
    let alphabet = match doc.labels {
        Some(labels) if labels.len() != doc.n => {
            return Err(Error::shape(format!("{} labels", doc.n), format!("{} labels", labels.len())))
        }
        Some(labels) => Alphabet::new(labels)?,
        None => Alphabet::indexed(doc.n),
    };
    let mut entries = DMatrix::zeros(doc.n, doc.n);
    let mut seen = HashSet::new();
    for &(i, j, v) in &doc.entries {
        if i >= doc.n || j >= doc.n {
            return Err(Error::Parse(format!("entry ({i}, {j}) outside a {0}x{0} matrix", doc.n)));
        }
        if !seen.insert((i, j)) {
            return Err(Error::Parse(format!("duplicate entry ({i}, {j})")));
        }
        entries[(i, j)] = v;
    }
    StochasticMatrix::new(alphabet, entries, tol)
}

/// Strongly connected components of the support graph, each sorted, ordered
/// by their minimal index.
pub fn communication_classes(pi: &StochasticMatrix, tol: &Tolerances) -> Vec<Vec<usize>> {
    let graph = pi.support_graph(tol.support_tol);
    let mut classes = tarjan(&graph);
    for class in &mut classes {
        class.sort_unstable();
    }
    classes.sort_by_key(|c| c[0]);
    classes
}

// Iterative Tarjan; recursion would overflow on long truncation windows.
fn tarjan(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = graph.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut counter = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next == 0 {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = graph[v].get(*next) {
                *next += 1;
                if index[w] == UNSEEN {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                components.push(component);
            }
        }
    }
    components
}

/// Transient states and closed (recurrent) classes, without periods or
/// stationary vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub transient: Vec<usize>,
    pub recurrent: Vec<Vec<usize>>,
}

/// A class is recurrent iff it is closed and none of its rows leaks mass
/// through the truncation. Recurrent-null classes cannot occur on a finite
/// window, so every recurrent class found here is positive recurrent.
pub fn classify_states(pi: &StochasticMatrix, tol: &Tolerances) -> Classification {
    let classes = communication_classes(pi, tol);
    let mut member = vec![usize::MAX; pi.len()];
    for (c, class) in classes.iter().enumerate() {
        for &i in class {
            member[i] = c;
        }
    }
    let mut transient = Vec::new();
    let mut recurrent = Vec::new();
    for (c, class) in classes.into_iter().enumerate() {
        let outgoing: f64 =
            class.iter().flat_map(|&i| pi.row(i).iter()).filter(|&&(j, _)| member[j] != c).map(|&(_, p)| p).sum();
        let leaks = class.iter().any(|&i| pi.row_deficiency()[i] > tol.closure_tol);
        if outgoing <= tol.closure_tol && !leaks {
            recurrent.push(class);
        } else {
            transient.extend(class);
        }
    }
    transient.sort_unstable();
    Classification { transient, recurrent }
}

// BFS levels from the class minimum, restricted to the class.
fn class_levels(graph: &[Vec<usize>], class: &[usize]) -> Result<Vec<Option<usize>>> {
    let n = graph.len();
    let mut inside = vec![false; n];
    for &i in class {
        if i >= n {
            return Err(Error::Invalid(format!("state {i} outside the alphabet")));
        }
        inside[i] = true;
    }
    let start = *class.iter().min().ok_or_else(|| Error::Invalid("empty class".into()))?;
    let mut level = vec![None; n];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let lv = level[v].unwrap();
        for &w in &graph[v] {
            if inside[w] && level[w].is_none() {
                level[w] = Some(lv + 1);
                queue.push_back(w);
            }
        }
    }
    // strong connectivity: everything reached forward, and the start reached back
    let mut back = vec![false; n];
    back[start] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for &v in class {
            if !back[v] && graph[v].iter().any(|&w| inside[w] && back[w]) {
                back[v] = true;
                changed = true;
            }
        }
    }
    if class.iter().any(|&i| level[i].is_none() || !back[i]) {
        let mut sorted = class.to_vec();
        sorted.sort_unstable();
        return Err(Error::NotStronglyConnected(sorted));
    }
    Ok(level)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of a communication class: gcd of `level(u) + 1 - level(v)` over the
/// class's internal edges `u -> v`.
pub fn period_of_class(pi: &StochasticMatrix, class: &[usize], tol: &Tolerances) -> Result<usize> {
    let graph = pi.support_graph(tol.support_tol);
    let level = class_levels(&graph, class)?;
    let mut period = 0;
    for &u in class {
        let lu = level[u].unwrap();
        for &v in &graph[u] {
            if let Some(lv) = level[v] {
                period = gcd(period, (lu + 1).abs_diff(lv));
            }
        }
    }
    if period == 0 {
        // single state without a self-loop cannot be a strongly connected class
        let mut sorted = class.to_vec();
        sorted.sort_unstable();
        return Err(Error::NotStronglyConnected(sorted));
    }
    Ok(period)
}

/// Partition of a class into `period` subclasses with `Π` mapping subclass `j`
/// into subclass `j + 1 (mod period)`. Subclass 0 contains the class minimum.
pub fn cyclic_subclasses(
    pi: &StochasticMatrix,
    class: &[usize],
    period: usize,
    tol: &Tolerances,
) -> Result<Vec<Vec<usize>>> {
    let graph = pi.support_graph(tol.support_tol);
    let level = class_levels(&graph, class)?;
    let inconsistent = || {
        let mut sorted = class.to_vec();
        sorted.sort_unstable();
        Error::InconsistentPeriod { class: sorted, period }
    };
    if period == 0 {
        return Err(inconsistent());
    }
    let mut subclasses = vec![Vec::new(); period];
    for &u in class {
        let lu = level[u].unwrap();
        for &v in &graph[u] {
            if let Some(lv) = level[v] {
                if (lu + 1) % period != lv % period {
                    return Err(inconsistent());
                }
            }
        }
        subclasses[lu % period].push(u);
    }
    if subclasses.iter().any(|s| s.is_empty()) {
        return Err(inconsistent());
    }
    for s in &mut subclasses {
        s.sort_unstable();
    }
    Ok(subclasses)
}

/// `‖x Π − x‖₁`.
pub fn fixed_point_residual(pi: &StochasticMatrix, x: &[f64]) -> f64 {
    pi.left_multiply(x).iter().zip(x).map(|(a, b)| (a - b).abs()).sum()
}

/// Unique stationary vector of a recurrent class, returned over the full
/// alphabet (zero off the class).
///
/// Classes up to `dense_cutoff` states are solved directly; larger ones use
/// power iteration with a Cesàro average over one period, which converges for
/// periodic classes as well.
pub fn stationary_distribution(
    pi: &StochasticMatrix,
    class: &[usize],
    period: usize,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    let k = class.len();
    if k == 0 {
        return Err(Error::Invalid("empty class".into()));
    }
    let mut x = if k <= tol.dense_cutoff {
        stationary_dense(pi, class)?
    } else {
        stationary_power(pi, class, period.max(1), tol)?
    };
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    let residual = fixed_point_residual(pi, &x);
    if residual > tol.solver_tol {
        return Err(Error::NoConvergence { iters: 0, residual });
    }
    Ok(x)
}

fn stationary_dense(pi: &StochasticMatrix, class: &[usize]) -> Result<Vec<f64>> {
    let k = class.len();
    // (Π_Cᵀ − I) x = 0 with the last equation replaced by Σx = 1
    let mut a = DMatrix::from_fn(k, k, |r, c| {
        let v = pi.get(class[c], class[r]);
        if r == c {
            v - 1.0
        } else {
            v
        }
    });
    for c in 0..k {
        a[(k - 1, c)] = 1.0;
    }
    let mut b = DVector::zeros(k);
    b[k - 1] = 1.0;
    let solution = a.lu().solve(&b).ok_or(Error::NoConvergence { iters: 0, residual: f64::INFINITY })?;
    let mut x = vec![0.0; pi.len()];
    for (idx, &i) in class.iter().enumerate() {
        x[i] = solution[idx];
    }
    Ok(x)
}

fn stationary_power(pi: &StochasticMatrix, class: &[usize], period: usize, tol: &Tolerances) -> Result<Vec<f64>> {
    let n = pi.len();
    let mut x = vec![0.0; n];
    for &i in class {
        x[i] = 1.0 / class.len() as f64;
    }
    let mut iters = 0;
    let mut residual = f64::INFINITY;
    while iters < tol.max_iters {
        let mut average = vec![0.0; n];
        for _ in 0..period {
            for (a, v) in average.iter_mut().zip(&x) {
                *a += v / period as f64;
            }
            x = pi.left_multiply(&x);
            iters += 1;
        }
        residual = fixed_point_residual(pi, &average);
        if residual <= tol.solver_tol * 0.5 {
            return Ok(average);
        }
    }
    Err(Error::NoConvergence { iters, residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentClass {
    pub states: Vec<usize>,
    pub period: usize,
    pub subclasses: Vec<Vec<usize>>,
    /// Stationary vector over the full alphabet, supported on `states`.
    pub stationary: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainDecomposition {
    pub transient: Vec<usize>,
    pub classes: Vec<RecurrentClass>,
}

/// Full ergodic decomposition: classification, periods, cyclic subclasses and
/// stationary vectors.
pub fn decompose(pi: &StochasticMatrix, tol: &Tolerances) -> Result<ChainDecomposition> {
    let classification = classify_states(pi, tol);
    let classes = classification
        .recurrent
        .into_iter()
        .map(|states| {
            let period = period_of_class(pi, &states, tol)?;
            let subclasses = cyclic_subclasses(pi, &states, period, tol)?;
            let stationary = stationary_distribution(pi, &states, period, tol)?;
            Ok(RecurrentClass { states, period, subclasses, stationary })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainDecomposition { transient: classification.transient, classes })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub transient: Vec<usize>,
    pub classes: Vec<ClassReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub indices: Vec<usize>,
    pub period: usize,
    pub subclasses: Vec<Vec<usize>>,
    /// Stationary weights aligned with `indices`.
    pub stationary: Vec<f64>,
}

impl ChainDecomposition {
    pub fn report(&self) -> DecompositionReport {
        DecompositionReport {
            transient: self.transient.clone(),
            classes: self
                .classes
                .iter()
                .map(|c| ClassReport {
                    indices: c.states.clone(),
                    period: c.period,
                    subclasses: c.subclasses.clone(),
                    stationary: c.states.iter().map(|&i| c.stationary[i]).collect(),
                })
                .collect(),
        }
    }

    /// Class index of every state; `None` for transient states.
    pub fn class_of(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (c, class) in self.classes.iter().enumerate() {
            for &i in &class.states {
                out[i] = Some(c);
            }
        }
        out
    }
}

/// A stationary probability vector together with its class weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    pub weights: Vec<f64>,
    pub mixture_coefficients: Vec<f64>,
}

impl StationaryDistribution {
    /// `π(S)` for a set of states.
    pub fn mass(&self, states: &[usize]) -> f64 {
        states.iter().map(|&i| self.weights[i]).sum()
    }
}

/// `π = Σ_λ α_λ x_λ` over the recurrent classes.
pub fn mix_stationary(decomp: &ChainDecomposition, alpha: &[f64]) -> Result<StationaryDistribution> {
    if decomp.classes.is_empty() {
        return Err(Error::Invalid("chain has no recurrent class, so no stationary distribution".into()));
    }
    if alpha.len() != decomp.classes.len() {
        return Err(Error::shape(format!("{} mixture coefficients", decomp.classes.len()), format!("{}", alpha.len())));
    }
    if let Some((c, a)) = alpha.iter().enumerate().find(|(_, a)| !(a.is_finite() && **a >= 0.0)) {
        return Err(Error::Invalid(format!("mixture coefficient {c} is {a}, must be >= 0")));
    }
    let total: f64 = alpha.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!("mixture coefficients sum to {total}, not 1")));
    }
    let n = decomp.classes[0].stationary.len();
    let mut weights = vec![0.0; n];
    for (class, &a) in decomp.classes.iter().zip(alpha) {
        for &i in &class.states {
            weights[i] += a * class.stationary[i];
        }
    }
    Ok(StationaryDistribution { weights, mixture_coefficients: alpha.to_vec() })
}

/// Class coefficients from per-state weights; fails if a transient state
/// carries weight.
pub fn class_weights_from_states(decomp: &ChainDecomposition, state_weights: &[f64]) -> Result<Vec<f64>> {
    for &t in &decomp.transient {
        if state_weights.get(t).copied().unwrap_or(0.0) > 0.0 {
            return Err(Error::Invalid(format!("weight on transient state {t}")));
        }
    }
    Ok(decomp
        .classes
        .iter()
        .map(|c| c.states.iter().map(|&i| state_weights.get(i).copied().unwrap_or(0.0)).sum())
        .collect())
}

/// Uniform coefficients over all recurrent classes.
pub fn uniform_alpha(decomp: &ChainDecomposition) -> Vec<f64> {
    let m = decomp.classes.len();
    vec![1.0 / m as f64; m]
}

/// `dist · Πⁿ`. Mass shrinks by whatever leaks through deficient rows.
pub fn evolve(pi: &StochasticMatrix, dist: &[f64], n: usize) -> Vec<f64> {
    let mut x = dist.to_vec();
    for _ in 0..n {
        x = pi.left_multiply(&x);
    }
    x
}

//! Random walks on discrete groups.
//!
//! A group is enumerated breadth-first from the identity over an ordered
//! generating set, so every element is labelled by its shortlex-minimal word
//! (`e` for the identity). Finite groups are enumerated completely; free
//! groups and lattices are cut off at a word-length radius and steps leaving
//! the ball become row deficiency of the walk matrix.
//!
//! Generator letters:
//!
//! | kind | letters |
//! |---|---|
//! | `cyclic(n)` | `a` (+1), `A` (−1) |
//! | `dihedral(n)` | `r` (rotation), `R` (inverse rotation), `s` (reflection) |
//! | `free(rank)` | `a A b B …`, upper case is the inverse |
//! | `lattice(d)` | `a A b B …`, one pair per axis |
//! | `table` | the element labels |

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;
use rand::Rng;
use serde::Deserialize;

use crate::classical::{Alphabet, StochasticMatrix};
use crate::entangled::EntangledSpec;
use crate::linalg::{self, CMatrix};
use crate::sampling;
use crate::tolerance::Tolerances;
use crate::{Error, Result};

/// Largest enumeration accepted.
pub const MAX_ELEMENTS: usize = 5000;

type Element = Vec<i64>;

#[derive(Debug, Clone, PartialEq)]
enum Law {
    Cyclic(i64),
    Dihedral(i64),
    Free(usize),
    Lattice(usize),
    Table { table: Vec<Vec<usize>>, identity: usize },
}

impl Law {
    fn identity(&self) -> Element {
        match self {
            Law::Cyclic(_) => vec![0],
            Law::Dihedral(_) => vec![0, 0],
            Law::Free(_) => Vec::new(),
            Law::Lattice(d) => vec![0; *d],
            Law::Table { identity, .. } => vec![*identity as i64],
        }
    }

    fn multiply(&self, a: &[i64], b: &[i64]) -> Element {
        match self {
            Law::Cyclic(n) => vec![(a[0] + b[0]).rem_euclid(*n)],
            // r^a s^x · r^b s^y = r^{a ± b} s^{x+y}
            Law::Dihedral(n) => {
                let rot = if a[1] == 0 { a[0] + b[0] } else { a[0] - b[0] };
                vec![rot.rem_euclid(*n), (a[1] + b[1]) % 2]
            }
            Law::Free(_) => {
                let mut out = a.to_vec();
                for &x in b {
                    if out.last() == Some(&-x) {
                        out.pop();
                    } else {
                        out.push(x);
                    }
                }
                out
            }
            Law::Lattice(_) => a.iter().zip(b).map(|(x, y)| x + y).collect(),
            Law::Table { table, .. } => vec![table[a[0] as usize][b[0] as usize] as i64],
        }
    }

    fn inverse(&self, a: &[i64]) -> Element {
        match self {
            Law::Cyclic(n) => vec![(-a[0]).rem_euclid(*n)],
            Law::Dihedral(n) => {
                if a[1] == 0 {
                    vec![(-a[0]).rem_euclid(*n), 0]
                } else {
                    a.to_vec()
                }
            }
            Law::Free(_) => a.iter().rev().map(|x| -x).collect(),
            Law::Lattice(_) => a.iter().map(|x| -x).collect(),
            Law::Table { table, identity } => {
                let i = a[0] as usize;
                let j = table[i].iter().position(|&p| p == *identity).expect("validated table has inverses");
                vec![j as i64]
            }
        }
    }
}

fn letter(i: usize, inverse: bool) -> String {
    let c = (b'a' + i as u8) as char;
    if inverse {
        c.to_ascii_uppercase().to_string()
    } else {
        c.to_string()
    }
}

fn paired_letters(count: usize, unit: impl Fn(usize, i64) -> Element) -> Vec<(String, Element)> {
    (0..count).flat_map(|i| [(letter(i, false), unit(i, 1)), (letter(i, true), unit(i, -1))]).collect()
}

/// An enumerated (possibly truncated) group.
#[derive(Debug, Clone)]
pub struct Group {
    law: Law,
    generators: Vec<(String, Element)>,
    elements: Vec<Element>,
    labels: Vec<String>,
    index: HashMap<Element, usize>,
    truncated: bool,
}

impl Group {
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("cyclic group order must be >= 1".into()));
        }
        let n = n as i64;
        let gens = vec![("a".to_string(), vec![1 % n]), ("A".to_string(), vec![(n - 1) % n])];
        Group::enumerate(Law::Cyclic(n), gens, None)
    }

    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid("dihedral group needs n >= 2".into()));
        }
        let n = n as i64;
        let gens =
            vec![("r".to_string(), vec![1, 0]), ("R".to_string(), vec![n - 1, 0]), ("s".to_string(), vec![0, 1])];
        Group::enumerate(Law::Dihedral(n), gens, None)
    }

    /// Ball of the given word-length radius in the free group.
    pub fn free(rank: usize, radius: usize) -> Result<Self> {
        if rank == 0 || rank > 26 {
            return Err(Error::Invalid(format!("free group rank {rank} outside 1..=26")));
        }
        let gens = paired_letters(rank, |i, sign| vec![sign * (i as i64 + 1)]);
        Group::enumerate(Law::Free(rank), gens, Some(radius))
    }

    /// `Z^dim` restricted to the ℓ¹ ball of radius `window`.
    pub fn lattice(dim: usize, window: usize) -> Result<Self> {
        if dim == 0 || dim > 26 {
            return Err(Error::Invalid(format!("lattice dimension {dim} outside 1..=26")));
        }
        let gens = paired_letters(dim, |i, sign| {
            let mut e = vec![0; dim];
            e[i] = sign;
            e
        });
        Group::enumerate(Law::Lattice(dim), gens, Some(window))
    }

    /// A finite group from its multiplication table, `table[i][j] = i·j`.
    pub fn from_table(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Invalid("empty multiplication table".into()));
        }
        Alphabet::new(labels.clone())?;
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(Error::shape(format!("{n}x{n} multiplication table"), "ragged or mis-sized table"));
        }
        if let Some((i, j)) = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| table[i][j] >= n) {
            return Err(Error::Invalid(format!(
                "table entry ({}, {}) = {} is not an element",
                labels[i], labels[j], table[i][j]
            )));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::Invalid("multiplication table has no identity".into()))?;
        for g in 0..n {
            let right = (0..n).find(|&h| table[g][h] == identity);
            if right.is_none_or(|h| table[h][g] != identity) {
                return Err(Error::Invalid(format!("element {} has no two-sided inverse", labels[g])));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::Invalid(format!(
                            "table is not associative at ({}, {}, {})",
                            labels[a], labels[b], labels[c]
                        )));
                    }
                }
            }
        }
        let gens = labels
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != identity)
            .map(|(i, l)| (l.clone(), vec![i as i64]))
            .collect();
        let mut group = Group::enumerate(Law::Table { table, identity }, gens, None)?;
        group.labels = group.elements.iter().map(|e| labels[e[0] as usize].clone()).collect();
        Ok(group)
    }

    /// Restricts the generating set used for enumeration and word labels.
    pub fn with_generators(self, names: &[String]) -> Result<Self> {
        let mut gens = Vec::new();
        for name in names {
            let g = self
                .generators
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| Error::Invalid(format!("unknown generator `{name}`")))?;
            gens.push(g.clone());
        }
        let radius = if self.truncated { Some(self.radius()) } else { None };
        let table_labels = matches!(self.law, Law::Table { .. }).then(|| self.table_labels());
        let mut group = Group::enumerate(self.law, gens, radius)?;
        if let Some(labels) = table_labels {
            group.labels = group.elements.iter().map(|e| labels[e[0] as usize].clone()).collect();
        }
        Ok(group)
    }

    fn table_labels(&self) -> Vec<String> {
        let mut out = vec![String::new(); self.elements.len()];
        for (e, l) in self.elements.iter().zip(&self.labels) {
            if let Some(slot) = out.get_mut(e[0] as usize) {
                *slot = l.clone();
            }
        }
        out
    }

    fn radius(&self) -> usize {
        self.labels.iter().map(|l| if l == "e" { 0 } else { l.chars().count() }).max().unwrap_or(0)
    }

    fn enumerate(law: Law, generators: Vec<(String, Element)>, radius: Option<usize>) -> Result<Self> {
        let identity = law.identity();
        let mut elements = vec![identity.clone()];
        let mut labels = vec!["e".to_string()];
        let mut depth = vec![0usize];
        let mut index = HashMap::from([(identity, 0usize)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            if radius.is_some_and(|r| depth[u] >= r) {
                continue;
            }
            for (name, g) in &generators {
                let v = law.multiply(&elements[u], g);
                if index.contains_key(&v) {
                    continue;
                }
                if elements.len() >= MAX_ELEMENTS {
                    return Err(Error::Invalid(format!("group enumeration exceeds {MAX_ELEMENTS} elements")));
                }
                let label = if u == 0 { name.clone() } else { format!("{}{}", labels[u], name) };
                index.insert(v.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(v);
                labels.push(label);
                depth.push(depth[u] + 1);
            }
        }
        Ok(Group { law, generators, elements, labels, index, truncated: radius.is_some() })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// True when the enumeration is the whole group.
    pub fn is_exact(&self) -> bool {
        !self.truncated
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.labels.clone()).expect("shortlex labels are unique")
    }

    pub fn generator_names(&self) -> Vec<&str> {
        self.generators.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn element(&self, i: usize) -> &[i64] {
        &self.elements[i]
    }

    pub fn index_of(&self, g: &[i64]) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn multiply(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        self.law.multiply(a, b)
    }

    pub fn inverse(&self, a: &[i64]) -> Vec<i64> {
        self.law.inverse(a)
    }

    pub fn identity(&self) -> Vec<i64> {
        self.law.identity()
    }

    /// Product of generator names, matched greedily by longest name; `e` is
    /// the identity and spaces, `*` and `.` separate names.
    pub fn evaluate_word(&self, word: &str) -> Result<Vec<i64>> {
        let mut g = self.identity();
        let chars: Vec<char> = word.chars().collect();
        let mut pos = 0;
        while pos < chars.len() {
            if matches!(chars[pos], ' ' | '*' | '.') {
                pos += 1;
                continue;
            }
            let rest: String = chars[pos..].iter().collect();
            let best = self
                .generators
                .iter()
                .filter(|(n, _)| rest.starts_with(n.as_str()))
                .max_by_key(|(n, _)| n.chars().count());
            match best {
                Some((name, h)) => {
                    g = self.multiply(&g, h);
                    pos += name.chars().count();
                }
                None if chars[pos] == 'e' => pos += 1,
                None => return Err(Error::Parse(format!("word `{word}`: no generator at `{rest}`"))),
            }
        }
        Ok(g)
    }

    /// Identity and inverse laws on every element, associativity on seeded
    /// triples. Returns the number of failed checks.
    pub fn axiom_violations(&self, triples: usize, seed: u64) -> usize {
        let e = self.identity();
        let mut bad = 0;
        for g in &self.elements {
            bad += usize::from(self.multiply(&e, g) != *g || self.multiply(g, &e) != *g);
            let inv = self.inverse(g);
            bad += usize::from(self.multiply(g, &inv) != e || self.multiply(&inv, g) != e);
        }
        let mut rng = sampling::rng(seed);
        for _ in 0..triples {
            let [a, b, c] = [0; 3].map(|_| &self.elements[rng.gen_range(0..self.len())]);
            bad += usize::from(self.multiply(&self.multiply(a, b), c) != self.multiply(a, &self.multiply(b, c)));
        }
        bad
    }
}

/// A finitely supported probability measure on the enumerated elements.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMeasure {
    /// `(element index, weight)` sorted by index, positive weights only.
    weights: Vec<(usize, f64)>,
}

impl GroupMeasure {
    pub fn new(group: &Group, mut weights: Vec<(usize, f64)>) -> Result<Self> {
        if let Some(&(i, w)) = weights.iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Invalid(format!("measure weight {w} on element {i} must be >= 0")));
        }
        if let Some(&(i, _)) = weights.iter().find(|(i, _)| *i >= group.len()) {
            return Err(Error::Invalid(format!("measure supported on element {i} outside the enumeration")));
        }
        weights.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (i, w) in weights {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += w,
                _ => merged.push((i, w)),
            }
        }
        merged.retain(|&(_, w)| w > 0.0);
        let total: f64 = merged.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("measure weights sum to {total}, not 1")));
        }
        Ok(GroupMeasure { weights: merged })
    }

    /// Weights given on words; every word must evaluate inside the enumeration.
    pub fn from_words(group: &Group, words: &[(String, f64)]) -> Result<Self> {
        let weights = words
            .iter()
            .map(|(word, w)| {
                let g = group.evaluate_word(word)?;
                let i = group.index_of(&g).ok_or_else(|| {
                    Error::Invalid(format!("measure word `{word}` lies outside the enumerated elements"))
                })?;
                Ok((i, *w))
            })
            .collect::<Result<Vec<_>>>()?;
        GroupMeasure::new(group, weights)
    }

    pub fn uniform_on_generators(group: &Group) -> Result<Self> {
        let m = group.generators.len() as f64;
        let weights =
            group.generators.iter().map(|(_, g)| (group.index_of(g).unwrap_or(usize::MAX), 1.0 / m)).collect();
        GroupMeasure::new(group, weights)
    }

    pub fn delta_identity(group: &Group) -> Self {
        GroupMeasure { weights: vec![(0, 1.0)] }.checked(group)
    }

    /// Random weights with full support.
    pub fn random(group: &Group, seed: u64) -> Self {
        let mut rng = sampling::rng(seed);
        let raw: Vec<f64> = (0..group.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        GroupMeasure { weights: raw.into_iter().enumerate().map(|(i, w)| (i, w / total)).collect() }
    }

    fn checked(self, group: &Group) -> Self {
        debug_assert!(self.weights.iter().all(|(i, _)| *i < group.len()));
        self
    }

    pub fn weights(&self) -> &[(usize, f64)] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.iter().find(|(j, _)| *j == i).map_or(0.0, |(_, w)| *w)
    }

    /// `μ(g) = μ(g⁻¹)` for every element of the support.
    pub fn is_symmetric(&self, group: &Group) -> bool {
        self.weights.iter().all(|&(i, w)| {
            group.index_of(&group.inverse(group.element(i))).is_some_and(|j| (self.weight(j) - w).abs() <= 1e-15)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkSide {
    /// `Π_{gh} = μ(g⁻¹h)`.
    Right,
    /// `Π_{gh} = μ(gh⁻¹)`.
    Left,
}

/// The random-walk matrix; steps leaving a truncated enumeration are row
/// deficiency.
pub fn walk_matrix(group: &Group, mu: &GroupMeasure, side: WalkSide, tol: &Tolerances) -> Result<StochasticMatrix> {
    let n = group.len();
    let mut entries = DMatrix::zeros(n, n);
    for g in 0..n {
        for &(s, w) in mu.weights() {
            let sg = group.element(s);
            let h = match side {
                WalkSide::Right => group.multiply(group.element(g), sg),
                WalkSide::Left => group.multiply(&group.inverse(sg), group.element(g)),
            };
            if let Some(h) = group.index_of(&h) {
                entries[(g, h)] += w;
            }
        }
    }
    StochasticMatrix::new(group.alphabet(), entries, tol)
}

/// Row and column sums all within `tol` of one.
pub fn double_stochastic_check(pi: &StochasticMatrix, tol: f64) -> bool {
    let n = pi.len();
    (0..n).all(|i| (pi.entries().row(i).sum() - 1.0).abs() <= tol)
        && pi.column_sums().iter().all(|c| (c - 1.0).abs() <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Translation {
    /// `λ(g)_{xy} = δ_{x, g y}`.
    Left,
    /// `ρ(g)_{xy} = δ_{x, y g⁻¹}`.
    Right,
}

/// Permutation matrix of a translation; only defined on exact groups.
pub fn translation_operator(group: &Group, g: usize, side: Translation) -> Result<CMatrix> {
    if !group.is_exact() {
        return Err(Error::Invalid("translations do not preserve a truncated enumeration".into()));
    }
    if g >= group.len() {
        return Err(Error::Invalid(format!("element {g} outside the enumeration")));
    }
    let n = group.len();
    let mut out = CMatrix::zeros(n, n);
    let ge = group.element(g);
    let g_inv = group.inverse(ge);
    for y in 0..n {
        let x = match side {
            Translation::Left => group.multiply(ge, group.element(y)),
            Translation::Right => group.multiply(group.element(y), &g_inv),
        };
        let x = group.index_of(&x).expect("exact groups are closed");
        out[(x, y)] = linalg::ONE;
    }
    Ok(out)
}

/// `max_A ‖U P(A) U* − P(U A U*)‖_max` over `samples` seeded random `A`, with
/// `P` the unphased lift of the walk on `walk` side and `U` the translation by
/// `g` on `translation` side.
pub fn equivariance_residual(
    group: &Group,
    mu: &GroupMeasure,
    walk: WalkSide,
    translation: Translation,
    g: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let tol = Tolerances::default();
    let spec = EntangledSpec::unphased(walk_matrix(group, mu, walk, &tol)?);
    let u = translation_operator(group, g, translation)?;
    let u_adj = u.adjoint();
    let mut rng = sampling::rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = sampling::complex_matrix(&mut rng, group.len());
        let lhs = &u * spec.apply(&a)? * &u_adj;
        let rhs = spec.apply(&(&u * &a * &u_adj))?;
        worst = worst.max(linalg::max_abs_diff(&lhs, &rhs));
    }
    Ok(worst)
}

/// `{kind, params, generators?, measure: [[word, weight], …], side?}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpecJson {
    pub kind: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub generators: Option<Vec<String>>,
    pub measure: Vec<(String, f64)>,
    #[serde(default)]
    pub side: Option<WalkSide>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrderParams {
    n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FreeParams {
    rank: usize,
    radius: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeParams {
    dim: usize,
    window: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableParams {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
}

/// A parsed group specification.
#[derive(Debug, Clone)]
pub struct GroupInput {
    pub group: Group,
    pub measure: GroupMeasure,
    pub side: WalkSide,
}

fn params<T: serde::de::DeserializeOwned>(kind: &str, value: serde_json::Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Parse(format!("params for `{kind}`: {e}")))
}

pub fn parse_group_spec(text: &str) -> Result<GroupInput> {
    let raw: GroupSpecJson = serde_json::from_str(text).map_err(|e| Error::Parse(format!("group spec: {e}")))?;
    let group = match raw.kind.as_str() {
        "cyclic" => Group::cyclic(params::<OrderParams>("cyclic", raw.params)?.n)?,
        "dihedral" => Group::dihedral(params::<OrderParams>("dihedral", raw.params)?.n)?,
        "free" => {
            let p: FreeParams = params("free", raw.params)?;
            Group::free(p.rank, p.radius)?
        }
        "lattice" => {
            let p: LatticeParams = params("lattice", raw.params)?;
            Group::lattice(p.dim, p.window)?
        }
        "table" => {
            let p: TableParams = params("table", raw.params)?;
            Group::from_table(p.labels, p.table)?
        }
        other => return Err(Error::Parse(format!("unknown group kind `{other}`"))),
    };
    let group = match raw.generators {
        Some(names) => group.with_generators(&names)?,
        None => group,
    };
    let measure = GroupMeasure::from_words(&group, &raw.measure)?;
    Ok(GroupInput { group, measure, side: raw.side.unwrap_or(WalkSide::Right) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn uniform_pm(group: &Group) -> GroupMeasure {
        GroupMeasure::from_words(group, &[("a".into(), 0.5), ("A".into(), 0.5)]).unwrap()
    }

    #[test]
    fn cyclic_enumeration_and_circulant() {
        let g = Group::cyclic(3).unwrap();
        assert_eq!(g.labels(), &["e", "a", "A"]);
        let pi = walk_matrix(&g, &uniform_pm(&g), WalkSide::Right, &tol()).unwrap();
        // element order e, a, A = 0, 1, 2
        let expected = [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];
        for (i, row) in expected.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(pi.get(i, j), v);
            }
        }
        assert!(double_stochastic_check(&pi, 1e-10));
    }

    #[test]
    fn delta_identity_walk_is_identity() {
        for g in [Group::cyclic(5).unwrap(), Group::dihedral(4).unwrap()] {
            let pi = walk_matrix(&g, &GroupMeasure::delta_identity(&g), WalkSide::Left, &tol()).unwrap();
            assert_eq!(pi.entries(), &DMatrix::identity(g.len(), g.len()));
        }
    }

    #[test]
    fn free_ball_boundary_deficiency() {
        let g = Group::free(2, 3).unwrap();
        assert_eq!(g.len(), 53);
        let mu = GroupMeasure::uniform_on_generators(&g).unwrap();
        let pi = walk_matrix(&g, &mu, WalkSide::Right, &tol()).unwrap();
        for (i, label) in g.labels().iter().enumerate() {
            let expected = if label.len() == 3 { 0.75 } else { 0.0 };
            assert!((pi.row_deficiency()[i] - expected).abs() < 1e-15, "{label}");
        }
        assert!(!double_stochastic_check(&pi, 1e-10));
        assert!(translation_operator(&g, 1, Translation::Left).is_err());
    }

    #[test]
    fn nonuniform_cyclic_is_doubly_stochastic() {
        let g = Group::cyclic(4).unwrap();
        let mu = GroupMeasure::from_words(&g, &[("e".into(), 0.1), ("a".into(), 0.6), ("aa".into(), 0.3)]).unwrap();
        for side in [WalkSide::Right, WalkSide::Left] {
            assert!(double_stochastic_check(&walk_matrix(&g, &mu, side, &tol()).unwrap(), 1e-10));
        }
        let generic = StochasticMatrix::from_rows(&[vec![0.9, 0.1], vec![0.4, 0.6]]).unwrap();
        assert!(!double_stochastic_check(&generic, 1e-10));
    }

    #[test]
    fn dihedral_left_regular_representation() {
        let g = Group::dihedral(4).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.axiom_violations(200, 1), 0);
        let mut rng = sampling::rng(4);
        for _ in 0..10 {
            let (a, b) = (rng.gen_range(0..8), rng.gen_range(0..8));
            let ab = g.index_of(&g.multiply(g.element(a), g.element(b))).unwrap();
            for side in [Translation::Left, Translation::Right] {
                let la = translation_operator(&g, a, side).unwrap();
                let lb = translation_operator(&g, b, side).unwrap();
                let lab = translation_operator(&g, ab, side).unwrap();
                assert_eq!(&la * &lb, lab);
            }
        }
    }

    #[test]
    fn cyclic_shift_and_identity_translation() {
        let g = Group::cyclic(3).unwrap();
        let shift = translation_operator(&g, 1, Translation::Left).unwrap();
        // a·e = a, a·a = A, a·A = e
        assert_eq!(shift[(1, 0)], linalg::ONE);
        assert_eq!(shift[(2, 1)], linalg::ONE);
        assert_eq!(shift[(0, 2)], linalg::ONE);
        assert_eq!(translation_operator(&g, 0, Translation::Right).unwrap(), linalg::identity(3));
    }

    #[test]
    fn equivariance_pairings() {
        let g = Group::dihedral(3).unwrap();
        let mu = GroupMeasure::random(&g, 7);
        for elem in 0..g.len() {
            let right = equivariance_residual(&g, &mu, WalkSide::Right, Translation::Left, elem, 5, 1).unwrap();
            let left = equivariance_residual(&g, &mu, WalkSide::Left, Translation::Right, elem, 5, 1).unwrap();
            assert!(right < 1e-10 && left < 1e-10);
        }
        assert_eq!(equivariance_residual(&g, &mu, WalkSide::Left, Translation::Left, 0, 5, 1).unwrap(), 0.0);
        let wrong = (0..g.len())
            .map(|e| equivariance_residual(&g, &mu, WalkSide::Left, Translation::Left, e, 5, 1).unwrap())
            .fold(0.0, f64::max);
        assert!(wrong > 1e-2);
    }

    #[test]
    fn symmetric_measure_gives_symmetric_walk() {
        let g = Group::dihedral(5).unwrap();
        let mu = GroupMeasure::from_words(&g, &[("r".into(), 0.3), ("R".into(), 0.3), ("s".into(), 0.4)]).unwrap();
        assert!(mu.is_symmetric(&g));
        let pi = walk_matrix(&g, &mu, WalkSide::Right, &tol()).unwrap();
        assert_eq!(pi.entries(), &pi.entries().transpose());
        let skew = GroupMeasure::from_words(&g, &[("r".into(), 1.0)]).unwrap();
        assert!(!skew.is_symmetric(&g));
    }

    #[test]
    fn free_words_reduce() {
        let g = Group::free(2, 2).unwrap();
        assert_eq!(g.evaluate_word("aA").unwrap(), g.identity());
        assert_eq!(g.evaluate_word("ab B").unwrap(), g.evaluate_word("a").unwrap());
        assert!(g.evaluate_word("x").is_err());
        let far = GroupMeasure::from_words(&g, &[("aaa".into(), 1.0)]);
        assert!(far.is_err());
        assert_eq!(g.labels()[..5], ["e", "a", "A", "b", "B"]);
    }

    #[test]
    fn lattice_window() {
        let g = Group::lattice(2, 2).unwrap();
        assert_eq!(g.len(), 13);
        let mu = GroupMeasure::uniform_on_generators(&g).unwrap();
        let pi = walk_matrix(&g, &mu, WalkSide::Right, &tol()).unwrap();
        assert_eq!(pi.row_deficiency()[0], 0.0);
        assert!(pi.row_deficiency().iter().any(|&d| d > 0.0));
    }

    #[test]
    fn table_groups() {
        // Z2 x Z2
        let labels = vec!["1".into(), "x".into(), "y".into(), "xy".into()];
        let table = vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![2, 3, 0, 1], vec![3, 2, 1, 0]];
        let g = Group::from_table(labels, table).unwrap();
        assert_eq!(g.labels(), &["1", "x", "y", "xy"]);
        assert_eq!(g.axiom_violations(50, 0), 0);
        assert!(Group::from_table(vec!["a".into(), "b".into()], vec![vec![0, 0], vec![0, 1]]).is_err());
        assert!(Group::from_table(vec!["a".into()], vec![vec![3]]).is_err());
    }

    #[test]
    fn parse_spec_json() {
        let input = parse_group_spec(
            r#"{"kind":"cyclic","params":{"n":6},"measure":[["a",0.25],["A",0.25],["aaa",0.5]],"side":"left"}"#,
        )
        .unwrap();
        assert_eq!(input.group.len(), 6);
        assert_eq!(input.side, WalkSide::Left);
        let free = parse_group_spec(
            r#"{"kind":"free","params":{"rank":2,"radius":1},"generators":["a","A"],"measure":[["a",1.0]]}"#,
        )
        .unwrap();
        assert_eq!(free.group.len(), 3);
        assert!(parse_group_spec(r#"{"kind":"free","params":{"rank":2},"measure":[]}"#).is_err());
        assert!(parse_group_spec(r#"{"kind":"torus","params":{},"measure":[]}"#).is_err());
        assert!(parse_group_spec(r#"{"kind":"cyclic","params":{"n":3},"measure":[["a",0.6]]}"#).is_err());
    }
}

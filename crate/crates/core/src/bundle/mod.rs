//! The cotangent bundle over an atlas: transition maps, sections, their
//! norms, and comparison maps.

mod compare;

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::charts::{ball_vertices, differential, dot, Chart, Differential};
use crate::error::{Error, Result};
use crate::mmspace::{MetricGraph, VertexFunction};
use crate::scalar::{rational_pow, Rational, Scalar};
use crate::solver::linalg;

pub use compare::{cheeger_compare, pq_compose, pq_map, CheegerLocal, CheegerReport, CheegerVerdict, PqLocal, PqMap};

pub type Matrix = Vec<Vec<Rational>>;

pub(crate) fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub(crate) fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Matrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).fold(Rational::zero(), |acc, (x, r)| acc + x * &r[j]))
                .collect()
        })
        .collect()
}

pub(crate) fn transpose(m: &[Vec<Rational>]) -> Matrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub(crate) fn max_entry_gap(a: &Matrix, b: &Matrix) -> Rational {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs_val())
        .fold(Rational::zero(), Scalar::max_of)
}

/// The fiber map between two charts at one vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTransition {
    pub vertex: usize,
    /// Sends a co-vector in source coordinates to target coordinates.
    pub matrix: Matrix,
    /// Largest fit residual among the target coordinates' differentials.
    pub residual: Rational,
    /// Exact unit-ball comparison; `None` for approximate maps.
    pub isometric: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMap {
    pub from: usize,
    pub to: usize,
    pub local: Vec<LocalTransition>,
}

impl TransitionMap {
    pub fn at(&self, vertex: usize) -> Option<&LocalTransition> {
        self.local
            .binary_search_by(|l| l.vertex.cmp(&vertex))
            .ok()
            .map(|i| &self.local[i])
    }

    pub fn is_exact(&self) -> bool {
        self.local.iter().all(|l| l.residual.is_zero())
    }
}

/// Target coordinates differentiated in the source chart.
pub(crate) fn coordinate_differentials(graph: &MetricGraph, source: &Chart, target: &Chart) -> Vec<Differential> {
    target
        .phi
        .components
        .iter()
        .map(|c| differential(graph, c, source))
        .collect()
}

/// `M = (Dᵀ)^{-1}` where D has rows `d^{source} φ^{target}_k` at x.
pub(crate) fn local_transition(
    graph: &MetricGraph,
    source: &Chart,
    target: &Chart,
    diffs: &[Differential],
    x: usize,
) -> Result<LocalTransition> {
    if source.dim() != target.dim() {
        return Err(Error::Chart(format!(
            "charts of dimensions {} and {} overlap at {}",
            source.dim(),
            target.dim(),
            graph.vertex(x).id
        )));
    }
    let rows: Vec<_> = diffs.iter().map(|d| d.get(x).expect("source chart covers x")).collect();
    let d: Matrix = rows.iter().map(|l| l.xi.clone()).collect();
    let residual = rows.iter().map(|l| l.residual.clone()).fold(Rational::zero(), Scalar::max_of);
    let matrix = linalg::inverse(&transpose(&d)).ok_or_else(|| {
        Error::Chart(format!("transition between charts is singular at {}", graph.vertex(x).id))
    })?;
    let isometric = residual.is_zero().then(|| is_isometry(source, target, &matrix, x));
    Ok(LocalTransition {
        vertex: x,
        matrix,
        residual,
        isometric,
    })
}

/// `Φ_target(Mξ) = Φ_source(ξ)`, compared on the vertices of both unit balls.
fn is_isometry(source: &Chart, target: &Chart, m: &Matrix, x: usize) -> bool {
    let one = Rational::one();
    let (Some(src), Some(dst)) = (
        ball_vertices(source.gradient.exact_directions(x), source.dim()),
        ball_vertices(target.gradient.exact_directions(x), target.dim()),
    ) else {
        return false;
    };
    let Some(inv) = linalg::inverse(m) else { return false };
    src.iter().all(|v| target.gradient.eval_exact(x, &mat_vec(m, v)) == one)
        && dst.iter().all(|v| source.gradient.eval_exact(x, &mat_vec(&inv, v)) == one)
}

pub fn transition(graph: &MetricGraph, charts: &[Chart], from: usize, to: usize) -> Result<TransitionMap> {
    let (a, b) = (&charts[from], &charts[to]);
    let overlap: Vec<usize> = a.locations.iter().copied().filter(|&x| b.contains(x)).collect();
    let diffs = coordinate_differentials(graph, a, b);
    let local = overlap
        .into_iter()
        .map(|x| local_transition(graph, a, b, &diffs, x))
        .collect::<Result<_>>()?;
    Ok(TransitionMap { from, to, local })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CocycleDefect {
    pub charts: (usize, usize, usize),
    pub vertex: usize,
    /// Largest entry of `M_jk M_ij − M_ik`.
    pub defect: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transitions {
    /// Every ordered pair of distinct overlapping charts.
    pub maps: Vec<TransitionMap>,
    pub cocycle: Vec<CocycleDefect>,
}

impl Transitions {
    pub fn get(&self, from: usize, to: usize) -> Option<&TransitionMap> {
        self.maps.iter().find(|m| m.from == from && m.to == to)
    }

    pub fn max_cocycle_defect(&self) -> f64 {
        self.cocycle.iter().map(|c| c.defect.to_f64()).fold(0.0, f64::max)
    }

    pub fn all_isometric(&self) -> bool {
        self.maps.iter().flat_map(|m| &m.local).all(|l| l.isometric != Some(false))
    }
}

/// All transition maps between overlapping charts, with the cocycle identity
/// checked on every triple overlap.
pub fn transitions(graph: &MetricGraph, charts: &[Chart]) -> Result<Transitions> {
    let n = charts.len();
    let mut maps = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && charts[i].locations.iter().any(|&x| charts[j].contains(x)) {
                maps.push(transition(graph, charts, i, j)?);
            }
        }
    }
    let find = |i: usize, j: usize| maps.iter().find(|m: &&TransitionMap| m.from == i && m.to == j);
    let mut cocycle = Vec::new();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for k in (0..n).filter(|&k| k != i && k != j) {
                let (Some(ij), Some(jk), Some(ik)) = (find(i, j), find(j, k), find(i, k)) else { continue };
                for l in &ij.local {
                    let (Some(b), Some(c)) = (jk.at(l.vertex), ik.at(l.vertex)) else { continue };
                    cocycle.push(CocycleDefect {
                        charts: (i, j, k),
                        vertex: l.vertex,
                        defect: max_entry_gap(&mat_mul(&b.matrix, &l.matrix), &c.matrix),
                    });
                }
            }
        }
    }
    Ok(Transitions { maps, cocycle })
}

/// A co-vector per (vertex, covering chart).
#[derive(Clone, Debug, PartialEq)]
pub struct SectionEntry {
    pub vertex: usize,
    pub chart: usize,
    pub xi: Vec<Rational>,
    pub residual: Rational,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Section {
    /// Sorted by (vertex, chart).
    pub entries: Vec<SectionEntry>,
}

impl Section {
    pub fn zero(charts: &[Chart]) -> Self {
        let mut entries: Vec<SectionEntry> = charts
            .iter()
            .enumerate()
            .flat_map(|(c, ch)| {
                ch.locations.iter().map(move |&x| SectionEntry {
                    vertex: x,
                    chart: c,
                    xi: vec![Rational::zero(); ch.dim()],
                    residual: Rational::zero(),
                })
            })
            .collect();
        entries.sort_by_key(|e| (e.vertex, e.chart));
        Self { entries }
    }

    /// Fiber dimension per covered vertex.
    pub fn fiber_dimensions(&self) -> BTreeMap<usize, usize> {
        self.entries.iter().map(|e| (e.vertex, e.xi.len())).collect()
    }

    /// Vertices whose entries come from an inexact fit.
    pub fn flagged(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .entries
            .iter()
            .filter(|e| !e.residual.is_zero())
            .map(|e| e.vertex)
            .collect();
        v.dedup();
        v
    }

    /// `|ω(x)|_x` from the first chart covering each vertex.
    pub fn pointwise_norms(&self, charts: &[Chart]) -> BTreeMap<usize, Rational> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            out.entry(e.vertex)
                .or_insert_with(|| charts[e.chart].gradient.eval_exact(e.vertex, &e.xi));
        }
        out
    }
}

/// `df` chart by chart.
pub fn differential_section(graph: &MetricGraph, f: &VertexFunction, charts: &[Chart]) -> Section {
    let mut entries: Vec<SectionEntry> = charts
        .iter()
        .enumerate()
        .flat_map(|(c, ch)| {
            differential(graph, f, ch).local.into_iter().map(move |l| SectionEntry {
                vertex: l.vertex,
                chart: c,
                xi: l.xi,
                residual: l.residual,
            })
        })
        .collect();
    entries.sort_by_key(|e| (e.vertex, e.chart));
    Section { entries }
}

/// `M_ij ω_i = ω_j` wherever both entries and the transition are exact.
pub fn check_compatible(graph: &MetricGraph, section: &Section, trans: &Transitions) -> Result<()> {
    let by_vertex = section.entries.chunk_by(|a, b| a.vertex == b.vertex);
    for group in by_vertex {
        for a in group {
            for b in group.iter().filter(|b| b.chart != a.chart) {
                let Some(l) = trans.get(a.chart, b.chart).and_then(|m| m.at(a.vertex)) else {
                    return Err(Error::IncompatibleSection {
                        location: graph.vertex(a.vertex).id.clone(),
                        msg: format!("no transition from chart {} to chart {}", a.chart, b.chart),
                    });
                };
                if !(l.residual.is_zero() && a.residual.is_zero() && b.residual.is_zero()) {
                    continue;
                }
                if mat_vec(&l.matrix, &a.xi) != b.xi {
                    return Err(Error::IncompatibleSection {
                        location: graph.vertex(a.vertex).id.clone(),
                        msg: format!("chart {} and chart {} co-vectors disagree", a.chart, b.chart),
                    });
                }
            }
        }
    }
    Ok(())
}

/// `(Σ_x μ(x)·|ω(x)|_x^p)^{1/p}` over vertex stars; checks compatibility first.
pub fn section_norm(graph: &MetricGraph, charts: &[Chart], section: &Section, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("exponent p = {p} must lie in [1, ∞)")));
    }
    check_compatible(graph, section, &transitions(graph, charts)?)?;
    let sum: f64 = section
        .pointwise_norms(charts)
        .iter()
        .map(|(&x, n)| graph.star_measure(x) * n.to_f64().powf(p))
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// `Σ_{x ∈ set} μ(x)·|ω(x)|_x^p` in exact arithmetic for integer p.
pub fn section_power_sum(
    graph: &MetricGraph,
    charts: &[Chart],
    section: &Section,
    p: u32,
    set: impl Fn(usize) -> bool,
) -> Rational {
    section
        .pointwise_norms(charts)
        .iter()
        .filter(|(x, _)| set(**x))
        .fold(Rational::zero(), |acc, (&x, n)| {
            acc + Rational::from_f64(graph.star_measure(x)) * rational_pow(n, p, 1).expect("integer power")
        })
}

#[cfg(test)]
mod tests;

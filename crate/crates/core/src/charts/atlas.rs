use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{canonical_gradient, independence_index, CanonicalGradient, ChartCandidate};
use crate::error::{Error, Result};
use crate::mmspace::{MetricGraph, VertexFunction};
use crate::scalar::Rational;
use crate::solver::linalg;

/// A chart on vertex stars: Φ^x is a norm at every location.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub phi: ChartCandidate,
    /// Vertices, sorted.
    pub locations: Vec<usize>,
    pub gradient: CanonicalGradient,
    /// `I(φ)` per vertex (zero off the chart's locations).
    pub index: Vec<f64>,
}

impl Chart {
    pub fn new(graph: &MetricGraph, phi: ChartCandidate, mut locations: Vec<usize>) -> Result<Self> {
        if phi.dim() == 0 {
            return Err(Error::Chart("a chart map needs at least one component".into()));
        }
        locations.sort_unstable();
        locations.dedup();
        let gradient = canonical_gradient(graph, &phi, None);
        if let Some(&x) = locations.iter().find(|&&x| !gradient.is_norm(x)) {
            return Err(Error::Chart(format!(
                "φ = ({}) is not independent at {}: rank {} < {}",
                phi.names.join(", "),
                graph.vertex(x).id,
                gradient.rank(x),
                phi.dim()
            )));
        }
        let index = independence_index(&gradient);
        Ok(Self {
            phi,
            locations,
            gradient,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.locations.binary_search(&v).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionWarning {
    pub vertex: usize,
    pub achieved: usize,
    pub ceiling: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atlas {
    pub p: f64,
    pub charts: Vec<Chart>,
    /// Exceptional stars, the 0-dimensional chart.
    pub zero: Vec<usize>,
    /// Non-exceptional stars no pool map is independent at.
    pub uncovered: Vec<usize>,
    /// Per-vertex dimension ceiling.
    pub ceiling: Vec<usize>,
    /// Stars whose chart dimension falls short of the ceiling.
    pub warnings: Vec<DimensionWarning>,
}

impl Atlas {
    /// Chart dimensions, with 0 for a nonempty zero chart.
    pub fn dimensions(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.charts.iter().map(Chart::dim).collect();
        if !self.zero.is_empty() {
            d.push(0);
        }
        d
    }

    pub fn chart_of(&self, v: usize) -> Option<&Chart> {
        self.charts.iter().find(|c| c.contains(v))
    }

    pub fn dimension_at(&self, v: usize) -> usize {
        self.chart_of(v).map_or(0, Chart::dim)
    }
}

/// Rank of the σ-positive incident directions in ambient coordinates, or the
/// σ-positive degree when the graph has no positions.
pub fn dimension_ceiling(graph: &MetricGraph) -> Vec<usize> {
    (0..graph.vertex_count())
        .map(|v| {
            let edges: BTreeSet<usize> = graph
                .incident(v)
                .iter()
                .copied()
                .filter(|&e| !graph.edge(e).is_null() && graph.edge(e).u != graph.edge(e).v)
                .collect();
            if graph.has_positions() {
                let rows: Vec<Vec<Rational>> = edges
                    .iter()
                    .map(|&e| {
                        let (a, b) = (graph.position(graph.edge(e).u).unwrap(), graph.position(graph.edge(e).v).unwrap());
                        vec![
                            crate::scalar::rational_from_f64(b[0] - a[0]),
                            crate::scalar::rational_from_f64(b[1] - a[1]),
                        ]
                    })
                    .collect();
                linalg::rank(&rows)
            } else {
                edges.len()
            }
        })
        .collect()
}

/// Greedy cover in descending dimension: the pool subset independent at the
/// most remaining stars becomes a chart, until no subset of that size helps.
pub fn build_atlas(graph: &MetricGraph, p: f64, pool: &[(String, VertexFunction)]) -> Result<Atlas> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("exponent p = {p} must lie in [1, ∞)")));
    }
    if pool.is_empty() {
        return Err(Error::Chart("the candidate pool is empty".into()));
    }
    let ceiling = dimension_ceiling(graph);
    let (zero, mut remaining): (Vec<usize>, Vec<usize>) = (0..graph.vertex_count())
        .partition(|&v| graph.is_exceptional(crate::mmspace::Location::Star(v)));
    let mut charts = Vec::new();
    let top = pool.len().min(ceiling.iter().copied().max().unwrap_or(0));
    for n in (1..=top).rev() {
        let subsets = subsets_of(pool.len(), n);
        loop {
            if remaining.is_empty() {
                break;
            }
            let scored: Vec<(usize, Vec<usize>)> = subsets
                .par_iter()
                .enumerate()
                .map(|(i, s)| {
                    let phi = candidate(pool, s);
                    let cg = canonical_gradient(graph, &phi, None);
                    (i, remaining.iter().copied().filter(|&x| cg.is_norm(x)).collect())
                })
                .collect();
            // first subset among the largest covers
            let Some((i, cover)) = scored
                .into_iter()
                .filter(|(_, c): &(usize, Vec<usize>)| !c.is_empty())
                .fold(None, |best: Option<(usize, Vec<usize>)>, cur| match &best {
                    Some(b) if b.1.len() >= cur.1.len() => best,
                    _ => Some(cur),
                })
            else {
                break;
            };
            remaining.retain(|x| cover.binary_search(x).is_err());
            charts.push(Chart::new(graph, candidate(pool, &subsets[i]), cover)?);
        }
    }
    let mut atlas = Atlas {
        p,
        charts,
        zero,
        uncovered: remaining,
        ceiling,
        warnings: Vec::new(),
    };
    atlas.warnings = (0..graph.vertex_count())
        .filter(|v| atlas.zero.binary_search(v).is_err())
        .filter_map(|v| {
            let achieved = atlas.dimension_at(v);
            (achieved < atlas.ceiling[v]).then_some(DimensionWarning {
                vertex: v,
                achieved,
                ceiling: atlas.ceiling[v],
            })
        })
        .collect();
    Ok(atlas)
}

fn candidate(pool: &[(String, VertexFunction)], subset: &[usize]) -> ChartCandidate {
    ChartCandidate {
        names: subset.iter().map(|&i| pool[i].0.clone()).collect(),
        components: subset.iter().map(|&i| pool[i].1.clone()).collect(),
    }
}

fn subsets_of(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

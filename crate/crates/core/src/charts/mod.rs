//! Canonical gradients of vector-valued maps, p-independence, charts,
//! atlases and differentials over vertex stars.

mod atlas;
mod calculus;
mod differential;
mod index;
mod io;

use crate::error::{Error, Result};
use crate::mmspace::{Curve, CurveFamily, Location, MetricGraph, Step, VertexFunction};
use crate::plans::{barycenter, Plan};
use crate::scalar::{Rational, Scalar};
use crate::solver::linalg;

pub use atlas::{build_atlas, dimension_ceiling, Atlas, Chart, DimensionWarning};
pub use calculus::{chain_rule, leibniz, locality, ChainRuleCheck, LeibnizCheck, LocalityCheck, VertexMap};
pub use differential::{differential, Differential, LocalDifferential};
pub(crate) use differential::chebyshev;
pub use index::{ball_vertices, independence_index, polytope_radius};
pub use io::{atlas_to_value, chart_from_value, chart_to_value};

/// A map φ: V → R^N given by named components.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartCandidate {
    pub names: Vec<String>,
    pub components: Vec<VertexFunction>,
}

impl ChartCandidate {
    pub fn new(names: Vec<String>, components: Vec<VertexFunction>) -> Result<Self> {
        if names.len() != components.len() {
            return Err(Error::Chart(format!(
                "{} names for {} components",
                names.len(),
                components.len()
            )));
        }
        Ok(Self { names, components })
    }

    /// φ = (x, y) from vertex positions.
    pub fn coordinates(graph: &MetricGraph) -> Result<Self> {
        Self::new(
            vec!["x".into(), "y".into()],
            vec![
                VertexFunction::from_positions(graph, |x, _| x)?,
                VertexFunction::from_positions(graph, |_, y| y)?,
            ],
        )
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn value(&self, v: usize) -> Vec<f64> {
        self.components.iter().map(|c| c.value(v)).collect()
    }

    /// `Δφ(e)`.
    pub fn difference<T: Scalar>(&self, graph: &MetricGraph, e: usize) -> Vec<T> {
        self.components.iter().map(|c| c.difference::<T>(graph, e)).collect()
    }

    /// `w_e = Δφ(e)/ℓ(e)`.
    pub fn direction<T: Scalar>(&self, graph: &MetricGraph, e: usize) -> Vec<T> {
        self.components.iter().map(|c| c.slope::<T>(graph, e)).collect()
    }

    /// `w_e` with e oriented away from x.
    pub fn direction_from<T: Scalar>(&self, graph: &MetricGraph, x: usize, e: usize) -> Vec<T> {
        self.components.iter().map(|c| outward_slope::<T>(graph, c, x, e)).collect()
    }

    /// `ξ∘φ`.
    pub fn compose(&self, graph: &MetricGraph, xi: &[f64]) -> Result<VertexFunction> {
        let values = (0..graph.vertex_count())
            .map(|v| self.components.iter().zip(xi).map(|(c, a)| a * c.value(v)).sum())
            .collect();
        VertexFunction::new(graph, values)
    }
}

/// Direction sets `W_x` over vertex stars, edges oriented away from x.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalGradient {
    pub dim: usize,
    /// Incident edges contributing to `W_x`, per vertex.
    pub edges: Vec<Vec<usize>>,
    /// `w_e` for the edges above, per vertex.
    pub directions: Vec<Vec<Vec<f64>>>,
    exact: Vec<Vec<Vec<Rational>>>,
}

impl CanonicalGradient {
    /// `Φ^x(ξ) = max_{w ∈ W_x} |ξ·w|`.
    pub fn eval(&self, x: usize, xi: &[f64]) -> f64 {
        self.directions[x]
            .iter()
            .map(|w| w.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    pub fn eval_exact(&self, x: usize, xi: &[Rational]) -> Rational {
        self.exact[x]
            .iter()
            .map(|w| dot(w, xi).abs_val())
            .fold(Rational::from_integer(0.into()), Scalar::max_of)
    }

    pub fn exact_directions(&self, x: usize) -> &[Vec<Rational>] {
        &self.exact[x]
    }

    /// Exact rank of `W_x`; Φ^x is a norm iff this equals the dimension.
    pub fn rank(&self, x: usize) -> usize {
        linalg::rank(&self.exact[x])
    }

    pub fn is_norm(&self, x: usize) -> bool {
        self.dim > 0 && self.rank(x) == self.dim
    }

    /// Lipschitz constant of `ξ ↦ Φ^x(ξ)`: `Σ_k max_e |Δφ_k(e)|/ℓ(e)`.
    pub fn lipschitz(&self, x: usize) -> f64 {
        (0..self.dim)
            .map(|k| self.directions[x].iter().map(|w| w[k].abs()).fold(0.0, f64::max))
            .sum()
    }
}

/// `(f(y) − f(x))/ℓ(e)` for the edge e joining x to y.
pub(crate) fn outward_slope<T: Scalar>(graph: &MetricGraph, f: &VertexFunction, x: usize, e: usize) -> T {
    let s = f.slope::<T>(graph, e);
    if graph.edge(e).u == x {
        s
    } else {
        -s
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// `W_x` over σ-positive incident edges; with a plan, only over edges its
/// barycenter charges.
pub fn canonical_gradient(graph: &MetricGraph, phi: &ChartCandidate, plan: Option<&Plan>) -> CanonicalGradient {
    let charged: Option<Vec<bool>> =
        plan.map(|p| barycenter(graph, p).mass.iter().map(|m| *m > 0.0).collect());
    let mut edges = Vec::with_capacity(graph.vertex_count());
    let mut directions = Vec::with_capacity(graph.vertex_count());
    let mut exact = Vec::with_capacity(graph.vertex_count());
    for v in 0..graph.vertex_count() {
        let mut es: Vec<usize> = graph
            .incident(v)
            .iter()
            .copied()
            .filter(|&e| !graph.edge(e).is_null() && charged.as_ref().is_none_or(|c| c[e]))
            .collect();
        es.sort_unstable();
        es.dedup();
        directions.push(es.iter().map(|&e| phi.direction_from::<f64>(graph, v, e)).collect());
        exact.push(es.iter().map(|&e| phi.direction_from::<Rational>(graph, v, e)).collect());
        edges.push(es);
    }
    CanonicalGradient {
        dim: phi.dim(),
        edges,
        directions,
        exact,
    }
}

fn edges_meeting(graph: &MetricGraph, set: &[Location]) -> Vec<usize> {
    let mut out: Vec<usize> = set
        .iter()
        .flat_map(|&l| match l {
            Location::Edge(e) => vec![e],
            Location::Star(v) => graph.incident(v).to_vec(),
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `(U, 0)` is a 0-dimensional chart iff every edge meeting U is σ-null.
pub fn zero_chart_check(graph: &MetricGraph, set: &[Location]) -> bool {
    edges_meeting(graph, set).iter().all(|&e| graph.edge(e).is_null())
}

/// One-step curves over the edges meeting U. Every curve spending positive
/// time in U contains one of them, so this family and `Γ_U^+` have zero
/// modulus together.
pub fn entering_family(graph: &MetricGraph, set: &[Location]) -> Result<CurveFamily> {
    let curves = edges_meeting(graph, set)
        .into_iter()
        .map(|e| Curve::new(graph, vec![Step::new(e, true)]))
        .collect::<Result<Vec<_>>>()?;
    CurveFamily::explicit(curves)
}

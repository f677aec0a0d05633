//! Upper gradients: the minimal weak upper gradient, η-upper gradients,
//! representing plans and the falsification search.

mod productive;
mod representing;
mod violating;
mod young;

use crate::mmspace::{Granularity, Location, MetricGraph, VertexFunction};
use crate::plans::{disintegrate, Disintegration, Plan};
use crate::scalar::Scalar;

pub use productive::{epsilon_productive_set, ProductiveSet, ProductiveVerdict};
pub use representing::{representing_plan, RatioCheck, Representation, RepresentingOptions};
pub use violating::{violating_plan, ViolationOptions, ViolationSearch};
pub use young::{young_delta, young_delta_certified, young_h};

/// A nonnegative function on locations.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakGradient<T = f64> {
    pub granularity: Granularity,
    pub values: Vec<T>,
    /// Locations every curve through which is exceptional; the value there is 0.
    pub exceptional: Vec<bool>,
}

impl<T: Scalar> WeakGradient<T> {
    pub fn zeros(graph: &MetricGraph, gran: Granularity) -> Self {
        let locs = graph.locations(gran);
        Self {
            granularity: gran,
            values: vec![T::zero(); locs.len()],
            exceptional: locs.iter().map(|&l| graph.is_exceptional(l)).collect(),
        }
    }

    pub fn at(&self, loc: Location) -> &T {
        &self.values[loc.index()]
    }

    /// Per-edge values; stars are averaged over the two endpoints.
    pub fn on_edges(&self, graph: &MetricGraph) -> Vec<T> {
        match self.granularity {
            Granularity::EdgePoint => self.values.clone(),
            Granularity::VertexStar => {
                let half = T::one() / (T::one() + T::one());
                graph
                    .edges()
                    .iter()
                    .map(|e| (self.values[e.u].clone() + self.values[e.v].clone()) * half.clone())
                    .collect()
            }
        }
    }

    /// `{g > 0}`.
    pub fn support(&self) -> Vec<Location> {
        let wrap = |i| match self.granularity {
            Granularity::EdgePoint => Location::Edge(i),
            Granularity::VertexStar => Location::Star(i),
        };
        self.values
            .iter()
            .enumerate()
            .filter(|(_, g)| g.is_positive())
            .map(|(i, _)| wrap(i))
            .collect()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            granularity: self.granularity,
            values: self.values.iter().map(|g| g.clone() * c.clone()).collect(),
            exceptional: self.exceptional.clone(),
        }
    }

    pub fn to_f64(&self) -> WeakGradient<f64> {
        WeakGradient {
            granularity: self.granularity,
            values: self.values.iter().map(Scalar::to_f64).collect(),
            exceptional: self.exceptional.clone(),
        }
    }
}

/// `|Δf(e)|/ℓ(e)` on σ-positive edges and 0 on σ-null ones. At VertexStar
/// the value is the largest such slope over incident edges.
///
/// The exceptional curve families are the same for every p, so no exponent
/// is needed.
pub fn minimal_weak_gradient<T: Scalar>(graph: &MetricGraph, f: &VertexFunction, gran: Granularity) -> WeakGradient<T> {
    let edge_g: Vec<T> = (0..graph.edge_count())
        .map(|e| {
            if graph.edge(e).is_null() {
                T::zero()
            } else {
                f.slope::<T>(graph, e).abs_val()
            }
        })
        .collect();
    let mut out = WeakGradient::zeros(graph, gran);
    match gran {
        Granularity::EdgePoint => out.values = edge_g,
        Granularity::VertexStar => {
            for v in 0..graph.vertex_count() {
                out.values[v] = graph
                    .incident(v)
                    .iter()
                    .fold(T::zero(), |acc, &e| acc.max_of(edge_g[e].clone()));
            }
        }
    }
    out
}

/// Raw slope `max |Δf|/ℓ` over all incident edges, σ-null ones included.
pub fn local_slope<T: Scalar>(graph: &MetricGraph, f: &VertexFunction, loc: Location) -> T {
    let slope = |e: usize| f.slope::<T>(graph, e).abs_val();
    match loc {
        Location::Edge(e) => slope(e),
        Location::Star(v) => graph.incident(v).iter().fold(T::zero(), |acc, &e| acc.max_of(slope(e))),
    }
}

/// `g_η(x) = max |Δf(e)|/ℓ(e)` over the traversals charged by `π_x`.
pub fn eta_upper_gradient<T: Scalar>(graph: &MetricGraph, f: &VertexFunction, dis: &Disintegration<T>) -> WeakGradient<T> {
    let mut out = WeakGradient::zeros(graph, dis.granularity);
    for m in &dis.local {
        out.values[m.location.index()] = m
            .weights
            .iter()
            .filter(|(_, w)| w.is_positive())
            .fold(T::zero(), |acc, (t, _)| acc.max_of(f.slope::<T>(graph, t.edge).abs_val()));
    }
    out
}

/// [`eta_upper_gradient`] of the plan's own disintegration.
pub fn plan_upper_gradient<T: Scalar>(
    graph: &MetricGraph,
    f: &VertexFunction,
    plan: &Plan<T>,
    gran: Granularity,
) -> WeakGradient<T> {
    eta_upper_gradient(graph, f, &disintegrate(graph, plan, gran))
}

/// `(f∘γ)'_t/|γ'_t|` on a traversal: the edge slope, negated when the step
/// runs against the edge's orientation.
pub(crate) fn signed_ratio<T: Scalar>(graph: &MetricGraph, f: &VertexFunction, edge: usize, forward: bool) -> T {
    let s = f.slope::<T>(graph, edge);
    if forward {
        s
    } else {
        -s
    }
}

//! Disintegration of `dπ = |γ'| dt dη` along the evaluation map.
//!
//! Under constant speed, the time a curve spends on a step of edge e carries
//! π-mass `w·ℓ(e)`. Records are per traversal (atom, step), so integrands that
//! are constant on steps need no quadrature.

use std::collections::BTreeMap;

use super::Plan;
use crate::mmspace::{Granularity, Location, MetricGraph};
use crate::scalar::Scalar;

/// One step of one atom. `forward` is relative to the edge's canonical
/// orientation u → v.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Traversal {
    pub atom: usize,
    pub step: usize,
    pub edge: usize,
    pub forward: bool,
}

/// `π_x` at one location.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalMeasure<T = f64> {
    pub location: Location,
    /// `(e_*π)(x)`.
    pub total: T,
    /// Probability weights, in traversal order.
    pub weights: Vec<(Traversal, T)>,
}

impl<T: Scalar> LocalMeasure<T> {
    pub fn measure_of(&self, set: impl Fn(&Traversal) -> bool) -> T {
        self.weights
            .iter()
            .filter(|(t, _)| set(t))
            .fold(T::zero(), |acc, (_, w)| acc + w.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Disintegration<T = f64> {
    pub granularity: Granularity,
    /// Locations with positive mass, in canonical order.
    pub local: Vec<LocalMeasure<T>>,
}

impl<T: Scalar> Disintegration<T> {
    pub fn get(&self, loc: Location) -> Option<&LocalMeasure<T>> {
        self.local
            .binary_search_by(|m| m.location.index().cmp(&loc.index()))
            .ok()
            .map(|i| &self.local[i])
    }

    /// `Σ_x (e_*π)(x)·π_x(B)`, which equals `π(B)`.
    pub fn reconstruct(&self, set: impl Fn(&Traversal) -> bool) -> T {
        self.local
            .iter()
            .fold(T::zero(), |acc, m| acc + m.total.clone() * m.measure_of(&set))
    }
}

/// `π(B) = Σ_{(γ, step) ∈ B} w(γ)·ℓ(e_step)` computed directly from the plan.
pub fn plan_measure<T: Scalar>(graph: &MetricGraph, plan: &Plan<T>, set: impl Fn(&Traversal) -> bool) -> T {
    let mut acc = T::zero();
    for (i, a) in plan.atoms().iter().enumerate() {
        for (k, s) in a.curve.steps().iter().enumerate() {
            let t = Traversal {
                atom: i,
                step: k,
                edge: s.edge,
                forward: s.forward,
            };
            if set(&t) {
                acc = acc + a.weight.clone() * T::from_f64(graph.edge(s.edge).len);
            }
        }
    }
    acc
}

/// EdgePoint: each traversal of e gives mass `w·ℓ(e)` to e. VertexStar: half
/// of that to each endpoint star.
pub fn disintegrate<T: Scalar>(graph: &MetricGraph, plan: &Plan<T>, gran: Granularity) -> Disintegration<T> {
    let mut raw: BTreeMap<usize, BTreeMap<Traversal, T>> = BTreeMap::new();
    let half = T::one() / (T::one() + T::one());
    for (i, a) in plan.atoms().iter().enumerate() {
        for (k, s) in a.curve.steps().iter().enumerate() {
            let edge = graph.edge(s.edge);
            let t = Traversal {
                atom: i,
                step: k,
                edge: s.edge,
                forward: s.forward,
            };
            let m = a.weight.clone() * T::from_f64(edge.len);
            let targets: Vec<(usize, T)> = match gran {
                Granularity::EdgePoint => vec![(s.edge, m)],
                Granularity::VertexStar => {
                    let h = m * half.clone();
                    vec![(edge.u, h.clone()), (edge.v, h)]
                }
            };
            for (loc, w) in targets {
                let slot = raw.entry(loc).or_default().entry(t).or_insert_with(T::zero);
                *slot = slot.clone() + w;
            }
        }
    }
    let local = raw
        .into_iter()
        .filter_map(|(loc, ws)| {
            let total = ws.values().fold(T::zero(), |acc, w| acc + w.clone());
            if !total.is_positive() {
                return None;
            }
            let location = match gran {
                Granularity::EdgePoint => Location::Edge(loc),
                Granularity::VertexStar => Location::Star(loc),
            };
            let weights = ws.into_iter().map(|(t, w)| (t, w / total.clone())).collect();
            Some(LocalMeasure {
                location,
                total,
                weights,
            })
        })
        .collect();
    Disintegration {
        granularity: gran,
        local,
    }
}

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::graph::MetricGraph;

/// One traversal of an edge. `forward` means from `edge.u` to `edge.v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub edge: usize,
    pub forward: bool,
}

impl Step {
    pub fn new(edge: usize, forward: bool) -> Self {
        Self { edge, forward }
    }

    pub fn reversed(self) -> Self {
        Self {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

/// An oriented edge path, parametrized on [0,1] with constant speed equal to
/// its length. Constant curves cannot be represented.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Curve {
    steps: Vec<Step>,
    vertices: Vec<usize>,
}

impl Ord for Curve {
    fn cmp(&self, other: &Self) -> Ordering {
        self.vertices
            .cmp(&other.vertices)
            .then_with(|| self.steps.cmp(&other.steps))
    }
}

impl PartialOrd for Curve {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Curve {
    pub fn new(graph: &MetricGraph, steps: Vec<Step>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidCurve("a curve needs at least one step".into()));
        }
        let mut vertices = Vec::with_capacity(steps.len() + 1);
        for (k, s) in steps.iter().enumerate() {
            if s.edge >= graph.edge_count() {
                return Err(Error::InvalidCurve(format!("step {k}: unknown edge index {}", s.edge)));
            }
            let e = graph.edge(s.edge);
            let (from, to) = if s.forward { (e.u, e.v) } else { (e.v, e.u) };
            match vertices.last() {
                None => vertices.push(from),
                Some(&at) if at != from => {
                    return Err(Error::InvalidCurve(format!(
                        "step {k} ({}{}) starts at {} but the previous step ended at {}",
                        e.id,
                        if s.forward { "+" } else { "-" },
                        graph.vertex(from).id,
                        graph.vertex(at).id
                    )))
                }
                Some(_) => {}
            }
            vertices.push(to);
        }
        Ok(Self { steps, vertices })
    }

    /// Curve through the given vertex sequence, picking the lowest-index edge
    /// between consecutive vertices.
    pub fn through_vertices(graph: &MetricGraph, path: &[usize]) -> Result<Self> {
        let mut steps = Vec::with_capacity(path.len().saturating_sub(1));
        for w in path.windows(2) {
            let e = graph
                .incident(w[0])
                .iter()
                .copied()
                .find(|&e| graph.edge(e).other(w[0]) == w[1])
                .ok_or_else(|| {
                    Error::InvalidCurve(format!(
                        "no edge between {} and {}",
                        graph.vertex(w[0]).id,
                        graph.vertex(w[1]).id
                    ))
                })?;
            steps.push(Step::new(e, graph.edge(e).u == w[0]));
        }
        Self::new(graph, steps)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn start(&self) -> usize {
        self.vertices[0]
    }

    pub fn end(&self) -> usize {
        *self.vertices.last().expect("curves are nonempty")
    }

    pub fn len_steps(&self) -> usize {
        self.steps.len()
    }

    /// Len(γ); also the constant metric speed on [0,1].
    pub fn length(&self, graph: &MetricGraph) -> f64 {
        self.steps.iter().map(|s| graph.edge(s.edge).len).sum()
    }

    pub fn speed(&self, graph: &MetricGraph) -> f64 {
        self.length(graph)
    }

    /// Number of traversals of `edge`, regardless of orientation.
    pub fn traversals(&self, edge: usize) -> usize {
        self.steps.iter().filter(|s| s.edge == edge).count()
    }

    /// Edge -> traversal count, sorted by edge.
    pub fn edge_counts(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<usize> = self.steps.iter().map(|s| s.edge).collect();
        edges.sort_unstable();
        let mut out: Vec<(usize, usize)> = Vec::new();
        for e in edges {
            match out.last_mut() {
                Some((last, n)) if *last == e => *n += 1,
                _ => out.push((e, 1)),
            }
        }
        out
    }

    pub fn uses_edge(&self, edge: usize) -> bool {
        self.steps.iter().any(|s| s.edge == edge)
    }

    pub fn meets_null_edge(&self, graph: &MetricGraph) -> bool {
        self.steps.iter().any(|s| graph.edge(s.edge).is_null())
    }

    pub fn reversed(&self) -> Self {
        Self {
            steps: self.steps.iter().rev().map(|s| s.reversed()).collect(),
            vertices: self.vertices.iter().rev().copied().collect(),
        }
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = self.vertices.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn concat(&self, graph: &MetricGraph, other: &Curve) -> Result<Self> {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Self::new(graph, steps)
    }

    pub fn label(&self, graph: &MetricGraph) -> String {
        self.steps
            .iter()
            .map(|s| format!("{}{}", graph.edge(s.edge).id, if s.forward { "+" } else { "-" }))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn display<'a>(&'a self, graph: &'a MetricGraph) -> impl fmt::Display + 'a {
        struct D<'a>(&'a Curve, &'a MetricGraph);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0.label(self.1))
            }
        }
        D(self, graph)
    }
}

/// ∫_γ ρ ds = Σ over steps of ρ(e)·ℓ(e). `rho` is indexed by edge; a NaN entry
/// on a traversed edge counts as a missing value.
pub fn line_integral<T: Scalar>(graph: &MetricGraph, rho: &[T], curve: &Curve) -> Result<T> {
    let mut acc = T::zero();
    for s in curve.steps() {
        let r = rho.get(s.edge).ok_or_else(|| {
            Error::Domain(format!("density has no value on edge {}", graph.edge(s.edge).id))
        })?;
        let rf = r.to_f64();
        if rf.is_nan() || rf < 0.0 {
            return Err(Error::Domain(format!(
                "density on edge {} must be a nonnegative number, got {rf}",
                graph.edge(s.edge).id
            )));
        }
        acc = acc + r.clone() * T::from_f64(graph.edge(s.edge).len);
    }
    Ok(acc)
}

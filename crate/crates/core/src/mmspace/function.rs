use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::graph::MetricGraph;

/// A real function on vertices, indexed by canonical vertex position.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexFunction {
    values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(graph: &MetricGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.vertex_count() {
            return Err(Error::Domain(format!(
                "function has {} values for {} vertices",
                values.len(),
                graph.vertex_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("function value at {} is not finite", graph.vertex(i).id)));
        }
        Ok(Self { values })
    }

    pub fn constant(graph: &MetricGraph, c: f64) -> Self {
        Self {
            values: vec![c; graph.vertex_count()],
        }
    }

    /// f(x, y) evaluated at vertex positions.
    pub fn from_positions(graph: &MetricGraph, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..graph.vertex_count())
            .map(|v| {
                graph
                    .position(v)
                    .map(|p| f(p[0], p[1]))
                    .ok_or_else(|| Error::Domain(format!("vertex {} has no position", graph.vertex(v).id)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(graph, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    /// f(v) − f(u) under the edge's canonical orientation.
    pub fn difference<T: Scalar>(&self, graph: &MetricGraph, e: usize) -> T {
        let edge = graph.edge(e);
        T::from_f64(self.values[edge.v]) - T::from_f64(self.values[edge.u])
    }

    /// Δf(e)/ℓ(e).
    pub fn slope<T: Scalar>(&self, graph: &MetricGraph, e: usize) -> T {
        self.difference::<T>(graph, e) / T::from_f64(graph.edge(e).len)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub id: String,
    /// Optional planar position, used by coordinate functions and plots.
    pub pos: Option<[f64; 2]>,
}

/// An edge with length `len` (> 0) and measure `measure` (>= 0). `u`, `v` are
/// vertex positions in the canonical (id-sorted) order.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: String,
    pub u: usize,
    pub v: usize,
    pub len: f64,
    pub measure: f64,
}

impl Edge {
    pub fn is_null(&self) -> bool {
        self.measure == 0.0
    }

    pub fn other(&self, w: usize) -> usize {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Finite metric measure graph. Vertices and edges are stored sorted by id, so
/// indices are canonical and stable across save/load.
#[derive(Clone, Debug)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
    vertex_ids: HashMap<String, usize>,
    edge_ids: HashMap<String, usize>,
}

impl PartialEq for MetricGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<(String, String, String, f64, f64)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, id: impl Into<String>, pos: Option<[f64; 2]>) -> &mut Self {
        self.vertices.push(Vertex { id: id.into(), pos });
        self
    }

    pub fn edge(
        &mut self,
        id: impl Into<String>,
        u: impl Into<String>,
        v: impl Into<String>,
        len: f64,
        measure: f64,
    ) -> &mut Self {
        self.edges.push((id.into(), u.into(), v.into(), len, measure));
        self
    }

    pub fn build(&self) -> Result<MetricGraph> {
        let mut vertices = self.vertices.clone();
        vertices.sort_by(|a, b| a.id.cmp(&b.id));
        let mut vertex_ids = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if vertex_ids.insert(v.id.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex id {:?}", v.id)));
            }
            if let Some(p) = v.pos {
                if !p[0].is_finite() || !p[1].is_finite() {
                    return Err(Error::InvalidGraph(format!("vertex {:?} has a non-finite position", v.id)));
                }
            }
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for (id, u, v, len, measure) in &self.edges {
            let ui = *vertex_ids
                .get(u)
                .ok_or_else(|| Error::InvalidGraph(format!("edge {id:?}: unknown endpoint {u:?}")))?;
            let vi = *vertex_ids
                .get(v)
                .ok_or_else(|| Error::InvalidGraph(format!("edge {id:?}: unknown endpoint {v:?}")))?;
            if !(len.is_finite() && *len > 0.0) {
                return Err(Error::InvalidGraph(format!("edge {id:?}: length must be positive and finite, got {len}")));
            }
            if !(measure.is_finite() && *measure >= 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge {id:?}: measure must be nonnegative and finite, got {measure}"
                )));
            }
            edges.push(Edge {
                id: id.clone(),
                u: ui,
                v: vi,
                len: *len,
                measure: *measure,
            });
        }
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        let mut edge_ids = HashMap::with_capacity(edges.len());
        let mut incident = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            if edge_ids.insert(e.id.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge id {:?}", e.id)));
            }
            incident[e.u].push(i);
            if e.v != e.u {
                incident[e.v].push(i);
            }
        }
        let total: f64 = edges.iter().map(|e| e.measure).sum();
        if !total.is_finite() {
            return Err(Error::InvalidGraph("total measure is not finite".into()));
        }
        Ok(MetricGraph {
            vertices,
            edges,
            incident,
            vertex_ids,
            edge_ids,
        })
    }
}

impl MetricGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, i: usize) -> &Vertex {
        &self.vertices[i]
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    /// Edges incident to `v`, in canonical edge order. Self-loops appear once.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_ids.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_ids.get(id).copied()
    }

    pub fn total_measure(&self) -> f64 {
        self.edges.iter().map(|e| e.measure).sum()
    }

    pub fn has_positions(&self) -> bool {
        self.vertices.iter().all(|v| v.pos.is_some())
    }

    pub fn position(&self, v: usize) -> Option<[f64; 2]> {
        self.vertices[v].pos
    }

    pub fn null_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(|(_, e)| e.is_null()).map(|(i, _)| i)
    }

    /// Half the measure of every incident edge; a self-loop contributes fully.
    pub fn star_measure(&self, v: usize) -> f64 {
        self.incident[v]
            .iter()
            .map(|&e| {
                let edge = &self.edges[e];
                if edge.u == edge.v {
                    edge.measure
                } else {
                    0.5 * edge.measure
                }
            })
            .sum()
    }

    /// Shortest-path distances from `source` under edge lengths.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> Ordering {
                other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
            }
        }
        let mut dist = vec![f64::INFINITY; self.vertices.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Item(0.0, source));
        while let Some(Item(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &e in &self.incident[v] {
                let edge = &self.edges[e];
                let w = edge.other(v);
                let nd = d + edge.len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Item(nd, w));
                }
            }
        }
        dist
    }

    /// Disjoint union; ids are prefixed to stay unique.
    pub fn disjoint_union(&self, other: &MetricGraph, left: &str, right: &str) -> Result<MetricGraph> {
        let mut b = GraphBuilder::new();
        for (prefix, g) in [(left, self), (right, other)] {
            for v in &g.vertices {
                b.vertex(format!("{prefix}{}", v.id), v.pos);
            }
            for e in &g.edges {
                b.edge(
                    format!("{prefix}{}", e.id),
                    format!("{prefix}{}", g.vertices[e.u].id),
                    format!("{prefix}{}", g.vertices[e.v].id),
                    e.len,
                    e.measure,
                );
            }
        }
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_edges() -> MetricGraph {
        let mut b = GraphBuilder::new();
        b.vertex("a", None).vertex("b", None).vertex("c", None);
        b.edge("e2", "b", "c", 2.0, 0.0).edge("e1", "a", "b", 1.0, 3.0);
        b.build().unwrap()
    }

    #[test]
    fn builder_sorts_by_id() {
        let g = two_edges();
        assert_eq!(g.edge(0).id, "e1");
        assert_eq!(g.edge(1).id, "e2");
        assert_eq!(g.incident(1), &[0, 1]);
    }

    #[test]
    fn rejects_bad_edges() {
        let mut b = GraphBuilder::new();
        b.vertex("a", None).edge("e", "a", "zz", 1.0, 1.0);
        assert!(matches!(b.build(), Err(Error::InvalidGraph(_))));

        let mut b = GraphBuilder::new();
        b.vertex("a", None).vertex("b", None).edge("e", "a", "b", -1.0, 1.0);
        let err = b.build().unwrap_err().to_string();
        assert!(err.contains("\"e\""), "{err}");

        let mut b = GraphBuilder::new();
        b.vertex("a", None).vertex("b", None).edge("e", "a", "b", 1.0, f64::NAN);
        assert!(b.build().is_err());
    }

    #[test]
    fn star_measures_sum_to_total() {
        let g = two_edges();
        let s: f64 = (0..g.vertex_count()).map(|v| g.star_measure(v)).sum();
        assert_eq!(s, g.total_measure());
    }

    #[test]
    fn distances() {
        let g = two_edges();
        assert_eq!(g.distances_from(0), vec![0.0, 1.0, 3.0]);
    }
}

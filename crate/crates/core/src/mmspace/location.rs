use serde::{Deserialize, Serialize};

use super::graph::MetricGraph;

/// Evaluation granularity. Edge interiors carry a single direction, so the
/// edge-level results are exact; vertex stars aggregate all incident edges
/// and carry the multi-directional structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    EdgePoint,
    VertexStar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Edge(usize),
    Star(usize),
}

impl Location {
    pub fn index(self) -> usize {
        match self {
            Location::Edge(i) | Location::Star(i) => i,
        }
    }

    pub fn granularity(self) -> Granularity {
        match self {
            Location::Edge(_) => Granularity::EdgePoint,
            Location::Star(_) => Granularity::VertexStar,
        }
    }
}

impl MetricGraph {
    pub fn location_count(&self, gran: Granularity) -> usize {
        match gran {
            Granularity::EdgePoint => self.edge_count(),
            Granularity::VertexStar => self.vertex_count(),
        }
    }

    pub fn locations(&self, gran: Granularity) -> Vec<Location> {
        match gran {
            Granularity::EdgePoint => (0..self.edge_count()).map(Location::Edge).collect(),
            Granularity::VertexStar => (0..self.vertex_count()).map(Location::Star).collect(),
        }
    }

    pub fn location_measure(&self, loc: Location) -> f64 {
        match loc {
            Location::Edge(e) => self.edge(e).measure,
            Location::Star(v) => self.star_measure(v),
        }
    }

    pub fn location_id(&self, loc: Location) -> &str {
        match loc {
            Location::Edge(e) => &self.edge(e).id,
            Location::Star(v) => &self.vertex(v).id,
        }
    }

    /// A location is exceptional when every edge through it is measure-null.
    pub fn is_exceptional(&self, loc: Location) -> bool {
        match loc {
            Location::Edge(e) => self.edge(e).is_null(),
            Location::Star(v) => self.incident(v).iter().all(|&e| self.edge(e).is_null()),
        }
    }

    /// Locations hit by a traversal of edge `e`.
    pub fn locations_of_edge(&self, e: usize, gran: Granularity) -> Vec<Location> {
        match gran {
            Granularity::EdgePoint => vec![Location::Edge(e)],
            Granularity::VertexStar => {
                let edge = self.edge(e);
                vec![Location::Star(edge.u), Location::Star(edge.v)]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmspace::GraphBuilder;

    #[test]
    fn mass_is_conserved_at_both_granularities() {
        let mut b = GraphBuilder::new();
        b.vertex("a", None).vertex("b", None).vertex("c", None);
        b.edge("x", "a", "b", 1.0, 0.25).edge("y", "b", "c", 2.0, 0.0).edge("z", "c", "c", 1.0, 0.5);
        let g = b.build().unwrap();
        for gran in [Granularity::EdgePoint, Granularity::VertexStar] {
            let s: f64 = g.locations(gran).into_iter().map(|l| g.location_measure(l)).sum();
            assert_eq!(s, g.total_measure());
        }
        assert!(g.is_exceptional(Location::Edge(1)));
        assert!(!g.is_exceptional(Location::Star(2)));
    }
}

//! The restricted program over an active set of curves.

use std::collections::HashSet;

use crate::mmspace::{Curve, MetricGraph};

/// Constraint rows `a_γ(e) = n_γ(e)·ℓ(e)` over the σ-positive edges.
#[derive(Clone, Debug)]
pub(crate) struct Program {
    /// σ-positive edges in canonical order.
    pub pos: Vec<usize>,
    pub slot: Vec<Option<usize>>,
    pub sigma: Vec<f64>,
    pub curves: Vec<Curve>,
    pub rows: Vec<Vec<(usize, f64)>>,
    seen: HashSet<Curve>,
}

impl Program {
    pub fn new(graph: &MetricGraph) -> Self {
        let pos: Vec<usize> = (0..graph.edge_count()).filter(|&e| !graph.edge(e).is_null()).collect();
        let mut slot = vec![None; graph.edge_count()];
        for (k, &e) in pos.iter().enumerate() {
            slot[e] = Some(k);
        }
        let sigma = pos.iter().map(|&e| graph.edge(e).measure).collect();
        Self {
            pos,
            slot,
            sigma,
            curves: Vec::new(),
            rows: Vec::new(),
            seen: HashSet::new(),
        }
    }

    /// Adds a curve unless it is already present or meets a σ-null edge.
    pub fn add(&mut self, graph: &MetricGraph, curve: Curve) -> bool {
        if curve.meets_null_edge(graph) || self.seen.contains(&curve) {
            return false;
        }
        let row = curve
            .edge_counts()
            .into_iter()
            .map(|(e, n)| (self.slot[e].expect("σ-positive"), n as f64 * graph.edge(e).len))
            .collect();
        self.seen.insert(curve.clone());
        self.curves.push(curve);
        self.rows.push(row);
        true
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    /// Full edge density: `rho_pos` on σ-positive edges, `1/ℓ` on σ-null ones.
    pub fn full_rho(&self, graph: &MetricGraph, rho_pos: &[f64]) -> Vec<f64> {
        (0..graph.edge_count())
            .map(|e| match self.slot[e] {
                Some(k) => rho_pos[k],
                None => 1.0 / graph.edge(e).len,
            })
            .collect()
    }

    pub fn usage(&self, lambda: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.pos.len()];
        for (row, &l) in self.rows.iter().zip(lambda) {
            if l != 0.0 {
                for &(k, a) in row {
                    u[k] += l * a;
                }
            }
        }
        u
    }

    pub fn dot(&self, j: usize, rho_pos: &[f64]) -> f64 {
        self.rows[j].iter().map(|&(k, a)| a * rho_pos[k]).sum()
    }
}

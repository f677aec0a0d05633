//! Separation: find curves of the family with small ρ-length.

use std::collections::{BTreeMap, HashSet};

use crate::error::Result;
use crate::mmspace::{enumerate_curves, Budget, Connector, Curve, CurveFamily, MetricGraph, Step};

/// How the minimum of `γ ↦ ∫_γ ρ` over the family is found.
#[derive(Clone, Debug)]
pub(crate) enum Oracle {
    /// Every curve listed; minimum by scan.
    Listed(Vec<Curve>),
    /// Hop-bounded shortest walks. Exact for non-simple connectors, and for
    /// simple connectors with disjoint endpoint sets after loop erasure.
    Walks(Connector),
}

impl Oracle {
    pub fn new(graph: &MetricGraph, family: &CurveFamily, budget: Budget) -> Result<Self> {
        match family {
            CurveFamily::Connector(c) if !c.simple || !c.endpoints_overlap() => Ok(Oracle::Walks(c.clone())),
            _ => Ok(Oracle::Listed(enumerate_curves(graph, family, budget)?)),
        }
    }

    /// Up to `limit` distinct curves with line integral `< threshold` under
    /// weights `w_e = ρ_e ℓ_e`, most violated first, plus the overall minimum
    /// (curve, value). `None` for an empty family.
    pub fn separate(
        &self,
        graph: &MetricGraph,
        w: &[f64],
        threshold: f64,
        limit: usize,
    ) -> Option<(Vec<(Curve, f64)>, (Curve, f64))> {
        let mut found: Vec<(Curve, f64)> = match self {
            Oracle::Listed(curves) => curves
                .iter()
                .map(|c| (c.clone(), weight(c, w)))
                .collect(),
            Oracle::Walks(conn) => shortest_walks(graph, conn, w),
        };
        found.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        let min = found.first()?.clone();
        let mut seen = HashSet::new();
        let picked = found
            .into_iter()
            .filter(|(_, v)| *v < threshold)
            .filter(|(c, _)| seen.insert(c.clone()))
            .take(limit)
            .collect();
        Some((picked, min))
    }
}

fn weight(c: &Curve, w: &[f64]) -> f64 {
    c.steps().iter().map(|s| w[s.edge]).sum()
}

/// For every target vertex, the minimum-weight walk from the sources with
/// 1..=max_steps steps, loop-erased when the connector is simple.
fn shortest_walks(graph: &MetricGraph, conn: &Connector, w: &[f64]) -> Vec<(Curve, f64)> {
    let n = graph.vertex_count();
    let hops = conn.max_steps.min(if conn.simple { n.saturating_sub(1).max(1) } else { usize::MAX });
    let allowed: Vec<bool> = (0..graph.edge_count()).map(|e| conn.allows(graph, e)).collect();
    let mut cur = vec![f64::INFINITY; n];
    for &a in &conn.from {
        cur[a] = 0.0;
    }
    // pred[k][v]: last step of the best exactly-(k+1)-step walk ending at v
    let mut pred: Vec<Vec<Option<(usize, Step)>>> = Vec::new();
    let mut best: Vec<(f64, usize)> = vec![(f64::INFINITY, 0); n];
    for k in 0..hops {
        let mut next = vec![f64::INFINITY; n];
        let mut p = vec![None; n];
        for (e, edge) in graph.edges().iter().enumerate() {
            if !allowed[e] {
                continue;
            }
            for (from, to, fwd) in [(edge.u, edge.v, true), (edge.v, edge.u, false)] {
                if cur[from].is_finite() {
                    let d = cur[from] + w[e];
                    if d < next[to] {
                        next[to] = d;
                        p[to] = Some((from, Step::new(e, fwd)));
                    }
                }
                if edge.u == edge.v {
                    break;
                }
            }
        }
        for v in 0..n {
            if next[v] < best[v].0 {
                best[v] = (next[v], k);
            }
        }
        pred.push(p);
        if next.iter().all(|d| d.is_infinite()) {
            break;
        }
        cur = next;
    }
    let mut out = BTreeMap::new();
    for &b in &conn.to {
        let (d, k) = best[b];
        if !d.is_finite() {
            continue;
        }
        let mut steps = Vec::with_capacity(k + 1);
        let mut at = b;
        for layer in (0..=k).rev() {
            let (prev, s) = pred[layer][at].expect("finite layer has a predecessor");
            steps.push(s);
            at = prev;
        }
        steps.reverse();
        if conn.simple {
            steps = loop_erase(graph, &steps);
        }
        let curve = Curve::new(graph, steps).expect("walk is connected");
        let value = weight(&curve, w);
        out.insert(curve, value);
    }
    out.into_iter().collect()
}

/// Chronological loop erasure of a walk.
fn loop_erase(graph: &MetricGraph, steps: &[Step]) -> Vec<Step> {
    let start = {
        let e = graph.edge(steps[0].edge);
        if steps[0].forward {
            e.u
        } else {
            e.v
        }
    };
    let mut verts = vec![start];
    let mut out: Vec<Step> = Vec::new();
    for s in steps {
        let e = graph.edge(s.edge);
        let to = if s.forward { e.v } else { e.u };
        if let Some(pos) = verts.iter().position(|&v| v == to) {
            verts.truncate(pos + 1);
            out.truncate(pos);
        } else {
            verts.push(to);
            out.push(*s);
        }
    }
    out
}

use std::collections::{BTreeSet, HashSet};
use std::ops::ControlFlow;

use crate::error::{Error, Result};

use super::curve::{Curve, Step};
use super::graph::MetricGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Restricts which edges connector curves may use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeRestriction {
    /// Edges whose endpoint positions differ only along the axis.
    Axis(Axis),
    Edges(BTreeSet<usize>),
}

/// All curves from `from` to `to` (simple paths, or walks when `simple` is
/// false) with at most `max_steps` steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connector {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    pub simple: bool,
    pub max_steps: usize,
    pub restriction: Option<EdgeRestriction>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveFamily {
    Explicit(Vec<Curve>),
    Connector(Connector),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_steps: usize,
    pub max_count: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_steps: 20,
            max_count: 100_000,
        }
    }
}

impl Connector {
    pub fn new(from: Vec<usize>, to: Vec<usize>, max_steps: usize) -> Self {
        Self {
            from,
            to,
            simple: true,
            max_steps,
            restriction: None,
        }
    }

    pub fn allows(&self, graph: &MetricGraph, edge: usize) -> bool {
        match &self.restriction {
            None => true,
            Some(EdgeRestriction::Edges(set)) => set.contains(&edge),
            Some(EdgeRestriction::Axis(axis)) => {
                let e = graph.edge(edge);
                match (graph.position(e.u), graph.position(e.v)) {
                    (Some(a), Some(b)) => match axis {
                        Axis::Horizontal => a[1] == b[1] && a[0] != b[0],
                        Axis::Vertical => a[0] == b[0] && a[1] != b[1],
                    },
                    _ => false,
                }
            }
        }
    }

    pub fn endpoints_overlap(&self) -> bool {
        let to: HashSet<usize> = self.to.iter().copied().collect();
        self.from.iter().any(|v| to.contains(v))
    }

    pub fn is_symmetric_swap_of(&self, other: &Connector) -> bool {
        let set = |v: &[usize]| v.iter().copied().collect::<BTreeSet<_>>();
        set(&self.from) == set(&other.to)
            && set(&self.to) == set(&other.from)
            && self.simple == other.simple
            && self.max_steps == other.max_steps
            && self.restriction == other.restriction
    }

    /// The same connector with source and target swapped.
    pub fn swapped(&self) -> Connector {
        Connector {
            from: self.to.clone(),
            to: self.from.clone(),
            ..self.clone()
        }
    }
}

impl CurveFamily {
    /// Explicit family; rejects duplicates.
    pub fn explicit(curves: Vec<Curve>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(curves.len());
        for (i, c) in curves.iter().enumerate() {
            if !seen.insert(c) {
                return Err(Error::InvalidCurve(format!("explicit family repeats curve #{i}")));
            }
        }
        Ok(CurveFamily::Explicit(curves))
    }

    pub fn connector(c: Connector) -> Self {
        CurveFamily::Connector(c)
    }

    pub fn as_explicit(&self) -> Option<&[Curve]> {
        match self {
            CurveFamily::Explicit(c) => Some(c),
            CurveFamily::Connector(_) => None,
        }
    }

    pub fn contains(&self, graph: &MetricGraph, curve: &Curve) -> bool {
        match self {
            CurveFamily::Explicit(c) => c.contains(curve),
            CurveFamily::Connector(conn) => {
                curve.len_steps() <= conn.max_steps
                    && conn.from.contains(&curve.start())
                    && conn.to.contains(&curve.end())
                    && (!conn.simple || curve.is_simple())
                    && curve.steps().iter().all(|s| conn.allows(graph, s.edge))
            }
        }
    }
}

/// Expands a family into its curves in lexicographic order of vertex
/// sequences (ties broken by edge sequence). Exceeding `budget.max_count`
/// is an error; nothing is silently dropped.
pub fn enumerate_curves(graph: &MetricGraph, family: &CurveFamily, budget: Budget) -> Result<Vec<Curve>> {
    match family {
        CurveFamily::Explicit(curves) => {
            for c in curves {
                // re-validate against this graph
                Curve::new(graph, c.steps().to_vec())?;
            }
            if curves.len() > budget.max_count {
                return Err(Error::Budget(format!(
                    "explicit family has {} curves, budget allows {}",
                    curves.len(),
                    budget.max_count
                )));
            }
            let mut out = curves.clone();
            out.sort();
            Ok(out)
        }
        CurveFamily::Connector(conn) => {
            let max_steps = conn.max_steps;
            let targets: HashSet<usize> = conn.to.iter().copied().collect();
            let mut starts: Vec<usize> = conn.from.clone();
            starts.sort_unstable();
            starts.dedup();
            let mut out = Vec::new();
            let mut overflow = false;
            walk_paths(
                graph,
                &starts,
                max_steps,
                conn.simple,
                |e| conn.allows(graph, e),
                |steps, at| {
                    if targets.contains(&at) {
                        if out.len() == budget.max_count {
                            overflow = true;
                            return ControlFlow::Break(());
                        }
                        out.push(steps.to_vec());
                    }
                    ControlFlow::Continue(())
                },
            );
            if overflow {
                return Err(Error::Budget(format!(
                    "connector family has more than {} curves within {} steps",
                    budget.max_count, max_steps
                )));
            }
            let mut curves = out
                .into_iter()
                .map(|s| Curve::new(graph, s))
                .collect::<Result<Vec<_>>>()?;
            curves.sort();
            Ok(curves)
        }
    }
}

/// Every simple path of the graph with 1..=`max_steps` steps, each listed once
/// (start index < end index; self-loops forward only). Passes curves to
/// `visit` in DFS order; stops early on `Break`. Returns `Err(Budget)` if more
/// than `max_count` paths exist and `visit` never broke.
pub fn for_each_simple_path(
    graph: &MetricGraph,
    budget: Budget,
    allowed: impl Fn(usize) -> bool,
    mut visit: impl FnMut(&Curve) -> ControlFlow<()>,
) -> Result<usize> {
    let starts: Vec<usize> = (0..graph.vertex_count()).collect();
    let mut count = 0usize;
    let mut result: Result<()> = Ok(());
    let mut stopped = false;
    walk_paths(graph, &starts, budget.max_steps, true, allowed, |steps, at| {
        let first = steps[0];
        let e0 = graph.edge(first.edge);
        let start = if first.forward { e0.u } else { e0.v };
        let canonical = if start == at {
            steps.len() == 1 && first.forward
        } else {
            start < at
        };
        if !canonical {
            return ControlFlow::Continue(());
        }
        if count == budget.max_count {
            result = Err(Error::Budget(format!(
                "more than {} simple paths within {} steps",
                budget.max_count, budget.max_steps
            )));
            return ControlFlow::Break(());
        }
        count += 1;
        let curve = Curve::new(graph, steps.to_vec()).expect("walk produces connected steps");
        match visit(&curve) {
            ControlFlow::Continue(()) => ControlFlow::Continue(()),
            ControlFlow::Break(()) => {
                stopped = true;
                ControlFlow::Break(())
            }
        }
    });
    if stopped {
        return Ok(count);
    }
    result.map(|_| count)
}

/// Depth-first walk from every start vertex; `emit(steps, current_vertex)` is
/// called after each step. Neighbors are explored in (vertex, edge) order.
fn walk_paths(
    graph: &MetricGraph,
    starts: &[usize],
    max_steps: usize,
    simple: bool,
    allowed: impl Fn(usize) -> bool,
    mut emit: impl FnMut(&[Step], usize) -> ControlFlow<()>,
) {
    let n = graph.vertex_count();
    let mut neighbors: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); n];
    for (v, nb) in neighbors.iter_mut().enumerate() {
        for &e in graph.incident(v) {
            if !allowed(e) {
                continue;
            }
            let edge = graph.edge(e);
            if edge.u == edge.v {
                nb.push((v, e, true));
                nb.push((v, e, false));
            } else {
                nb.push((edge.other(v), e, edge.u == v));
            }
        }
        nb.sort_unstable();
    }
    let mut on_path = vec![false; n];
    let mut steps: Vec<Step> = Vec::new();

    struct Ctx<'a, F> {
        neighbors: &'a [Vec<(usize, usize, bool)>],
        on_path: &'a mut [bool],
        steps: &'a mut Vec<Step>,
        max_steps: usize,
        simple: bool,
        emit: F,
    }

    fn dfs<F: FnMut(&[Step], usize) -> ControlFlow<()>>(ctx: &mut Ctx<'_, F>, at: usize) -> ControlFlow<()> {
        if ctx.steps.len() == ctx.max_steps {
            return ControlFlow::Continue(());
        }
        for i in 0..ctx.neighbors[at].len() {
            let (w, e, fwd) = ctx.neighbors[at][i];
            if ctx.simple && ctx.on_path[w] {
                continue;
            }
            ctx.steps.push(Step::new(e, fwd));
            let was = ctx.on_path[w];
            ctx.on_path[w] = true;
            let mut flow = (ctx.emit)(&ctx.steps[..], w);
            if flow.is_continue() {
                flow = dfs(ctx, w);
            }
            ctx.on_path[w] = was;
            ctx.steps.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }

    let mut ctx = Ctx {
        neighbors: &neighbors,
        on_path: &mut on_path,
        steps: &mut steps,
        max_steps,
        simple,
        emit: &mut emit,
    };
    for &s in starts {
        ctx.on_path[s] = true;
        let flow = dfs(&mut ctx, s);
        ctx.on_path[s] = false;
        if flow.is_break() {
            return;
        }
    }
}

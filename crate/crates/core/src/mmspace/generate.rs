//! Canonical example spaces.
//!
//! Grids use edge length `h` and edge measure `h²`, so each of the two
//! incident vertex stars receives `h²/2`. The rug is the same grid with every
//! vertical edge measure-null: vertical motion is invisible to modulus while
//! still contributing to the metric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::curve::{Curve, Step};
use super::family::{Connector, CurveFamily};
use super::graph::{GraphBuilder, MetricGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Grid { nx: usize, ny: usize, h: f64 },
    Rug { nx: usize, ny: usize, h: f64 },
    ParallelPaths { k: usize, m: usize },
    Carpet { level: u32 },
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub graph: MetricGraph,
    /// Left-to-right crossing family for grids, rugs and carpets; the k paths
    /// themselves for `ParallelPaths`.
    pub family: CurveFamily,
}

fn width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len()
}

pub fn vertex_name(i: usize, total: usize) -> String {
    format!("v{:0w$}", i, w = width(total))
}

pub fn edge_name(i: usize, total: usize) -> String {
    format!("e{:0w$}", i, w = width(total))
}

pub fn generate(kind: &GeneratorKind) -> Result<Generated> {
    match *kind {
        GeneratorKind::Grid { nx, ny, h } => lattice(nx, ny, h, false),
        GeneratorKind::Rug { nx, ny, h } => lattice(nx, ny, h, true),
        GeneratorKind::ParallelPaths { k, m } => parallel_paths(k, m),
        GeneratorKind::Carpet { level } => carpet(level),
    }
}

fn lattice(nx: usize, ny: usize, h: f64, rug: bool) -> Result<Generated> {
    if nx == 0 || ny == 0 {
        return Err(Error::Domain(format!("grid sizes must be positive, got {nx}x{ny}")));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Domain(format!("grid spacing must be positive, got {h}")));
    }
    build_lattice(nx, ny, h, rug, |_, _| true, |_, _| true)
}

/// Lattice on `nx × ny` vertices; `vertex_ok` and `edge_ok` select the
/// surviving pieces (used by the carpet).
fn build_lattice(
    nx: usize,
    ny: usize,
    h: f64,
    rug: bool,
    vertex_ok: impl Fn(usize, usize) -> bool,
    edge_ok: impl Fn((usize, usize), (usize, usize)) -> bool,
) -> Result<Generated> {
    let mut horizontal = Vec::new();
    let mut vertical = Vec::new();
    for j in 0..ny {
        for i in 0..nx.saturating_sub(1) {
            if vertex_ok(i, j) && vertex_ok(i + 1, j) && edge_ok((i, j), (i + 1, j)) {
                horizontal.push(((i, j), (i + 1, j)));
            }
        }
    }
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx {
            if vertex_ok(i, j) && vertex_ok(i, j + 1) && edge_ok((i, j), (i, j + 1)) {
                vertical.push(((i, j), (i, j + 1)));
            }
        }
    }
    let mut present: Vec<(usize, usize)> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if vertex_ok(i, j) {
                present.push((i, j));
            }
        }
    }
    let index_of = |p: (usize, usize)| present.binary_search_by(|q| (q.1, q.0).cmp(&(p.1, p.0))).ok();
    let nv = present.len();
    let ne = horizontal.len() + vertical.len();
    let mut b = GraphBuilder::new();
    for (k, &(i, j)) in present.iter().enumerate() {
        b.vertex(vertex_name(k, nv), Some([i as f64 * h, j as f64 * h]));
    }
    let area = h * h;
    for (k, &(a, c)) in horizontal.iter().chain(vertical.iter()).enumerate() {
        let is_vertical = k >= horizontal.len();
        let measure = if rug && is_vertical { 0.0 } else { area };
        b.edge(
            edge_name(k, ne),
            vertex_name(index_of(a).expect("endpoint present"), nv),
            vertex_name(index_of(c).expect("endpoint present"), nv),
            h,
            measure,
        );
    }
    let graph = b.build()?;
    let from: Vec<usize> = present
        .iter()
        .enumerate()
        .filter(|(_, p)| p.0 == 0)
        .map(|(k, _)| k)
        .collect();
    let to: Vec<usize> = present
        .iter()
        .enumerate()
        .filter(|(_, p)| p.0 + 1 == nx)
        .map(|(k, _)| k)
        .collect();
    let family = CurveFamily::Connector(Connector::new(from, to, nv.max(1)));
    Ok(Generated { graph, family })
}

fn parallel_paths(k: usize, m: usize) -> Result<Generated> {
    if k == 0 || m == 0 {
        return Err(Error::Domain(format!("parallel_paths needs k, m > 0, got k={k}, m={m}")));
    }
    let nv = k * (m + 1);
    let ne = k * m;
    let mut b = GraphBuilder::new();
    for i in 0..k {
        for j in 0..=m {
            b.vertex(vertex_name(i * (m + 1) + j, nv), Some([j as f64, i as f64]));
        }
    }
    for i in 0..k {
        for j in 0..m {
            b.edge(
                edge_name(i * m + j, ne),
                vertex_name(i * (m + 1) + j, nv),
                vertex_name(i * (m + 1) + j + 1, nv),
                1.0,
                1.0,
            );
        }
    }
    let graph = b.build()?;
    let curves = (0..k)
        .map(|i| Curve::new(&graph, (0..m).map(|j| Step::new(i * m + j, true)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Generated {
        family: CurveFamily::explicit(curves)?,
        graph,
    })
}

/// Unit square cut into `3^level` cells per side; a cell is removed when some
/// base-3 digit position has digit 1 in both of its coordinates. Only edges
/// bounding a surviving cell are kept.
fn carpet(level: u32) -> Result<Generated> {
    if level > 4 {
        return Err(Error::Domain(format!("carpet level {level} is too large (max 4)")));
    }
    let n = 3usize.pow(level);
    let h = 1.0 / n as f64;
    let removed = |a: usize, b: usize| {
        let (mut a, mut b) = (a, b);
        while a > 0 || b > 0 {
            if a % 3 == 1 && b % 3 == 1 {
                return true;
            }
            a /= 3;
            b /= 3;
        }
        false
    };
    let cell_kept = |a: isize, b: isize| {
        a >= 0 && b >= 0 && (a as usize) < n && (b as usize) < n && !removed(a as usize, b as usize)
    };
    let edge_ok = |p: (usize, usize), q: (usize, usize)| {
        let (i, j) = (p.0 as isize, p.1 as isize);
        if p.1 == q.1 {
            cell_kept(i, j) || cell_kept(i, j - 1)
        } else {
            cell_kept(i, j) || cell_kept(i - 1, j)
        }
    };
    let vertex_ok = |i: usize, j: usize| {
        let (i, j) = (i as isize, j as isize);
        cell_kept(i, j) || cell_kept(i - 1, j) || cell_kept(i, j - 1) || cell_kept(i - 1, j - 1)
    };
    build_lattice(n + 1, n + 1, h, false, vertex_ok, edge_ok)
}

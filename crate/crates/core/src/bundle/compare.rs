//! Comparison maps between fibers: p-structure against q-structure, and the
//! Cheeger structure against the p-weak one.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{coordinate_differentials, local_transition, mat_mul, mat_vec, max_entry_gap, transpose, Matrix};
use crate::charts::{ball_vertices, chebyshev, differential, dot, outward_slope, Atlas, ChartCandidate, Differential};
use crate::error::Result;
use crate::mmspace::{MetricGraph, VertexFunction};
use crate::scalar::{Rational, Scalar};
use crate::solver::linalg;

/// `π_{p,q,x}` at one star.
#[derive(Clone, Debug, PartialEq)]
pub struct PqLocal {
    pub vertex: usize,
    /// Sends q-fiber coordinates to p-fiber coordinates.
    pub matrix: Matrix,
    pub residual: Rational,
    /// `|π ξ|_p ≤ |ξ|_q` on every vertex of the q unit ball.
    pub lipschitz: bool,
    /// Explicit right inverse; its existence certifies surjectivity.
    pub preimage: Matrix,
    /// `π(d_q f) = d_p f` for every pool function, where both fits are exact.
    pub differentials_agree: bool,
    pub identity: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PqMap {
    pub p: f64,
    pub q: f64,
    pub local: Vec<PqLocal>,
    /// Stars covered by only one atlas, or by charts of different dimension.
    pub skipped: Vec<usize>,
}

impl PqMap {
    pub fn at(&self, vertex: usize) -> Option<&PqLocal> {
        self.local.iter().find(|l| l.vertex == vertex)
    }

    pub fn all_lipschitz(&self) -> bool {
        self.local.iter().all(|l| l.lipschitz)
    }

    pub fn all_identity(&self) -> bool {
        self.local.iter().all(|l| l.identity)
    }

    pub fn differentials_agree(&self) -> bool {
        self.local.iter().all(|l| l.differentials_agree)
    }
}

fn chart_index(atlas: &Atlas, v: usize) -> Option<usize> {
    atlas.charts.iter().position(|c| c.contains(v))
}

/// The comparison map from the q-bundle to the p-bundle, built from the
/// p-differentials of q-chart coordinates.
pub fn pq_map(graph: &MetricGraph, atlas_p: &Atlas, atlas_q: &Atlas, pool: &[VertexFunction]) -> Result<PqMap> {
    let mut coords: BTreeMap<(usize, usize), Vec<Differential>> = BTreeMap::new();
    let mut fp: BTreeMap<usize, Vec<Differential>> = BTreeMap::new();
    let mut fq: BTreeMap<usize, Vec<Differential>> = BTreeMap::new();
    let mut local = Vec::new();
    let mut skipped = Vec::new();
    for x in 0..graph.vertex_count() {
        let (Some(i), Some(j)) = (chart_index(atlas_p, x), chart_index(atlas_q, x)) else {
            if chart_index(atlas_p, x).is_some() || chart_index(atlas_q, x).is_some() {
                skipped.push(x);
            }
            continue;
        };
        let (cp, cq) = (&atlas_p.charts[i], &atlas_q.charts[j]);
        if cp.dim() != cq.dim() {
            skipped.push(x);
            continue;
        }
        let diffs = coordinate_differentials(graph, cp, cq);
        let diffs = coords.entry((i, j)).or_insert(diffs);
        // local_transition maps p-coordinates to q-coordinates; π goes back
        let t = local_transition(graph, cp, cq, diffs, x)?;
        let matrix = linalg::inverse(&t.matrix).expect("transition matrices are invertible");
        let dim = cq.dim();
        let one = Rational::one();
        let lipschitz = ball_vertices(cq.gradient.exact_directions(x), dim)
            .map(|vs| vs.iter().all(|v| cp.gradient.eval_exact(x, &mat_vec(&matrix, v)) <= one))
            .unwrap_or(false);
        let dp = fp.entry(i).or_insert_with(|| pool.iter().map(|f| differential(graph, f, cp)).collect());
        let dq = fq.entry(j).or_insert_with(|| pool.iter().map(|f| differential(graph, f, cq)).collect());
        let differentials_agree = dp.iter().zip(dq.iter()).all(|(a, b)| {
            let (a, b) = (a.get(x).expect("p chart covers x"), b.get(x).expect("q chart covers x"));
            !(a.is_exact() && b.is_exact() && t.residual.is_zero()) || mat_vec(&matrix, &b.xi) == a.xi
        });
        let identity = (0..dim).all(|r| (0..dim).all(|c| matrix[r][c] == if r == c { one.clone() } else { Rational::zero() }));
        local.push(PqLocal {
            vertex: x,
            preimage: t.matrix,
            matrix,
            residual: t.residual,
            lipschitz,
            differentials_agree,
            identity,
        });
    }
    Ok(PqMap {
        p: atlas_p.p,
        q: atlas_q.p,
        local,
        skipped,
    })
}

/// Largest entry of `π_{p,s}∘π_{s,q} − π_{p,q}` over stars all three maps cover.
pub fn pq_compose(ps: &PqMap, sq: &PqMap, pq: &PqMap) -> Rational {
    pq.local
        .iter()
        .filter_map(|l| {
            let (a, b) = (ps.at(l.vertex)?, sq.at(l.vertex)?);
            Some(max_entry_gap(&mat_mul(&a.matrix, &b.matrix), &l.matrix))
        })
        .fold(Rational::zero(), Scalar::max_of)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheegerVerdict {
    /// `Lip f(x) = |Df|_p(x)`.
    Equal,
    /// `Lip f(x) > |Df|_p(x)`.
    Gap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheegerLocal {
    pub vertex: usize,
    /// Max of `|Δf|/ℓ` over every incident edge.
    pub lip: Rational,
    /// Max over σ-positive incident edges.
    pub weak: Rational,
    pub verdict: CheegerVerdict,
    /// Nonzero Cheeger co-vector invisible to the p-weak structure.
    pub kernel: Option<Vec<Rational>>,
    /// Every vertex of the p-weak unit ball lifts into the Cheeger unit ball.
    /// `None` where the Cheeger chart is not independent.
    pub submetry: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheegerReport {
    pub local: Vec<CheegerLocal>,
}

impl CheegerReport {
    pub fn at(&self, vertex: usize) -> &CheegerLocal {
        &self.local[vertex]
    }

    pub fn gaps(&self) -> Vec<usize> {
        self.local
            .iter()
            .filter(|l| l.verdict == CheegerVerdict::Gap)
            .map(|l| l.vertex)
            .collect()
    }
}

/// Pointwise Lipschitz constant against the minimal weak gradient at every
/// vertex star, with the Cheeger chart `phi_c` used for kernel and submetry
/// witnesses.
pub fn cheeger_compare(graph: &MetricGraph, f: &VertexFunction, phi_c: &ChartCandidate) -> CheegerReport {
    let local = (0..graph.vertex_count())
        .map(|x| {
            let slope = |e: usize| outward_slope::<Rational>(graph, f, x, e).abs_val();
            let incident = graph.incident(x);
            let lip = incident.iter().map(|&e| slope(e)).fold(Rational::zero(), Scalar::max_of);
            let weak = incident
                .iter()
                .filter(|&&e| !graph.edge(e).is_null())
                .map(|&e| slope(e))
                .fold(Rational::zero(), Scalar::max_of);
            let verdict = if lip > weak { CheegerVerdict::Gap } else { CheegerVerdict::Equal };
            let all: Vec<Vec<Rational>> = incident.iter().map(|&e| phi_c.direction_from(graph, x, e)).collect();
            let positive: Vec<Vec<Rational>> = incident
                .iter()
                .zip(&all)
                .filter(|(&e, _)| !graph.edge(e).is_null())
                .map(|(_, w)| w.clone())
                .collect();
            let dim = phi_c.dim();
            let kernel_basis = if positive.is_empty() {
                (0..dim)
                    .map(|k| (0..dim).map(|j| if j == k { Rational::one() } else { Rational::zero() }).collect())
                    .collect()
            } else {
                linalg::null_space(&positive, dim)
            };
            let norm_c = |xi: &[Rational]| all.iter().map(|w| dot(w, xi).abs_val()).fold(Rational::zero(), Scalar::max_of);
            let kernel = kernel_basis.iter().find(|k| !norm_c(k).is_zero()).cloned();
            let submetry = (dim > 0 && linalg::rank(&all) == dim).then(|| submetry(&all, &positive, &kernel_basis));
            CheegerLocal {
                vertex: x,
                lip,
                weak,
                verdict,
                kernel,
                submetry,
            }
        })
        .collect();
    CheegerReport { local }
}

/// Lifts each vertex of the quotient p-ball through `ξ ↦ (ξ·b_i)` and checks
/// that the cheapest lift has Cheeger norm at most one.
fn submetry(all: &[Vec<Rational>], positive: &[Vec<Rational>], kernel: &[Vec<Rational>]) -> bool {
    let mut basis: Vec<Vec<Rational>> = Vec::new();
    for w in positive {
        basis.push(w.clone());
        if linalg::rank(&basis) < basis.len() {
            basis.pop();
        }
    }
    let r = basis.len();
    if r == 0 {
        return true;
    }
    // coordinates of each σ-positive direction in the chosen basis
    let bt = transpose(&basis);
    let gram = mat_mul(&basis, &bt);
    let gram_inv = linalg::inverse(&gram).expect("independent rows have an invertible Gram matrix");
    let rows: Vec<Vec<Rational>> = positive.iter().map(|w| mat_vec(&gram_inv, &mat_vec(&basis, w))).collect();
    let Some(vertices) = ball_vertices(&rows, r) else { return false };
    let one = Rational::one();
    vertices.iter().all(|u| {
        let xi0 = mat_vec(&bt, &mat_vec(&gram_inv, u));
        let q = if kernel.is_empty() {
            all.iter().map(|w| dot(w, &xi0).abs_val()).fold(Rational::zero(), Scalar::max_of)
        } else {
            let fit_rows: Vec<Vec<Rational>> = all.iter().map(|w| mat_vec(kernel, w)).collect();
            let rhs: Vec<Rational> = all.iter().map(|w| -dot(w, &xi0)).collect();
            chebyshev(&fit_rows, &rhs, kernel.len()).1
        };
        q <= one
    })
}

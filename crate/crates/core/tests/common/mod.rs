//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solver, plan or chart code of the crate; only graph accessors.

#![allow(dead_code)]

use modgrad::mmspace::{GeneratorKind, MetricGraph, VertexFunction};
use modgrad::scalar::{rational, rational_from_f64, Rational};
use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid(n: usize) -> MetricGraph {
    generated(GeneratorKind::Grid { nx: n, ny: n, h: 1.0 })
}

pub fn rug(n: usize) -> MetricGraph {
    generated(GeneratorKind::Rug { nx: n, ny: n, h: 1.0 })
}

pub fn parallel(k: usize, m: usize) -> MetricGraph {
    generated(GeneratorKind::ParallelPaths { k, m })
}

pub fn generated(kind: GeneratorKind) -> MetricGraph {
    modgrad::mmspace::generate(&kind).unwrap().graph
}

/// Integer values in `[-r, r]` on every vertex.
pub fn random_function(g: &MetricGraph, rng: &mut ChaCha8Rng, r: i64) -> VertexFunction {
    let values = (0..g.vertex_count()).map(|_| rng.random_range(-r..=r) as f64).collect();
    VertexFunction::new(g, values).unwrap()
}

/// `k · m^{1−p}` for k disjoint paths of m unit edges.
pub fn parallel_modulus(k: usize, m: usize, p: f64) -> f64 {
    k as f64 * (m as f64).powf(1.0 - p)
}

/// Simple paths from a `from` vertex to a `to` vertex that meet `from` only
/// at their start and `to` only at their end, as edge lists. Every simple
/// crossing contains one of these, so both families have the same modulus.
pub fn reduced_crossings(g: &MetricGraph, from: &[usize], to: &[usize]) -> Vec<Vec<usize>> {
    fn dfs(
        g: &MetricGraph,
        at: usize,
        is_from: &[bool],
        is_to: &[bool],
        seen: &mut [bool],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        for &e in g.incident(at) {
            let w = g.edge(e).other(at);
            if seen[w] || is_from[w] {
                continue;
            }
            path.push(e);
            if is_to[w] {
                out.push(path.clone());
            } else {
                seen[w] = true;
                dfs(g, w, is_from, is_to, seen, path, out);
                seen[w] = false;
            }
            path.pop();
        }
    }
    let n = g.vertex_count();
    let (mut is_from, mut is_to) = (vec![false; n], vec![false; n]);
    from.iter().for_each(|&v| is_from[v] = true);
    to.iter().for_each(|&v| is_to[v] = true);
    let mut out = Vec::new();
    for &s in from {
        let mut seen = vec![false; n];
        seen[s] = true;
        dfs(g, s, &is_from, &is_to, &mut seen, &mut Vec::new(), &mut out);
    }
    out
}

/// Vertices in the first and last column of a generated grid.
pub fn grid_sides(g: &MetricGraph) -> (Vec<usize>, Vec<usize>) {
    let xs: Vec<f64> = (0..g.vertex_count()).map(|v| g.position(v).unwrap()[0]).collect();
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pick = |t: f64| (0..xs.len()).filter(|&v| xs[v] == t).collect();
    (pick(lo), pick(hi))
}

/// Minimizes `Σ σ_e ρ_e^p` subject to `Σ_{e∈γ} ℓ_e ρ_e ≥ 1` for every listed
/// curve by a log-barrier path-following Newton method. Returns the primal
/// value and the barrier duality gap `(m + n)/t` at the last centering.
pub fn barrier_modulus(g: &MetricGraph, curves: &[Vec<usize>], p: f64) -> (f64, f64) {
    let n = g.edge_count();
    let sigma: Vec<f64> = g.edges().iter().map(|e| e.measure).collect();
    let rows: Vec<Vec<(usize, f64)>> = curves
        .iter()
        .map(|c| c.iter().map(|&e| (e, g.edge(e).len)).collect())
        .collect();
    let slack = |rho: &DVector<f64>| -> Vec<f64> {
        rows.iter().map(|r| r.iter().map(|&(e, l)| l * rho[e]).sum::<f64>() - 1.0).collect()
    };
    let objective = |rho: &DVector<f64>| -> f64 { (0..n).map(|e| sigma[e] * rho[e].powf(p)).sum() };
    let barrier = |rho: &DVector<f64>, t: f64| -> f64 {
        if rho.iter().any(|&r| r <= 0.0) {
            return f64::INFINITY;
        }
        let s = slack(rho);
        if s.iter().any(|&x| x <= 0.0) {
            return f64::INFINITY;
        }
        t * objective(rho) - s.iter().map(|x| x.ln()).sum::<f64>() - rho.iter().map(|x| x.ln()).sum::<f64>()
    };
    let shortest = rows
        .iter()
        .map(|r| r.iter().map(|&(_, l)| l).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let mut rho = DVector::from_element(n, 2.0 / shortest);
    let m = rows.len() as f64 + n as f64;
    let mut t = 1.0;
    loop {
        for _ in 0..200 {
            let s = slack(&rho);
            let mut grad = DVector::zeros(n);
            let mut hess = DMatrix::zeros(n, n);
            for e in 0..n {
                grad[e] = t * p * sigma[e] * rho[e].powf(p - 1.0) - 1.0 / rho[e];
                hess[(e, e)] = t * p * (p - 1.0) * sigma[e] * rho[e].powf(p - 2.0) + 1.0 / (rho[e] * rho[e]);
            }
            for (r, &sj) in rows.iter().zip(&s) {
                for &(a, la) in r {
                    grad[a] -= la / sj;
                    for &(b, lb) in r {
                        hess[(a, b)] += la * lb / (sj * sj);
                    }
                }
            }
            let step = hess.cholesky().expect("barrier Hessian is positive definite").solve(&-&grad);
            let decrement = -grad.dot(&step);
            if decrement < 1e-14 {
                break;
            }
            let base = barrier(&rho, t);
            let mut alpha = 1.0;
            loop {
                let trial = &rho + alpha * &step;
                if barrier(&trial, t) <= base - 0.25 * alpha * decrement {
                    rho = trial;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-20 {
                    break;
                }
            }
        }
        let value = objective(&rho);
        if m / t <= 1e-11 * value {
            return (value, m / t);
        }
        t *= 8.0;
    }
}

/// `|Δf|/ℓ` on σ-positive edges, zero on σ-null ones.
pub fn slope(g: &MetricGraph, f: &VertexFunction, e: usize) -> Rational {
    let edge = g.edge(e);
    if edge.is_null() {
        return Rational::zero();
    }
    let d = rational_from_f64(f.value(edge.v)) - rational_from_f64(f.value(edge.u));
    d.abs() / rational_from_f64(edge.len)
}

/// Signed slope of f along edge e in the given direction.
pub fn signed_slope(g: &MetricGraph, f: &VertexFunction, e: usize, forward: bool) -> Rational {
    let edge = g.edge(e);
    let d = rational_from_f64(f.value(edge.v)) - rational_from_f64(f.value(edge.u));
    let d = if forward { d } else { -d };
    d / rational_from_f64(edge.len)
}

/// `max |Δφ·ξ|/ℓ` over σ-positive edges at x, in exact arithmetic.
pub fn star_seminorm(g: &MetricGraph, phi: &[VertexFunction], x: usize, xi: &[Rational]) -> Rational {
    g.incident(x)
        .iter()
        .filter(|&&e| !g.edge(e).is_null())
        .map(|&e| {
            let edge = g.edge(e);
            let l = rational_from_f64(edge.len);
            let s = phi.iter().zip(xi).fold(Rational::zero(), |acc, (c, k)| {
                acc + (rational_from_f64(c.value(edge.v)) - rational_from_f64(c.value(edge.u))) * k
            });
            (s / l).abs()
        })
        .fold(Rational::zero(), |a, b| if b > a { b } else { a })
}

/// Minimum over `n` equally spaced unit directions in the upper half plane.
pub fn circle_scan(n: usize, f: impl Fn([f64; 2]) -> f64) -> f64 {
    (0..n)
        .map(|k| {
            let t = std::f64::consts::PI * k as f64 / n as f64;
            f([t.cos(), t.sin()])
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).fold(Rational::zero(), |acc, (x, r)| acc + x * &r[j]))
                .collect()
        })
        .collect()
}

pub fn identity(n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { rational(1, 1) } else { Rational::zero() }).collect())
        .collect()
}

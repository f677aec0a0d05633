use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{dot, outward_slope, Chart};
use crate::mmspace::{MetricGraph, VertexFunction};
use crate::scalar::{Rational, Scalar};
use crate::solver::{linalg, LinearProgram, LpOutcome, Relation};

#[derive(Clone, Debug, PartialEq)]
pub struct LocalDifferential {
    pub vertex: usize,
    /// `d_x f` in chart coordinates.
    pub xi: Vec<Rational>,
    /// `min_ξ max_e |ξ·w_e − Δf(e)/ℓ(e)|`, edges oriented away from x.
    pub residual: Rational,
    /// `|d_x f|_x = Φ^x(d_x f)`.
    pub norm: Rational,
}

impl LocalDifferential {
    pub fn is_exact(&self) -> bool {
        self.residual.is_zero()
    }

    pub fn xi_f64(&self) -> Vec<f64> {
        self.xi.iter().map(Scalar::to_f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Differential {
    pub dim: usize,
    /// One entry per chart location, in vertex order.
    pub local: Vec<LocalDifferential>,
}

impl Differential {
    pub fn get(&self, vertex: usize) -> Option<&LocalDifferential> {
        self.local
            .binary_search_by(|l| l.vertex.cmp(&vertex))
            .ok()
            .map(|i| &self.local[i])
    }

    pub fn max_residual(&self) -> f64 {
        self.local.iter().map(|l| l.residual.to_f64()).fold(0.0, f64::max)
    }
}

/// Chebyshev fit of the edge slopes of f at every chart location.
pub fn differential(graph: &MetricGraph, f: &VertexFunction, chart: &Chart) -> Differential {
    let local = chart
        .locations
        .par_iter()
        .map(|&x| {
            let rows = chart.gradient.exact_directions(x);
            let rhs: Vec<Rational> = chart.gradient.edges[x]
                .iter()
                .map(|&e| outward_slope::<Rational>(graph, f, x, e))
                .collect();
            let (xi, residual) = chebyshev(rows, &rhs, chart.dim());
            let norm = chart.gradient.eval_exact(x, &xi);
            LocalDifferential {
                vertex: x,
                xi,
                residual,
                norm,
            }
        })
        .collect();
    Differential { dim: chart.dim(), local }
}

/// Lexicographically least minimizer of `max_i |rows_i·ξ − rhs_i|`. The rows
/// must span, which bounds the optimal face.
pub(crate) fn chebyshev(rows: &[Vec<Rational>], rhs: &[Rational], dim: usize) -> (Vec<Rational>, Rational) {
    if let Some(xi) = consistent_solution(rows, rhs, dim) {
        return (xi, Rational::zero());
    }
    // variables: t, ξ⁺ (dim), ξ⁻ (dim)
    let n = 1 + 2 * dim;
    let mut lp = LinearProgram::new(n);
    for (w, s) in rows.iter().zip(rhs) {
        let mut up = vec![(0, -Rational::one())];
        let mut down = vec![(0, -Rational::one())];
        for k in 0..dim {
            if !w[k].is_zero() {
                up.push((1 + k, w[k].clone()));
                up.push((1 + dim + k, -w[k].clone()));
                down.push((1 + k, -w[k].clone()));
                down.push((1 + dim + k, w[k].clone()));
            }
        }
        lp.constraint(up, Relation::Le, s.clone());
        lp.constraint(down, Relation::Le, -s.clone());
    }
    let mut c = vec![Rational::zero(); n];
    c[0] = Rational::one();
    lp.minimize(c);
    let (_, t) = lp.solve().optimal().expect("Chebyshev fit is feasible and bounded below");
    lp.constraint(vec![(0, Rational::one())], Relation::Eq, t.clone());
    let mut xi = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut c = vec![Rational::zero(); n];
        c[1 + k] = Rational::one();
        c[1 + dim + k] = -Rational::one();
        lp.minimize(c);
        let value = match lp.solve() {
            LpOutcome::Optimal { value, .. } => value,
            other => unreachable!("optimal face is bounded when the rows span: {other:?}"),
        };
        lp.constraint(
            vec![(1 + k, Rational::one()), (1 + dim + k, -Rational::one())],
            Relation::Eq,
            value.clone(),
        );
        xi.push(value);
    }
    (xi, t)
}

fn consistent_solution(rows: &[Vec<Rational>], rhs: &[Rational], dim: usize) -> Option<Vec<Rational>> {
    let mut basis: Vec<usize> = Vec::with_capacity(dim);
    let mut picked: Vec<Vec<Rational>> = Vec::with_capacity(dim);
    for (i, w) in rows.iter().enumerate() {
        picked.push(w.clone());
        if linalg::rank(&picked) == picked.len() {
            basis.push(i);
            if basis.len() == dim {
                break;
            }
        } else {
            picked.pop();
        }
    }
    if basis.len() < dim {
        return None;
    }
    let b: Vec<Rational> = basis.iter().map(|&i| rhs[i].clone()).collect();
    let xi = linalg::solve(&picked, &b)?;
    rows.iter().zip(rhs).all(|(w, s)| dot(w, &xi) == *s).then_some(xi)
}

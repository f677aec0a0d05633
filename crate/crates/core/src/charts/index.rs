use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::{dot, CanonicalGradient};
use crate::scalar::{Rational, Scalar};
use crate::solver::linalg;

/// `I(φ)(x) = min_{|ξ| = 1} Φ^x(ξ)` per vertex; 0 exactly when `W_x` has
/// rank below N.
pub fn independence_index(cg: &CanonicalGradient) -> Vec<f64> {
    (0..cg.directions.len())
        .into_par_iter()
        .map(|x| {
            if !cg.is_norm(x) {
                0.0
            } else {
                1.0 / polytope_radius(cg.exact_directions(x), cg.dim)
            }
        })
        .collect()
}

/// Largest Euclidean norm over `{ξ : |ξ·w| ≤ 1 for w ∈ rows}`, attained at a
/// vertex of the polytope. Infinite when the rows do not span.
pub fn polytope_radius(rows: &[Vec<Rational>], dim: usize) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    match ball_vertices(rows, dim) {
        None => f64::INFINITY,
        Some(vs) => vs
            .iter()
            .map(|v| dot(v, v))
            .fold(Rational::zero(), Scalar::max_of)
            .to_f64()
            .sqrt(),
    }
}

/// Vertices of the unit ball `{ξ : |ξ·w| ≤ 1 for w ∈ rows}` of a polytope
/// norm, both signs included and sorted. `None` when the rows do not span,
/// since the ball is then unbounded.
pub fn ball_vertices(rows: &[Vec<Rational>], dim: usize) -> Option<Vec<Vec<Rational>>> {
    let mut rows: Vec<Vec<Rational>> = rows
        .iter()
        .filter(|w| w.iter().any(|a| !a.is_zero()))
        .map(|w| {
            // sign-normalize so ±w collapse
            let lead = w.iter().find(|a| !a.is_zero()).expect("nonzero row");
            if lead.is_negative() {
                w.iter().map(|a| -a).collect()
            } else {
                w.clone()
            }
        })
        .collect();
    rows.sort();
    rows.dedup();
    if dim == 0 {
        return Some(Vec::new());
    }
    if linalg::rank(&rows) < dim {
        return None;
    }
    let one = Rational::one();
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(dim);
    subsets(rows.len(), dim, 0, &mut pick, &mut |idx| {
        let a: Vec<Vec<Rational>> = idx.iter().map(|&i| rows[i].clone()).collect();
        // the polytope is symmetric, so the first sign can stay +1
        for mask in 0..(1usize << (dim - 1)) {
            let b: Vec<Rational> = (0..dim)
                .map(|k| if k > 0 && mask >> (k - 1) & 1 == 1 { -one.clone() } else { one.clone() })
                .collect();
            let Some(xi) = linalg::solve(&a, &b) else { return };
            if rows.iter().all(|w| dot(w, &xi).abs_val() <= one) {
                out.push(xi.iter().map(|c| -c).collect());
                out.push(xi);
            }
        }
    });
    out.sort();
    out.dedup();
    Some(out)
}

fn subsets(n: usize, k: usize, start: usize, pick: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if pick.len() == k {
        visit(pick);
        return;
    }
    for i in start..n {
        if n - i < k - pick.len() {
            break;
        }
        pick.push(i);
        subsets(n, k, i + 1, pick, visit);
        pick.pop();
    }
}

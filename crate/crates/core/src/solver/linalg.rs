//! Small exact and floating linear algebra helpers.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use crate::scalar::Rational;

/// Row-reduces `rows` in place to reduced echelon form; returns pivot columns.
fn rref(rows: &mut Vec<Vec<Rational>>) -> Vec<usize> {
    let width = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..width {
        let Some(k) = (r..rows.len()).find(|&k| !rows[k][c].is_zero()) else {
            continue;
        };
        rows.swap(r, k);
        let inv = Rational::one() / &rows[r][c];
        for a in rows[r].iter_mut() {
            *a *= &inv;
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (a, b) in row.iter_mut().zip(&prow) {
                    if !b.is_zero() {
                        *a -= &f * b;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

/// Exact rank of a set of row vectors.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Solves the square system `a x = b` exactly; `None` when singular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            assert_eq!(row.len(), n);
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() < n || pivots.last() == Some(&n) {
        return None;
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

/// Exact inverse of a square matrix.
pub fn inverse(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Basis of the right null space `{x : a x = 0}`.
pub fn null_space(a: &[Vec<Rational>], width: usize) -> Vec<Vec<Rational>> {
    let mut m = a.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..width).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rational::zero(); width];
            x[f] = Rational::one();
            for (r, &p) in pivots.iter().enumerate() {
                x[p] = -m[r][f].clone();
            }
            x
        })
        .collect()
}

/// Solves the symmetric positive semidefinite system `a x = b`, regularizing
/// the diagonal when the factorization fails.
pub fn solve_psd(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let scale = a.diagonal().amax().max(f64::MIN_POSITIVE);
    let mut mu = 0.0;
    loop {
        let mut m = a.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += mu;
        }
        if let Some(ch) = m.cholesky() {
            return ch.solve(b);
        }
        mu = if mu == 0.0 { scale * 1e-14 } else { mu * 10.0 };
        if mu > scale {
            // fall back to the pseudo-inverse
            let eig = a.clone().symmetric_eigen();
            let tol = eig.eigenvalues.amax() * 1e-12;
            let mut x = DVector::zeros(b.len());
            for (k, &l) in eig.eigenvalues.iter().enumerate() {
                if l > tol {
                    let v = eig.eigenvectors.column(k);
                    x += v * (v.dot(b) / l);
                }
            }
            return x;
        }
    }
}

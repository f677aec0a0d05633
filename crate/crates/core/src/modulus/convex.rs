//! Dual ascent for p > 1.
//!
//! Over multipliers λ ≥ 0 on the active curves, maximize
//! `g(λ) = Σλ − (1/q) Σ_e c_e u_e^q` with `u = Σ λ_γ a_γ` and
//! `c_e = (pσ_e)^{1−q}`. The primal density is `ρ_e = c_e u_e^{q−1}`, the
//! gradient is `1 − a_γ·ρ`, and at the optimum `Σλ = p·Mod`.

use nalgebra::{DMatrix, DVector};

use super::program::Program;
use crate::solver::linalg::solve_psd;

pub(crate) struct Dual {
    pub q: f64,
    pub c: Vec<f64>,
}

impl Dual {
    pub fn new(prog: &Program, p: f64) -> Self {
        let q = p / (p - 1.0);
        let c = prog.sigma.iter().map(|&s| (p * s).powf(1.0 - q)).collect();
        Self { q, c }
    }

    pub fn rho(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.c)
            .map(|(&u, &c)| if u > 0.0 { c * u.powf(self.q - 1.0) } else { 0.0 })
            .collect()
    }

    pub fn value(&self, lambda: &[f64], u: &[f64]) -> f64 {
        let s: f64 = lambda.iter().sum();
        let e: f64 = u
            .iter()
            .zip(&self.c)
            .map(|(&u, &c)| if u > 0.0 { c * u.powf(self.q) } else { 0.0 })
            .sum();
        s - e / self.q
    }

    /// Exact maximization of `g` along coordinate `j`.
    pub fn coordinate_step(&self, prog: &Program, lambda: &mut [f64], u: &mut [f64], j: usize) {
        let row = &prog.rows[j];
        let deriv = |t: f64| -> f64 {
            1.0 - row
                .iter()
                .map(|&(k, a)| {
                    let v = u[k] + t * a;
                    if v > 0.0 {
                        a * self.c[k] * v.powf(self.q - 1.0)
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
        };
        let lo0 = -lambda[j];
        if deriv(lo0) <= 0.0 {
            let t = lo0;
            apply(row, lambda, u, j, t);
            return;
        }
        let mut lo = lo0;
        let mut hi = lambda[j].max(1.0);
        while deriv(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if deriv(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        apply(row, lambda, u, j, 0.5 * (lo + hi));
    }

    /// Projected Newton ascent to a projected-gradient tolerance `tol`.
    /// Returns the number of iterations used.
    pub fn solve(&self, prog: &Program, lambda: &mut Vec<f64>, tol: f64, max_iter: usize) -> usize {
        let m = prog.len();
        lambda.resize(m, 0.0);
        let mut u = prog.usage(lambda);
        for it in 0..max_iter {
            let rho = self.rho(&u);
            let grad: Vec<f64> = (0..m).map(|j| 1.0 - prog.dot(j, &rho)).collect();
            let scale = 1.0 + lambda.iter().sum::<f64>();
            let pg = (0..m)
                .map(|j| if lambda[j] > 0.0 { grad[j].abs() } else { grad[j].max(0.0) })
                .fold(0.0, f64::max);
            if pg <= tol {
                return it;
            }
            let eps = 1e-12 * scale;
            let free: Vec<usize> = (0..m).filter(|&j| !(lambda[j] <= eps && grad[j] < 0.0)).collect();
            let umax = u.iter().cloned().fold(0.0, f64::max);
            let floor = (umax * 1e-10).max(f64::MIN_POSITIVE);
            let w: Vec<f64> = u
                .iter()
                .zip(&self.c)
                .map(|(&ue, &c)| (self.q - 1.0) * c * ue.max(floor).powf(self.q - 2.0))
                .collect();
            let nf = free.len();
            let mut h = DMatrix::<f64>::zeros(nf, nf);
            // accumulate A_F diag(w) A_F^T through per-edge incidence lists
            let mut by_edge: Vec<Vec<(usize, f64)>> = vec![Vec::new(); prog.pos.len()];
            for (fi, &j) in free.iter().enumerate() {
                for &(k, a) in &prog.rows[j] {
                    by_edge[k].push((fi, a));
                }
            }
            for (k, list) in by_edge.iter().enumerate() {
                for &(i, ai) in list {
                    for &(jj, aj) in list {
                        h[(i, jj)] += w[k] * ai * aj;
                    }
                }
            }
            let d = DVector::from_iterator(nf, free.iter().map(|&j| grad[j]));
            let s = solve_psd(&h, &d);
            let g0 = self.value(lambda, &u);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let mut trial = lambda.clone();
                for (fi, &j) in free.iter().enumerate() {
                    trial[j] = (lambda[j] + t * s[fi]).max(0.0);
                }
                let tu = prog.usage(&trial);
                let g1 = self.value(&trial, &tu);
                let lin: f64 = (0..m).map(|j| grad[j] * (trial[j] - lambda[j])).sum();
                if g1 >= g0 + 1e-4 * lin && lin > 0.0 {
                    *lambda = trial;
                    u = tu;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // Newton stalled: a sweep of exact coordinate maximizations
                // always makes progress while the projected gradient is nonzero
                for j in 0..m {
                    self.coordinate_step(prog, lambda, &mut u, j);
                }
                u = prog.usage(lambda);
            }
        }
        max_iter
    }
}

fn apply(row: &[(usize, f64)], lambda: &mut [f64], u: &mut [f64], j: usize, t: f64) {
    let new = (lambda[j] + t).max(0.0);
    let t = new - lambda[j];
    lambda[j] = new;
    for &(k, a) in row {
        u[k] = (u[k] + t * a).max(0.0);
    }
}

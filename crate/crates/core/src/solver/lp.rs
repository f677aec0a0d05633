//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! All variables are nonnegative. Sizes handled here are small (tens of rows,
//! a few hundred columns), so a dense tableau is adequate.

use num_traits::{One, Signed, Zero};

use crate::scalar::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    n: usize,
    objective: Vec<Rational>,
    rows: Vec<(Vec<(usize, Rational)>, Relation, Rational)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Vec<Rational>, Rational)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// Minimize 0 over `x >= 0` in R^n until an objective is set.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            objective: vec![Rational::zero(); n],
            rows: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn minimize(&mut self, c: Vec<Rational>) -> &mut Self {
        assert_eq!(c.len(), self.n);
        self.objective = c;
        self
    }

    /// Sparse row `Σ coeffs · x (rel) rhs`; repeated indices are summed.
    pub fn constraint(&mut self, coeffs: Vec<(usize, Rational)>, rel: Relation, rhs: Rational) -> &mut Self {
        assert!(coeffs.iter().all(|(j, _)| *j < self.n));
        self.rows.push((coeffs, rel, rhs));
        self
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective)
    }

    /// Lexicographically least optimal solution: minimize the objective, then
    /// x₀, x₁, … over the optimal face in turn.
    pub fn solve_lex(&self) -> LpOutcome {
        let (mut x, value) = match self.solve() {
            LpOutcome::Optimal { x, value } => (x, value),
            other => return other,
        };
        let mut lp = self.clone();
        let obj: Vec<(usize, Rational)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j, c.clone()))
            .collect();
        lp.constraint(obj, Relation::Eq, value.clone());
        for j in 0..self.n {
            if !x[j].is_zero() {
                let mut c = vec![Rational::zero(); self.n];
                c[j] = Rational::one();
                lp.minimize(c);
                match lp.solve() {
                    LpOutcome::Optimal { x: y, .. } => x = y,
                    _ => unreachable!("optimal face is nonempty and bounded below"),
                }
            }
            lp.constraint(vec![(j, Rational::one())], Relation::Eq, x[j].clone());
        }
        LpOutcome::Optimal { x, value }
    }
}

struct Tableau {
    /// m rows of width `cols + 1`; the last entry is the right-hand side.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    n: usize,
    cols: usize,
    artificial_from: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let slacks = lp.rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let mut rows = Vec::with_capacity(m);
        let mut needs_artificial = Vec::with_capacity(m);
        let mut slack_col = lp.n;
        let mut slack_of = vec![None; m];
        for (i, (coeffs, rel, rhs)) in lp.rows.iter().enumerate() {
            let mut row = vec![Rational::zero(); lp.n + slacks];
            for (j, a) in coeffs {
                row[*j] += a;
            }
            let mut rhs = rhs.clone();
            let mut rel = *rel;
            if rel != Relation::Eq {
                row[slack_col] = if rel == Relation::Le { Rational::one() } else { -Rational::one() };
                slack_of[i] = Some(slack_col);
                slack_col += 1;
            }
            if rhs.is_negative() {
                for a in row.iter_mut() {
                    *a = -a.clone();
                }
                rhs = -rhs;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            needs_artificial.push(rel != Relation::Le);
            rows.push((row, rhs));
        }
        let artificial_from = lp.n + slacks;
        let n_art = needs_artificial.iter().filter(|&&b| b).count();
        let cols = artificial_from + n_art;
        let mut t = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut art = artificial_from;
        for (i, (mut row, rhs)) in rows.into_iter().enumerate() {
            row.resize(cols, Rational::zero());
            if needs_artificial[i] {
                row[art] = Rational::one();
                basis.push(art);
                art += 1;
            } else {
                basis.push(slack_of[i].expect("Le rows carry a slack"));
            }
            row.push(rhs);
            t.push(row);
        }
        Self {
            t,
            basis,
            n: lp.n,
            cols,
            artificial_from,
        }
    }

    fn pivot(&mut self, r: usize, c: usize, z: &mut [Rational]) {
        let inv = Rational::one() / &self.t[r][c];
        for a in self.t[r].iter_mut() {
            if !a.is_zero() {
                *a *= &inv;
            }
        }
        let prow = self.t[r].clone();
        let nz: Vec<usize> = (0..prow.len()).filter(|&j| !prow[j].is_zero()).collect();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                row[j] -= &f * &prow[j];
            }
        }
        if !z[c].is_zero() {
            let f = z[c].clone();
            for &j in &nz {
                z[j] -= &f * &prow[j];
            }
        }
        self.basis[r] = c;
    }

    /// Reduced-cost row for cost vector `c` (indexed by column) under the
    /// current basis; last entry is minus the objective value.
    fn reduced(&self, c: &[Rational]) -> Vec<Rational> {
        let mut z: Vec<Rational> = c.to_vec();
        z.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            if c[b].is_zero() {
                continue;
            }
            for (j, a) in self.t[i].iter().enumerate() {
                if !a.is_zero() {
                    z[j] -= &c[b] * a;
                }
            }
        }
        z
    }

    /// Bland's rule iterations. Returns false when unbounded.
    fn iterate(&mut self, z: &mut [Rational], allowed: usize) -> bool {
        let rhs = self.cols;
        loop {
            let Some(c) = (0..allowed).find(|&j| z[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c, z),
            }
        }
    }

    fn run(mut self, objective: &[Rational]) -> LpOutcome {
        let rhs = self.cols;
        if self.cols > self.artificial_from {
            let mut c1 = vec![Rational::zero(); self.cols];
            for a in c1[self.artificial_from..].iter_mut() {
                *a = Rational::one();
            }
            let mut z = self.reduced(&c1);
            self.iterate(&mut z, self.cols);
            if !z[rhs].is_zero() {
                return LpOutcome::Infeasible;
            }
            // drive remaining artificials out of the basis, dropping redundant rows
            let mut i = 0;
            while i < self.t.len() {
                if self.basis[i] >= self.artificial_from {
                    match (0..self.artificial_from).find(|&j| !self.t[i][j].is_zero()) {
                        Some(j) => self.pivot(i, j, &mut z),
                        None => {
                            self.t.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        let mut c2 = vec![Rational::zero(); self.cols];
        c2[..self.n].clone_from_slice(objective);
        let mut z = self.reduced(&c2);
        if !self.iterate(&mut z, self.artificial_from) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.t[i][rhs].clone();
            }
        }
        LpOutcome::Optimal { x, value: -z[rhs].clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational as r;

    #[test]
    fn small_minimization() {
        // min x + y  s.t. x + 2y >= 2, 3x + y >= 3
        let mut lp = LinearProgram::new(2);
        lp.minimize(vec![r(1, 1), r(1, 1)]);
        lp.constraint(vec![(0, r(1, 1)), (1, r(2, 1))], Relation::Ge, r(2, 1));
        lp.constraint(vec![(0, r(3, 1)), (1, r(1, 1))], Relation::Ge, r(3, 1));
        let (x, v) = lp.solve().optimal().unwrap();
        assert_eq!(x, vec![r(4, 5), r(3, 5)]);
        assert_eq!(v, r(7, 5));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.constraint(vec![(0, r(1, 1))], Relation::Le, r(-1, 1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let mut lp = LinearProgram::new(1);
        lp.minimize(vec![r(-1, 1)]);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_with_redundant_rows() {
        let mut lp = LinearProgram::new(2);
        lp.minimize(vec![r(1, 1), r(0, 1)]);
        lp.constraint(vec![(0, r(1, 1)), (1, r(1, 1))], Relation::Eq, r(1, 1));
        lp.constraint(vec![(0, r(2, 1)), (1, r(2, 1))], Relation::Eq, r(2, 1));
        let (x, v) = lp.solve().optimal().unwrap();
        assert_eq!(v, r(0, 1));
        assert_eq!(x, vec![r(0, 1), r(1, 1)]);
    }

    #[test]
    fn lexicographic_tie_break() {
        // min x + y s.t. x + y >= 1: every point of the segment is optimal
        let mut lp = LinearProgram::new(2);
        lp.minimize(vec![r(1, 1), r(1, 1)]);
        lp.constraint(vec![(0, r(1, 1)), (1, r(1, 1))], Relation::Ge, r(1, 1));
        let (x, _) = lp.solve_lex().optimal().unwrap();
        assert_eq!(x, vec![r(0, 1), r(1, 1)]);
    }
}

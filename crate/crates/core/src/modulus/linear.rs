//! p = 1: the program is a linear program, solved exactly.

use num_traits::{One, Zero};

use super::program::Program;
use crate::scalar::{rational_from_f64, Rational};
use crate::solver::{LinearProgram, Relation};

fn rows(prog: &Program) -> Vec<Vec<(usize, Rational)>> {
    prog.rows
        .iter()
        .map(|r| r.iter().map(|&(k, a)| (k, rational_from_f64(a))).collect())
        .collect()
}

/// Optimal density of the restricted program; the lexicographically least
/// one when `lex` is set.
pub(crate) fn primal(prog: &Program, lex: bool) -> Vec<Rational> {
    let mut lp = LinearProgram::new(prog.pos.len());
    lp.minimize(prog.sigma.iter().map(|&s| rational_from_f64(s)).collect());
    for r in rows(prog) {
        lp.constraint(r, Relation::Ge, Rational::one());
    }
    let out = if lex { lp.solve_lex() } else { lp.solve() };
    out.optimal().expect("ρ large is feasible and cost is bounded below").0
}

/// Optimal multipliers: max Σλ subject to Σ λ_γ a_γ(e) ≤ σ(e).
pub(crate) fn multipliers(prog: &Program) -> Vec<Rational> {
    let m = prog.len();
    let mut lp = LinearProgram::new(m);
    lp.minimize(vec![-Rational::one(); m]);
    let mut by_edge: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); prog.pos.len()];
    for (j, r) in rows(prog).into_iter().enumerate() {
        for (k, a) in r {
            by_edge[k].push((j, a));
        }
    }
    for (k, list) in by_edge.into_iter().enumerate() {
        if !list.is_empty() {
            lp.constraint(list, Relation::Le, rational_from_f64(prog.sigma[k]));
        }
    }
    let (x, _) = lp
        .solve()
        .optimal()
        .expect("the dual of a feasible bounded program is solvable");
    x.into_iter().map(|v| if v < Rational::zero() { Rational::zero() } else { v }).collect()
}

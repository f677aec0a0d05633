//! Exact-arithmetic certification for small listed families.
//!
//! p = 1 is an exact LP. For p = 2 the KKT system is linear in the
//! multipliers once the tight set is known, and is solved as an LP
//! feasibility problem. For other p the float density is snapped to nearby
//! rationals and the KKT conditions are checked exactly, which succeeds when
//! `ρ^{p−1}` is rational.

use num_traits::{One, Zero};

use super::linear;
use super::program::Program;
use super::{solve_float, ActiveCurve, ModulusOptions, ModulusSolution, ModulusStatus, Oracle, EXACT_MAX_CURVES};
use crate::error::{Error, Result};
use crate::mmspace::{enumerate_curves, Budget, Curve, CurveFamily, MetricGraph};
use crate::scalar::{rational_from_f64, rational_pow, rational_to_f64, small_fraction, snap_to_rational, Rational};
use crate::solver::{LinearProgram, Relation};

#[derive(Clone, Debug, PartialEq)]
pub struct ExactCertificate {
    /// Density per edge.
    pub rho: Vec<Rational>,
    /// Curves with positive multiplier.
    pub multipliers: Vec<(Curve, Rational)>,
    /// `Σ σ ρ^p` when it is rational.
    pub value: Option<Rational>,
    /// KKT conditions verified exactly, so `rho` is the optimum.
    pub optimal: bool,
    pub note: String,
}

pub(crate) fn solve(graph: &MetricGraph, oracle: &Oracle, p: f64, opts: &ModulusOptions) -> Result<ModulusSolution> {
    let curves = match oracle {
        Oracle::Listed(c) => c.clone(),
        Oracle::Walks(conn) => enumerate_curves(
            graph,
            &CurveFamily::Connector(conn.clone()),
            Budget {
                max_steps: conn.max_steps,
                max_count: EXACT_MAX_CURVES,
            },
        )
        .map_err(|e| match e {
            Error::Budget(_) => Error::ExactUnavailable(format!("family has more than {EXACT_MAX_CURVES} curves")),
            other => other,
        })?,
    };
    if curves.len() > EXACT_MAX_CURVES {
        return Err(Error::ExactUnavailable(format!(
            "family has {} curves, exact mode handles at most {EXACT_MAX_CURVES}",
            curves.len()
        )));
    }
    let listed = Oracle::Listed(curves.clone());
    let mut sol = solve_float(graph, &listed, p, opts)?;
    if sol.status != ModulusStatus::Solved {
        sol.exact = Some(ExactCertificate {
            rho: sol.rho.iter().map(|&r| rational_from_f64(r)).collect(),
            multipliers: Vec::new(),
            value: Some(Rational::zero()),
            optimal: true,
            note: "zero modulus".into(),
        });
        return Ok(sol);
    }
    let mut prog = Program::new(graph);
    for c in curves {
        prog.add(graph, c);
    }
    let cert = if p == 1.0 {
        certify_linear(graph, &prog)
    } else {
        let rho_f: Vec<f64> = prog.pos.iter().map(|&e| sol.rho[e]).collect();
        let kkt = if p == 2.0 { certify_quadratic(graph, &prog, &rho_f) } else { None };
        kkt.unwrap_or_else(|| certify_snapped(graph, &prog, p, &rho_f))
    };
    if cert.optimal {
        sol.rho = cert.rho.iter().map(rational_to_f64).collect();
        sol.value = match &cert.value {
            Some(v) => rational_to_f64(v),
            None => prog.pos.iter().zip(&prog.sigma).map(|(&e, s)| s * sol.rho[e].powf(p)).sum(),
        };
        sol.active = cert
            .multipliers
            .iter()
            .map(|(c, l)| ActiveCurve {
                curve: c.clone(),
                lambda: rational_to_f64(l),
            })
            .collect();
        sol.dual_value = sol.value;
        sol.duality_gap = 0.0;
        sol.kkt_residual = 0.0;
        sol.min_line_integral = prog
            .rows
            .iter()
            .map(|r| r.iter().map(|&(k, a)| a * sol.rho[prog.pos[k]]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
    }
    sol.exact = Some(cert);
    Ok(sol)
}

fn rows_exact(prog: &Program) -> Vec<Vec<(usize, Rational)>> {
    prog.rows
        .iter()
        .map(|r| r.iter().map(|&(k, a)| (k, rational_from_f64(a))).collect())
        .collect()
}

fn full_rho(graph: &MetricGraph, prog: &Program, rho_pos: &[Rational]) -> Vec<Rational> {
    (0..graph.edge_count())
        .map(|e| match prog.slot[e] {
            Some(k) => rho_pos[k].clone(),
            None => Rational::one() / rational_from_f64(graph.edge(e).len),
        })
        .collect()
}

fn dot(row: &[(usize, Rational)], x: &[Rational]) -> Rational {
    row.iter().fold(Rational::zero(), |acc, (k, a)| acc + a * &x[*k])
}

fn positive_multipliers(prog: &Program, idx: &[usize], lambda: &[Rational]) -> Vec<(Curve, Rational)> {
    idx.iter()
        .zip(lambda)
        .filter(|(_, l)| *l > &Rational::zero())
        .map(|(&j, l)| (prog.curves[j].clone(), l.clone()))
        .collect()
}

fn certify_linear(graph: &MetricGraph, prog: &Program) -> ExactCertificate {
    let rho = linear::primal(prog, true);
    let lambda = linear::multipliers(prog);
    let sigma: Vec<Rational> = prog.sigma.iter().map(|&s| rational_from_f64(s)).collect();
    let value = rho.iter().zip(&sigma).fold(Rational::zero(), |acc, (r, s)| acc + r * s);
    let dual = lambda.iter().fold(Rational::zero(), |acc, l| acc + l);
    let idx: Vec<usize> = (0..prog.len()).collect();
    ExactCertificate {
        optimal: value == dual,
        multipliers: positive_multipliers(prog, &idx, &lambda),
        rho: full_rho(graph, prog, &rho),
        value: Some(value),
        note: "exact linear program with lexicographic tie-break".into(),
    }
}

/// Checks primal feasibility of `rho_pos` against every row.
fn feasible(rows: &[Vec<(usize, Rational)>], rho_pos: &[Rational]) -> bool {
    rows.iter().all(|r| dot(r, rho_pos) >= Rational::one())
}

/// Finds λ ≥ 0 on the tight rows `idx` with `Σ λ_j a_j(e) = target(e)` for
/// every σ-positive edge.
fn stationary_multipliers(
    rows: &[Vec<(usize, Rational)>],
    idx: &[usize],
    target: &[Rational],
) -> Option<Vec<Rational>> {
    let mut lp = LinearProgram::new(idx.len());
    let mut by_edge: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); target.len()];
    for (v, &j) in idx.iter().enumerate() {
        for (k, a) in &rows[j] {
            by_edge[*k].push((v, a.clone()));
        }
    }
    for (k, list) in by_edge.into_iter().enumerate() {
        lp.constraint(list, Relation::Eq, target[k].clone());
    }
    lp.solve().optimal().map(|(x, _)| x)
}

fn certify_quadratic(graph: &MetricGraph, prog: &Program, rho_f: &[f64]) -> Option<ExactCertificate> {
    let rows = rows_exact(prog);
    let tight: Vec<usize> = (0..prog.len()).filter(|&j| prog.dot(j, rho_f) <= 1.0 + 1e-7).collect();
    let two_sigma: Vec<Rational> = prog.sigma.iter().map(|&s| rational_from_f64(s) * Rational::from_integer(2.into())).collect();
    // Σ_j λ_j M_ij = 1 on the tight set, with M = A diag(1/2σ) Aᵀ
    let n = tight.len();
    let mut lp = LinearProgram::new(n);
    for &i in &tight {
        let mut coeffs = Vec::new();
        for (v, &j) in tight.iter().enumerate() {
            let mut m = Rational::zero();
            for (k, a) in &rows[i] {
                if let Some((_, b)) = rows[j].iter().find(|(kk, _)| kk == k) {
                    m += a * b / &two_sigma[*k];
                }
            }
            if !m.is_zero() {
                coeffs.push((v, m));
            }
        }
        lp.constraint(coeffs, Relation::Eq, Rational::one());
    }
    let (lambda, _) = lp.solve().optimal()?;
    let mut u = vec![Rational::zero(); prog.pos.len()];
    for (v, &j) in tight.iter().enumerate() {
        if !lambda[v].is_zero() {
            for (k, a) in &rows[j] {
                u[*k] += &lambda[v] * a;
            }
        }
    }
    let rho: Vec<Rational> = u.iter().zip(&two_sigma).map(|(ue, s)| ue / s).collect();
    if !feasible(&rows, &rho) {
        return None;
    }
    let value = rho
        .iter()
        .zip(&prog.sigma)
        .fold(Rational::zero(), |acc, (r, &s)| acc + rational_from_f64(s) * r * r);
    Some(ExactCertificate {
        multipliers: positive_multipliers(prog, &tight, &lambda),
        rho: full_rho(graph, prog, &rho),
        value: Some(value),
        optimal: true,
        note: "linear KKT system solved exactly".into(),
    })
}

fn certify_snapped(graph: &MetricGraph, prog: &Program, p: f64, rho_f: &[f64]) -> ExactCertificate {
    let rows = rows_exact(prog);
    let rho: Vec<Rational> = rho_f.iter().map(|&r| snap_to_rational(r, 1_000_000)).collect();
    let powers = |exp: f64| -> Option<Vec<Rational>> {
        let (num, den) = small_fraction(exp, 64)?;
        rho.iter().map(|r| rational_pow(r, num, den)).collect()
    };
    let value = powers(p).map(|pw| {
        pw.iter()
            .zip(&prog.sigma)
            .fold(Rational::zero(), |acc, (r, &s)| acc + rational_from_f64(s) * r)
    });
    let mut cert = ExactCertificate {
        rho: full_rho(graph, prog, &rho),
        multipliers: Vec::new(),
        value,
        optimal: false,
        note: String::new(),
    };
    if !feasible(&rows, &rho) {
        cert.note = "snapped density is not admissible".into();
        return cert;
    }
    let Some(pw) = powers(p - 1.0) else {
        cert.note = format!("ρ^{} is irrational for the snapped density; optimality not certified", p - 1.0);
        return cert;
    };
    let pr = rational_from_f64(p);
    let target: Vec<Rational> = pw
        .iter()
        .zip(&prog.sigma)
        .map(|(r, &s)| &pr * rational_from_f64(s) * r)
        .collect();
    let tight: Vec<usize> = (0..prog.len()).filter(|&j| dot(&rows[j], &rho) == Rational::one()).collect();
    match stationary_multipliers(&rows, &tight, &target) {
        Some(lambda) => {
            cert.multipliers = positive_multipliers(prog, &tight, &lambda);
            cert.optimal = true;
            cert.note = "snapped density satisfies the KKT conditions exactly".into();
        }
        None => cert.note = "no nonnegative multipliers for the snapped density".into(),
    }
    cert
}

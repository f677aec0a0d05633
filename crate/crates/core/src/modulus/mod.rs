//! p-modulus of curve families.
//!
//! `Mod_p(Γ) = min Σ_e σ(e) ρ(e)^p` over densities with `∫_γ ρ ≥ 1` for every
//! γ ∈ Γ, solved by constraint generation: an active set of curves is grown
//! by a shortest-path separation oracle until the restricted optimum is
//! admissible for the whole family.
//!
//! σ-null edges cost nothing, so they get `ρ = 1/ℓ`: every curve through one
//! is satisfied for free and never enters the program. Such edges are
//! reported as degenerate.

mod convex;
mod exact;
mod linear;
mod oracle;
mod program;

use crate::error::{Error, Result};
use crate::mmspace::{line_integral, Budget, Curve, CurveFamily, MetricGraph};
use crate::scalar::rational_to_f64;

pub use exact::ExactCertificate;
pub(crate) use oracle::Oracle;
use program::Program;

#[derive(Clone, Copy, Debug)]
pub struct ModulusProblem<'a> {
    pub graph: &'a MetricGraph,
    pub family: &'a CurveFamily,
    pub p: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct ModulusOptions {
    /// Admissibility tolerance: stop once every curve has ρ-length ≥ 1 − tol.
    pub tol_feas: f64,
    /// Relative duality-gap target.
    pub gap_rel: f64,
    pub max_constraints: usize,
    /// Curves added per separation round.
    pub batch: usize,
    /// Enumeration budget for families scanned exhaustively.
    pub budget: Budget,
    pub exact: bool,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        Self {
            tol_feas: 1e-9,
            gap_rel: 1e-6,
            max_constraints: 10_000,
            batch: 16,
            budget: Budget::default(),
            exact: false,
        }
    }
}

/// Largest family handled in exact mode.
pub const EXACT_MAX_CURVES: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub enum ModulusStatus {
    Solved,
    /// Every curve meets a σ-null edge; `witness` is one such curve.
    Zero { witness: Curve },
    /// The family has no curves; the modulus is 0 by convention.
    Empty,
}

#[derive(Clone, Debug)]
pub struct ActiveCurve {
    pub curve: Curve,
    pub lambda: f64,
}

#[derive(Clone, Debug)]
pub struct ModulusSolution {
    pub p: f64,
    pub status: ModulusStatus,
    pub value: f64,
    /// Optimal density per edge (σ-null edges carry `1/ℓ`).
    pub rho: Vec<f64>,
    /// Curves with positive multiplier.
    pub active: Vec<ActiveCurve>,
    pub dual_value: f64,
    pub duality_gap: f64,
    pub kkt_residual: f64,
    /// Minimum of the ρ-length over the whole family.
    pub min_line_integral: f64,
    pub iterations: usize,
    pub constraints: usize,
    pub degenerate_edges: Vec<usize>,
    pub exact: Option<ExactCertificate>,
}

impl ModulusSolution {
    pub fn lambda_sum(&self) -> f64 {
        self.active.iter().map(|a| a.lambda).sum()
    }

    fn zero(graph: &MetricGraph, p: f64, status: ModulusStatus) -> Self {
        let rho = (0..graph.edge_count())
            .map(|e| {
                let edge = graph.edge(e);
                if edge.is_null() {
                    1.0 / edge.len
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            p,
            status,
            value: 0.0,
            rho,
            active: Vec::new(),
            dual_value: 0.0,
            duality_gap: 0.0,
            kkt_residual: 0.0,
            min_line_integral: f64::NAN,
            iterations: 0,
            constraints: 0,
            degenerate_edges: graph.null_edges().collect(),
            exact: None,
        }
    }
}

pub fn mod_p(problem: &ModulusProblem, opts: &ModulusOptions) -> Result<ModulusSolution> {
    let ModulusProblem { graph, family, p } = *problem;
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::Domain(format!("exponent p must be finite and ≥ 1, got {p}")));
    }
    let oracle = Oracle::new(graph, family, opts.budget)?;
    if opts.exact {
        return exact::solve(graph, &oracle, p, opts);
    }
    solve_float(graph, &oracle, p, opts)
}

fn edge_weights(graph: &MetricGraph, rho: &[f64]) -> Vec<f64> {
    rho.iter().zip(graph.edges()).map(|(r, e)| r * e.len).collect()
}

/// Zero-modulus test through the oracle: weight 1 per σ-null traversal.
fn zero_status(graph: &MetricGraph, oracle: &Oracle) -> Option<ModulusStatus> {
    let w: Vec<f64> = graph.edges().iter().map(|e| if e.is_null() { 1.0 } else { 0.0 }).collect();
    match oracle.separate(graph, &w, 0.0, 0) {
        None => Some(ModulusStatus::Empty),
        Some((_, (c, v))) if v >= 1.0 => Some(ModulusStatus::Zero { witness: c }),
        Some(_) => None,
    }
}

pub(crate) fn solve_float(graph: &MetricGraph, oracle: &Oracle, p: f64, opts: &ModulusOptions) -> Result<ModulusSolution> {
    if let Some(status) = zero_status(graph, oracle) {
        return Ok(ModulusSolution::zero(graph, p, status));
    }
    let mut prog = Program::new(graph);
    let threshold = 1.0 - opts.tol_feas;
    let mut iterations = 0;
    let mut rho_pos = vec![0.0; prog.pos.len()];
    let mut lambda: Vec<f64> = Vec::new();
    let dual = (p > 1.0).then(|| convex::Dual::new(&prog, p));
    let mut stalls = 0;
    let min = loop {
        let rho = prog.full_rho(graph, &rho_pos);
        let (violators, min) = oracle
            .separate(graph, &edge_weights(graph, &rho), threshold, opts.batch)
            .expect("family is nonempty");
        if violators.is_empty() {
            break min;
        }
        let mut added = 0;
        for (c, _) in violators {
            if prog.add(graph, c) {
                added += 1;
                if let Some(d) = &dual {
                    lambda.push(0.0);
                    let mut u = prog.usage(&lambda);
                    d.coordinate_step(&prog, &mut lambda, &mut u, prog.len() - 1);
                }
            }
        }
        if prog.len() > opts.max_constraints {
            return Err(Error::Solver(format!(
                "more than {} generated constraints without reaching admissibility",
                opts.max_constraints
            )));
        }
        if added == 0 {
            stalls += 1;
            if stalls > 3 {
                return Err(Error::Solver(format!(
                    "restricted solve did not converge (minimum ρ-length {:.3e})",
                    min.1
                )));
            }
        }
        iterations += 1;
        match &dual {
            Some(d) => {
                let tol = opts.tol_feas * 1e-3 / (stalls as f64 + 1.0);
                d.solve(&prog, &mut lambda, tol, 500);
                rho_pos = d.rho(&prog.usage(&lambda));
            }
            None => {
                rho_pos = linear::primal(&prog, false).iter().map(rational_to_f64).collect();
            }
        }
    };
    let mut min = min;
    let lambda: Vec<f64> = match &dual {
        Some(_) => lambda,
        None => {
            // re-solve for the lexicographically least density, regenerating
            // constraints until it is admissible for the whole family
            loop {
                rho_pos = linear::primal(&prog, true).iter().map(rational_to_f64).collect();
                let rho = prog.full_rho(graph, &rho_pos);
                let (violators, m) = oracle
                    .separate(graph, &edge_weights(graph, &rho), threshold, opts.batch)
                    .expect("family is nonempty");
                min = m;
                let mut added = false;
                for (c, _) in violators {
                    added |= prog.add(graph, c);
                }
                if !added {
                    break;
                }
                iterations += 1;
            }
            linear::multipliers(&prog).iter().map(rational_to_f64).collect()
        }
    };
    Ok(finish(graph, &prog, p, rho_pos, &lambda, min.1, iterations))
}

fn finish(
    graph: &MetricGraph,
    prog: &Program,
    p: f64,
    rho_pos: Vec<f64>,
    lambda: &[f64],
    min_len: f64,
    iterations: usize,
) -> ModulusSolution {
    let value: f64 = rho_pos.iter().zip(&prog.sigma).map(|(r, s)| s * r.powf(p)).sum();
    let lsum: f64 = lambda.iter().sum();
    let dual_value = if p > 1.0 {
        let d = convex::Dual::new(prog, p);
        d.value(lambda, &prog.usage(lambda))
    } else {
        lsum
    };
    let feasible_value = if min_len < 1.0 { value / min_len.powf(p) } else { value };
    let duality_gap = feasible_value - dual_value;
    let u = prog.usage(lambda);
    let scale = 1.0 + u.iter().cloned().fold(0.0, f64::max);
    let stationarity = if p > 1.0 {
        rho_pos
            .iter()
            .zip(&prog.sigma)
            .zip(&u)
            .map(|((r, s), ue)| (p * s * r.powf(p - 1.0) - ue).abs())
            .fold(0.0, f64::max)
            / scale
    } else {
        // reduced costs σ − Aᵀλ must be ≥ 0, and 0 where ρ > 0
        rho_pos
            .iter()
            .zip(&prog.sigma)
            .zip(&u)
            .map(|((r, s), ue)| {
                let red = s - ue;
                if *r > 0.0 {
                    red.abs()
                } else {
                    (-red).max(0.0)
                }
            })
            .fold(0.0, f64::max)
            / scale
    };
    let feasibility = (1.0 - min_len).max(0.0);
    let complementarity = (0..prog.len())
        .map(|j| lambda[j] * (prog.dot(j, &rho_pos) - 1.0).abs())
        .fold(0.0, f64::max)
        / lsum.max(1.0);
    let active = prog
        .curves
        .iter()
        .zip(lambda)
        .filter(|(_, &l)| l > 0.0)
        .map(|(c, &l)| ActiveCurve {
            curve: c.clone(),
            lambda: l,
        })
        .collect();
    ModulusSolution {
        p,
        status: ModulusStatus::Solved,
        value,
        rho: prog.full_rho(graph, &rho_pos),
        active,
        dual_value,
        duality_gap,
        kkt_residual: stationarity.max(feasibility).max(complementarity),
        min_line_integral: min_len,
        iterations,
        constraints: prog.len(),
        degenerate_edges: graph.null_edges().collect(),
        exact: None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Admissibility {
    /// Every curve has ρ-length ≥ 1 − tol; `curve` attains the minimum.
    Admissible { curve: Curve, min: f64, slack: f64 },
    Violated { curve: Curve, deficit: f64 },
    /// Nothing to check.
    EmptyFamily,
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        !matches!(self, Admissibility::Violated { .. })
    }
}

/// Minimizes the ρ-length over the family (shortest paths for connectors,
/// a scan for listed families) and compares it with 1.
pub fn is_admissible(
    graph: &MetricGraph,
    rho: &[f64],
    family: &CurveFamily,
    budget: Budget,
    tol: f64,
) -> Result<Admissibility> {
    check_density(graph, rho)?;
    let oracle = Oracle::new(graph, family, budget)?;
    let Some((_, (curve, _))) = oracle.separate(graph, &edge_weights(graph, rho), 0.0, 0) else {
        return Ok(Admissibility::EmptyFamily);
    };
    let min = line_integral(graph, rho, &curve)?;
    Ok(if min >= 1.0 - tol {
        Admissibility::Admissible {
            curve,
            min,
            slack: min - 1.0,
        }
    } else {
        Admissibility::Violated {
            curve,
            deficit: 1.0 - min,
        }
    })
}

fn check_density(graph: &MetricGraph, rho: &[f64]) -> Result<()> {
    if rho.len() != graph.edge_count() {
        return Err(Error::Domain(format!(
            "density has {} values for {} edges",
            rho.len(),
            graph.edge_count()
        )));
    }
    if let Some(e) = rho.iter().position(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::Domain(format!(
            "density on edge {} is {}, expected finite and ≥ 0",
            graph.edge(e).id,
            rho[e]
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroCertificate {
    /// Every curve meets one of these σ-null edges.
    NullHittingSet { edges: Vec<usize> },
    /// A curve of the family made only of σ-positive edges.
    PositiveCurve(Curve),
}

/// Decides `Mod_p(Γ) = 0`, which in this model holds exactly when every curve
/// of Γ contains a σ-null edge (for every p).
pub fn mod_zero_check(graph: &MetricGraph, family: &CurveFamily, budget: Budget) -> Result<(bool, ZeroCertificate)> {
    let oracle = Oracle::new(graph, family, budget)?;
    Ok(match zero_status(graph, &oracle) {
        None => {
            let w: Vec<f64> = graph.edges().iter().map(|e| if e.is_null() { 1.0 } else { 0.0 }).collect();
            let (_, (c, _)) = oracle.separate(graph, &w, 0.0, 0).expect("nonempty");
            (false, ZeroCertificate::PositiveCurve(c))
        }
        Some(_) => {
            let edges = match family {
                CurveFamily::Connector(conn) => graph.null_edges().filter(|&e| conn.allows(graph, e)).collect(),
                CurveFamily::Explicit(curves) => {
                    let mut v: Vec<usize> = curves
                        .iter()
                        .flat_map(|c| c.steps().iter().map(|s| s.edge))
                        .filter(|&e| graph.edge(e).is_null())
                        .collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                }
            };
            (true, ZeroCertificate::NullHittingSet { edges })
        }
    })
}

use std::ops::ControlFlow;

use super::WeakGradient;
use crate::error::{Error, Result};
use crate::mmspace::{for_each_simple_path, Budget, Curve, CurveFamily, MetricGraph, VertexFunction};
use crate::modulus::{mod_p, ModulusOptions, ModulusProblem};
use crate::plans::{dual_plan, DualPlan};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct ViolationOptions {
    pub budget: Budget,
    /// The search stops once this many violators avoiding σ-null edges are found.
    pub max_violators: usize,
    /// Relative slack: a violation needs `|Δf| > ∫g·(1 + tol) + tol`. Use 0
    /// with rationals.
    pub tol: f64,
    pub modulus: ModulusOptions,
}

impl Default for ViolationOptions {
    fn default() -> Self {
        Self {
            budget: Budget::default(),
            max_violators: 256,
            tol: 1e-12,
            modulus: ModulusOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ViolationSearch {
    Found {
        plan: DualPlan,
        violators: Vec<Curve>,
        /// Violators through σ-null edges; they form an exceptional family.
        exceptional: usize,
        /// Whether every simple path was examined.
        complete: bool,
    },
    /// Every simple path was examined and none violates off σ-null edges.
    NoViolator { examined: usize, exceptional: usize },
    /// The enumeration was cut short before any violator turned up.
    BudgetExhausted {
        examined: usize,
        exceptional: usize,
        reason: String,
    },
}

impl ViolationSearch {
    pub fn plan(&self) -> Option<&DualPlan> {
        match self {
            ViolationSearch::Found { plan, .. } => Some(plan),
            _ => None,
        }
    }
}

/// Searches simple paths for `|f(γ_1) − f(γ_0)| > ∫_γ g ds` and returns the
/// dual plan of the violators that avoid σ-null edges.
pub fn violating_plan<T: Scalar>(
    graph: &MetricGraph,
    f: &VertexFunction,
    g: &WeakGradient<T>,
    p: f64,
    opts: &ViolationOptions,
) -> Result<ViolationSearch> {
    if g.values.iter().any(|v| *v < T::zero()) {
        return Err(Error::Domain("candidate gradient takes negative values".into()));
    }
    let ge = g.on_edges(graph);
    let tol = T::from_f64(opts.tol);
    let mut violators = Vec::new();
    let mut exceptional = 0usize;
    let mut examined = 0usize;
    let walked = for_each_simple_path(
        graph,
        opts.budget,
        |_| true,
        |c| {
            examined += 1;
            let rise = (T::from_f64(f.value(c.end())) - T::from_f64(f.value(c.start()))).abs_val();
            let integral = c.steps().iter().fold(T::zero(), |acc, s| {
                acc + ge[s.edge].clone() * T::from_f64(graph.edge(s.edge).len)
            });
            let bound = integral.clone() + tol.clone() * (T::one() + integral);
            if rise > bound {
                if c.meets_null_edge(graph) {
                    exceptional += 1;
                } else {
                    violators.push(c.clone());
                    if violators.len() == opts.max_violators {
                        return ControlFlow::Break(());
                    }
                }
            }
            ControlFlow::Continue(())
        },
    );
    let long_paths_possible = opts.budget.max_steps + 1 < graph.vertex_count();
    let (complete, reason) = match walked {
        Ok(_) if violators.len() == opts.max_violators => (false, String::new()),
        Ok(_) if long_paths_possible => (
            false,
            format!("paths longer than {} steps were not examined", opts.budget.max_steps),
        ),
        Ok(_) => (true, String::new()),
        Err(Error::Budget(msg)) => (false, msg),
        Err(e) => return Err(e),
    };
    if violators.is_empty() {
        return Ok(if complete {
            ViolationSearch::NoViolator { examined, exceptional }
        } else {
            ViolationSearch::BudgetExhausted {
                examined,
                exceptional,
                reason,
            }
        });
    }
    let family = CurveFamily::explicit(violators.clone())?;
    let sol = mod_p(
        &ModulusProblem {
            graph,
            family: &family,
            p,
        },
        &opts.modulus,
    )?;
    Ok(ViolationSearch::Found {
        plan: dual_plan(graph, &sol)?,
        violators,
        exceptional,
        complete,
    })
}

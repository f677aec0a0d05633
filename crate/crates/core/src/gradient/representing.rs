use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{minimal_weak_gradient, signed_ratio};
use crate::error::{Error, Result};
use crate::mmspace::{Curve, CurveFamily, Granularity, Location, MetricGraph, Step, VertexFunction};
use crate::modulus::{mod_p, ModulusOptions, ModulusProblem};
use crate::plans::{barycenter, combine_plans, conjugate, disintegrate, dual_plan, Combined, Disintegration, Plan};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Default)]
pub struct RepresentingOptions {
    /// Family used for edge e instead of the single-edge family `{e}`.
    pub families: BTreeMap<usize, CurveFamily>,
    pub modulus: ModulusOptions,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioCheck<T = f64> {
    pub location: Location,
    pub g: T,
    /// Largest signed ratio over the support of `π_x`.
    pub esssup: T,
    pub error: T,
}

#[derive(Clone, Debug)]
pub struct Representation<T = f64> {
    /// Symmetrized combination of the per-edge dual plans.
    pub plan: Plan<T>,
    pub disintegration: Disintegration<T>,
    /// The combination before symmetrization, with its normalizers.
    pub combined: Combined<T>,
    /// `D = {g_f > 0}` as edge indices.
    pub domain: Vec<usize>,
    /// Edges of D the barycenter does not charge.
    pub missing: Vec<usize>,
    pub checks: Vec<RatioCheck<T>>,
}

impl<T: Scalar> Representation<T> {
    pub fn dominated(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn max_error(&self) -> T {
        self.checks.iter().fold(T::zero(), |acc, c| acc.max_of(c.error.clone()))
    }

    /// μ|_D ≪ η# and the esssup identity with zero error.
    pub fn verified(&self) -> bool {
        self.dominated() && self.checks.iter().all(|c| c.esssup == c.g)
    }
}

/// Builds a plan whose disintegration realizes `g_f` as an essential
/// supremum of curvewise slopes on `D = {g_f > 0}` at EdgePoint granularity.
pub fn representing_plan<T: Scalar>(
    graph: &MetricGraph,
    f: &VertexFunction,
    p: f64,
    opts: &RepresentingOptions,
) -> Result<Representation<T>> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("exponent p = {p} must lie in [1, ∞)")));
    }
    let gf = minimal_weak_gradient::<T>(graph, f, Granularity::EdgePoint);
    let domain: Vec<usize> = gf.support().into_iter().map(Location::index).collect();

    let pieces = domain
        .par_iter()
        .map(|&e| {
            let single;
            let family = match opts.families.get(&e) {
                Some(fam) => fam,
                None => {
                    single = CurveFamily::explicit(vec![Curve::new(graph, vec![Step::new(e, true)])?])?;
                    &single
                }
            };
            let sol = mod_p(&ModulusProblem { graph, family, p }, &opts.modulus)?;
            Ok(dual_plan(graph, &sol)?.plan.map(|&w| T::from_f64(w)))
        })
        .collect::<Result<Vec<Plan<T>>>>()?;

    let combined = combine_plans(graph, &pieces, conjugate(p))?;
    let plan = combined.plan.symmetrize();
    let bary = barycenter(graph, &plan);
    let missing = domain.iter().copied().filter(|&e| !bary.mass[e].is_positive()).collect();
    let disintegration = disintegrate(graph, &plan, Granularity::EdgePoint);

    let mut checks = Vec::new();
    for &e in &domain {
        let loc = Location::Edge(e);
        let Some(local) = disintegration.get(loc) else { continue };
        let esssup = local
            .weights
            .iter()
            .filter(|(_, w)| w.is_positive())
            .map(|(t, _)| signed_ratio::<T>(graph, f, t.edge, t.forward))
            .reduce(T::max_of)
            .unwrap_or_else(T::zero);
        let g = gf.at(loc).clone();
        checks.push(RatioCheck {
            location: loc,
            error: (esssup.clone() - g.clone()).abs_val(),
            g,
            esssup,
        });
    }
    Ok(Representation {
        plan,
        disintegration,
        combined,
        domain,
        missing,
        checks,
    })
}

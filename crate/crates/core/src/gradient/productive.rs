use super::{minimal_weak_gradient, signed_ratio};
use crate::error::{Error, Result};
use crate::mmspace::{Granularity, Location, MetricGraph, VertexFunction};
use crate::plans::{disintegrate, Plan, Traversal};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct ProductiveVerdict<T = f64> {
    pub location: Location,
    pub g: T,
    /// `π_x(B)`; zero when the plan does not reach x.
    pub mass: T,
    pub reached: bool,
}

impl<T: Scalar> ProductiveVerdict<T> {
    pub fn positive(&self) -> bool {
        self.mass.is_positive()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductiveSet<T = f64> {
    pub epsilon: f64,
    /// Traversals whose signed ratio lies in `[(1−ε)g_f(x), g_f(x)]` at some
    /// location x they charge, sorted.
    pub traversals: Vec<Traversal>,
    /// One verdict per location of `D = {g_f > 0}`.
    pub verdicts: Vec<ProductiveVerdict<T>>,
}

impl<T: Scalar> ProductiveSet<T> {
    pub fn all_positive(&self) -> bool {
        self.verdicts.iter().all(ProductiveVerdict::positive)
    }
}

/// The plan must be invariant under reversal: the lower bound is on the
/// signed ratio, and only a reversal-closed plan sees both signs.
pub fn epsilon_productive_set<T: Scalar>(
    graph: &MetricGraph,
    f: &VertexFunction,
    plan: &Plan<T>,
    gran: Granularity,
    epsilon: f64,
) -> Result<ProductiveSet<T>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("ε = {epsilon} must lie in (0, 1)")));
    }
    if !plan.is_reversal_closed() {
        return Err(Error::Plan("the plan is not reversal-closed; symmetrize it first".into()));
    }
    let gf = minimal_weak_gradient::<T>(graph, f, gran);
    let dis = disintegrate(graph, plan, gran);
    let factor = T::one() - T::from_f64(epsilon);
    let mut traversals = Vec::new();
    let mut verdicts = Vec::new();
    for loc in gf.support() {
        let g = gf.at(loc).clone();
        let lower = factor.clone() * g.clone();
        let Some(local) = dis.get(loc) else {
            verdicts.push(ProductiveVerdict {
                location: loc,
                g,
                mass: T::zero(),
                reached: false,
            });
            continue;
        };
        let mut mass = T::zero();
        for (t, w) in &local.weights {
            let r = signed_ratio::<T>(graph, f, t.edge, t.forward);
            if r >= lower && r <= g {
                mass = mass + w.clone();
                traversals.push(*t);
            }
        }
        verdicts.push(ProductiveVerdict {
            location: loc,
            g,
            mass,
            reached: true,
        });
    }
    traversals.sort_unstable();
    traversals.dedup();
    Ok(ProductiveSet {
        epsilon,
        traversals,
        verdicts,
    })
}

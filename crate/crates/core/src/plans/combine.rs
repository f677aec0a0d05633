use super::{barycenter, density_norm, Plan};
use crate::error::{Error, Result};
use crate::mmspace::MetricGraph;
use crate::modulus::{ExactCertificate, ModulusSolution, ModulusStatus};
use crate::scalar::{Rational, Scalar};

/// Terms of `a_n = 1 + η_n mass + ‖dη_n#/dμ‖_q + π_n mass`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalizer {
    pub mass: f64,
    pub density_norm: f64,
    pub speed_mass: f64,
    pub a: f64,
}

#[derive(Clone, Debug)]
pub struct Combined<T = f64> {
    pub plan: Plan<T>,
    /// `2^{-n} a_n^{-1}` for n = 1, 2, ….
    pub coefficients: Vec<T>,
    pub normalizers: Vec<Normalizer>,
    /// `‖dη#/dμ‖_q` of the combined plan.
    pub density_norm: f64,
    /// `Σ 2^{-n}` over the inputs, which bounds `density_norm`.
    pub norm_bound: f64,
    /// Mass bound `2^{-N}` of the omitted tail of a countable combination.
    pub tail_bound: f64,
}

/// `Σ_n 2^{-n} a_n^{-1} η_n`, merged by curve.
pub fn combine_plans<T: Scalar>(graph: &MetricGraph, plans: &[Plan<T>], q: f64) -> Result<Combined<T>> {
    let mut coefficients = Vec::with_capacity(plans.len());
    let mut normalizers = Vec::with_capacity(plans.len());
    let mut atoms = Vec::new();
    let mut pow = T::one();
    let half = T::one() / (T::one() + T::one());
    for (n, plan) in plans.iter().enumerate() {
        let bary = barycenter(graph, plan);
        if !bary.absolutely_continuous {
            return Err(Error::Plan(format!("plan #{} charges a σ-null edge", n + 1)));
        }
        let norm = density_norm(graph, &bary, q);
        let mass = plan.mass();
        let speed = plan.speed_mass(graph);
        let a = T::one() + mass.clone() + T::from_f64(norm) + speed.clone();
        pow = pow * half.clone();
        let coef = pow.clone() / a.clone();
        for at in plan.atoms() {
            atoms.push((at.curve.clone(), at.weight.clone() * coef.clone()));
        }
        normalizers.push(Normalizer {
            mass: mass.to_f64(),
            density_norm: norm,
            speed_mass: speed.to_f64(),
            a: a.to_f64(),
        });
        coefficients.push(coef);
    }
    let plan = Plan::merged(atoms);
    let density_norm = density_norm(graph, &barycenter(graph, &plan), q);
    let tail_bound = 0.5f64.powi(plans.len() as i32);
    Ok(Combined {
        plan,
        coefficients,
        normalizers,
        density_norm,
        norm_bound: 1.0 - tail_bound,
        tail_bound,
    })
}

#[derive(Clone, Debug)]
pub struct DualPlan<T = f64> {
    /// `λ / Σλ` on the active curves.
    pub plan: Plan<T>,
    pub lambda_sum: T,
    pub q: f64,
    pub density_norm: f64,
    /// Deviation of the barycenter density from `p ρ^{p−1} / Σλ`, relative to
    /// the largest density (for p = 1: from `≤ 1/Σλ`, with equality where ρ > 0).
    pub kkt_residual: f64,
}

/// `q = p/(p−1)`, infinite at p = 1.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// Normalized multipliers of a modulus solution.
pub fn dual_plan(graph: &MetricGraph, sol: &ModulusSolution) -> Result<DualPlan> {
    if sol.status != ModulusStatus::Solved || sol.active.is_empty() {
        return Err(Error::ZeroModulus("the family has zero modulus, so no dual plan exists".into()));
    }
    let raw = Plan::new(sol.active.iter().map(|a| (a.curve.clone(), a.lambda)).collect())?;
    let lsum = raw.mass();
    let plan = raw.scaled(1.0 / lsum);
    let bary = barycenter(graph, &plan);
    let q = conjugate(sol.p);
    let p = sol.p;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (k, d) in bary.density.iter().enumerate() {
        let Some(d) = d else { continue };
        let rho = sol.rho[k];
        scale = scale.max(*d);
        let dev = if p > 1.0 {
            (d - p * rho.powf(p - 1.0) / lsum).abs()
        } else if rho > 0.0 {
            (d - 1.0 / lsum).abs()
        } else {
            (d - 1.0 / lsum).max(0.0)
        };
        worst = worst.max(dev);
    }
    Ok(DualPlan {
        density_norm: density_norm(graph, &bary, q),
        plan,
        lambda_sum: lsum,
        q,
        kkt_residual: worst / scale.max(f64::MIN_POSITIVE),
    })
}

/// Exact dual plan from an exact certificate. The KKT residual is computed
/// in floating point from the exact data.
pub fn dual_plan_exact(graph: &MetricGraph, cert: &ExactCertificate, p: f64) -> Result<DualPlan<Rational>> {
    if cert.multipliers.is_empty() {
        return Err(Error::ZeroModulus("the family has zero modulus, so no dual plan exists".into()));
    }
    let raw = Plan::new(cert.multipliers.clone())?;
    let lsum = raw.mass();
    let plan = raw.scaled(Rational::from_integer(1.into()) / lsum.clone());
    let bary = barycenter(graph, &plan);
    let q = conjugate(p);
    let lf = lsum.to_f64();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (k, d) in bary.density.iter().enumerate() {
        let Some(d) = d else { continue };
        let d = d.to_f64();
        let rho = cert.rho[k].to_f64();
        scale = scale.max(d);
        let dev = if p > 1.0 {
            (d - p * rho.powf(p - 1.0) / lf).abs()
        } else if rho > 0.0 {
            (d - 1.0 / lf).abs()
        } else {
            (d - 1.0 / lf).max(0.0)
        };
        worst = worst.max(dev);
    }
    Ok(DualPlan {
        density_norm: density_norm(graph, &bary, q),
        plan,
        lambda_sum: lsum,
        q,
        kkt_residual: worst / scale.max(f64::MIN_POSITIVE),
    })
}

use super::Plan;
use crate::mmspace::MetricGraph;
use crate::scalar::Scalar;

/// Edge measure `η#(e) = Σ w(γ)·n_γ(e)·ℓ(e)` and its density against σ.
#[derive(Clone, Debug, PartialEq)]
pub struct Barycenter<T = f64> {
    pub mass: Vec<T>,
    /// `η#(e)/σ(e)` on σ-positive edges, `None` on σ-null ones.
    pub density: Vec<Option<T>>,
    /// η# ≪ μ: no mass on σ-null edges.
    pub absolutely_continuous: bool,
}

pub fn barycenter<T: Scalar>(graph: &MetricGraph, plan: &Plan<T>) -> Barycenter<T> {
    let mut mass = vec![T::zero(); graph.edge_count()];
    for a in plan.atoms() {
        for (e, n) in a.curve.edge_counts() {
            mass[e] = mass[e].clone() + a.weight.clone() * T::from_f64(n as f64 * graph.edge(e).len);
        }
    }
    let density = graph
        .edges()
        .iter()
        .zip(&mass)
        .map(|(e, m)| (!e.is_null()).then(|| m.clone() / T::from_f64(e.measure)))
        .collect();
    let absolutely_continuous = graph.edges().iter().zip(&mass).all(|(e, m)| !e.is_null() || !m.is_positive());
    Barycenter {
        mass,
        density,
        absolutely_continuous,
    }
}

/// `‖dη#/dμ‖_{L^q(μ)}`; `q = ∞` is the max over σ-positive edges. Infinite
/// when η# is not absolutely continuous.
pub fn density_norm<T: Scalar>(graph: &MetricGraph, bary: &Barycenter<T>, q: f64) -> f64 {
    if !bary.absolutely_continuous {
        return f64::INFINITY;
    }
    let vals = graph
        .edges()
        .iter()
        .zip(&bary.density)
        .filter_map(|(e, d)| d.as_ref().map(|d| (e.measure, d.to_f64())));
    if q.is_infinite() {
        vals.map(|(_, d)| d).fold(0.0, f64::max)
    } else {
        vals.map(|(s, d)| s * d.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

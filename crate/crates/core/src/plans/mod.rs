//! Plans: finitely supported measures on curves.

mod barycenter;
mod combine;
mod disintegration;

use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::mmspace::io::{curve_from_value, curve_to_value};
use crate::mmspace::{Curve, MetricGraph};
use crate::scalar::{rational_from_f64, Rational, Scalar};

pub use barycenter::{barycenter, density_norm, Barycenter};
pub use combine::{combine_plans, conjugate, dual_plan, dual_plan_exact, Combined, DualPlan, Normalizer};
pub use disintegration::{disintegrate, plan_measure, Disintegration, LocalMeasure, Traversal};

#[derive(Clone, Debug, PartialEq)]
pub struct Atom<T> {
    pub curve: Curve,
    pub weight: T,
}

/// Atoms sorted by curve, pairwise distinct, with positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan<T = f64> {
    atoms: Vec<Atom<T>>,
}

impl<T: Scalar> Default for Plan<T> {
    fn default() -> Self {
        Self { atoms: Vec::new() }
    }
}

impl<T: Scalar> Plan<T> {
    /// Rejects repeated curves and nonpositive weights.
    pub fn new(atoms: Vec<(Curve, T)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (c, w) in atoms {
            if !w.is_positive() {
                return Err(Error::Plan(format!("atom weight {w:?} is not positive")));
            }
            if map.insert(c, w).is_some() {
                return Err(Error::Plan("plan repeats a curve".into()));
            }
        }
        Ok(Self::from_map(map))
    }

    /// Sums the weights of repeated curves; drops nonpositive totals.
    pub fn merged(atoms: impl IntoIterator<Item = (Curve, T)>) -> Self {
        let mut map: BTreeMap<Curve, T> = BTreeMap::new();
        for (c, w) in atoms {
            match map.get_mut(&c) {
                Some(acc) => *acc = acc.clone() + w,
                None => {
                    map.insert(c, w);
                }
            }
        }
        map.retain(|_, w| w.is_positive());
        Self::from_map(map)
    }

    fn from_map(map: BTreeMap<Curve, T>) -> Self {
        Self {
            atoms: map.into_iter().map(|(curve, weight)| Atom { curve, weight }).collect(),
        }
    }

    /// Unit mass on one curve.
    pub fn dirac(curve: Curve) -> Self {
        Self {
            atoms: vec![Atom {
                curve,
                weight: T::one(),
            }],
        }
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn mass(&self) -> T {
        self.atoms.iter().fold(T::zero(), |acc, a| acc + a.weight.clone())
    }

    /// Mass of the speed-weighted measure `|γ'| dt dη`, i.e. `Σ w·Len(γ)`.
    pub fn speed_mass(&self, graph: &MetricGraph) -> T {
        self.atoms
            .iter()
            .fold(T::zero(), |acc, a| acc + a.weight.clone() * T::from_f64(a.curve.length(graph)))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self::merged(self.atoms.iter().map(|a| (a.curve.clone(), a.weight.clone() * c.clone())))
    }

    pub fn normalized(&self) -> Result<Self> {
        let m = self.mass();
        if !m.is_positive() {
            return Err(Error::Plan("cannot normalize an empty plan".into()));
        }
        Ok(self.scaled(T::one() / m))
    }

    pub fn weight_of(&self, curve: &Curve) -> Option<&T> {
        self.atoms
            .binary_search_by(|a| a.curve.cmp(curve))
            .ok()
            .map(|i| &self.atoms[i].weight)
    }

    /// `r_*η`: every curve traversed backwards.
    pub fn reverse(&self) -> Self {
        Self::merged(self.atoms.iter().map(|a| (a.curve.reversed(), a.weight.clone())))
    }

    /// `η + r_*η`.
    pub fn symmetrize(&self) -> Self {
        Self::merged(
            self.atoms
                .iter()
                .flat_map(|a| [(a.curve.clone(), a.weight.clone()), (a.curve.reversed(), a.weight.clone())]),
        )
    }

    /// Invariant under reversal, weights included.
    pub fn is_reversal_closed(&self) -> bool {
        self.atoms
            .iter()
            .all(|a| self.weight_of(&a.curve.reversed()) == Some(&a.weight))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Plan<U> {
        Plan::merged(self.atoms.iter().map(|a| (a.curve.clone(), f(&a.weight))))
    }

    pub fn to_f64(&self) -> Plan<f64> {
        self.map(|w| w.to_f64())
    }
}

impl Plan<f64> {
    pub fn to_rational(&self) -> Plan<Rational> {
        self.map(|&w| rational_from_f64(w))
    }
}

/// `{"atoms":[{"curve":[["e1","+"],...],"w":1.0}]}`
pub fn plan_to_value<T: Scalar>(graph: &MetricGraph, plan: &Plan<T>) -> Value {
    serde_json::json!({
        "atoms": plan
            .atoms()
            .iter()
            .map(|a| serde_json::json!({"curve": curve_to_value(graph, &a.curve), "w": a.weight.to_f64()}))
            .collect::<Vec<_>>()
    })
}

pub fn plan_from_value(graph: &MetricGraph, doc: &Value) -> Result<Plan<f64>> {
    let atoms = doc
        .get("atoms")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("$.atoms", "expected an array"))?;
    let mut out = Vec::with_capacity(atoms.len());
    for (i, a) in atoms.iter().enumerate() {
        let path = format!("$.atoms[{i}]");
        let curve = curve_from_value(
            graph,
            a.get("curve").ok_or_else(|| Error::parse(&path, "missing field \"curve\""))?,
            &format!("{path}.curve"),
        )?;
        let w = a
            .get("w")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::parse(format!("{path}.w"), "expected a number"))?;
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::parse(format!("{path}.w"), format!("weight {w} is not positive")));
        }
        out.push((curve, w));
    }
    Plan::new(out).map_err(|e| Error::parse("$.atoms", e.to_string()))
}

#[cfg(test)]
mod tests;

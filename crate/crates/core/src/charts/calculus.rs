use num_traits::Zero;

use super::{differential, Chart};
use crate::error::{Error, Result};
use crate::mmspace::{MetricGraph, VertexFunction};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct LeibnizLocal {
    pub vertex: usize,
    /// `Φ^x(d(fg) − f(x) dg − g(x) df)`.
    pub defect: Rational,
    /// `r_fg + |f| r_g + |g| r_f + max |Δf Δg|/ℓ` over the star.
    pub bound: Rational,
    /// All three fits have zero residual.
    pub all_exact: bool,
    /// Euclidean norm of the defect and its bound `bound / I(φ)(x)`.
    pub defect_euclid: f64,
    pub bound_euclid: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeibnizCheck {
    pub local: Vec<LeibnizLocal>,
}

impl LeibnizCheck {
    /// Defect within its bound everywhere. With exact fits the bound reduces
    /// to the cross term, so the defect vanishes where Δf·Δg does.
    pub fn holds(&self) -> bool {
        self.local.iter().all(|l| l.defect <= l.bound)
    }
}

pub fn leibniz(graph: &MetricGraph, chart: &Chart, f: &VertexFunction, g: &VertexFunction) -> LeibnizCheck {
    let fg = f.zip_with(g, |a, b| a * b);
    let (df, dg, dfg) = (
        differential(graph, f, chart),
        differential(graph, g, chart),
        differential(graph, &fg, chart),
    );
    let local = chart
        .locations
        .iter()
        .zip(df.local.iter().zip(dg.local.iter().zip(&dfg.local)))
        .map(|(&x, (a, (b, c)))| {
            let fx = Rational::from_f64(f.value(x));
            let gx = Rational::from_f64(g.value(x));
            let zeta: Vec<Rational> = (0..chart.dim())
                .map(|k| c.xi[k].clone() - fx.clone() * b.xi[k].clone() - gx.clone() * a.xi[k].clone())
                .collect();
            let cross = chart.gradient.edges[x]
                .iter()
                .map(|&e| {
                    (f.difference::<Rational>(graph, e) * g.difference::<Rational>(graph, e)).abs_val()
                        / Rational::from_f64(graph.edge(e).len)
                })
                .fold(Rational::zero(), Scalar::max_of);
            let bound = c.residual.clone() + fx.abs_val() * b.residual.clone() + gx.abs_val() * a.residual.clone() + cross;
            let defect = chart.gradient.eval_exact(x, &zeta);
            let index = chart.index[x];
            LeibnizLocal {
                vertex: x,
                all_exact: a.is_exact() && b.is_exact() && c.is_exact(),
                defect_euclid: zeta.iter().map(|z| z.to_f64().powi(2)).sum::<f64>().sqrt(),
                bound_euclid: bound.to_f64() / index,
                defect,
                bound,
            }
        })
        .collect();
    LeibnizCheck { local }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalityCheck {
    /// Chart vertices whose closed star carries equal values of f and g.
    pub agree: Vec<usize>,
    /// Those among them where `df ≠ dg`.
    pub mismatches: Vec<usize>,
}

impl LocalityCheck {
    pub fn holds(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// `f = g` on the closed star of x forces `d_x f = d_x g`.
pub fn locality(graph: &MetricGraph, chart: &Chart, f: &VertexFunction, g: &VertexFunction) -> LocalityCheck {
    let (df, dg) = (differential(graph, f, chart), differential(graph, g, chart));
    let agree: Vec<usize> = chart
        .locations
        .iter()
        .copied()
        .filter(|&x| {
            f.value(x) == g.value(x)
                && graph.incident(x).iter().all(|&e| {
                    let y = graph.edge(e).other(x);
                    f.value(y) == g.value(y)
                })
        })
        .collect();
    let mismatches = agree
        .iter()
        .copied()
        .filter(|&x| df.get(x).map(|l| &l.xi) != dg.get(x).map(|l| &l.xi))
        .collect();
    LocalityCheck { agree, mismatches }
}

/// A vertex map `F: X → Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexMap {
    pub image: Vec<usize>,
}

impl VertexMap {
    /// Images of the edges of X, checked against `F_*μ ≤ Cν`. Returns the
    /// image edge of every edge and the smallest C.
    pub fn edge_images(&self, x: &MetricGraph, y: &MetricGraph) -> Result<(Vec<usize>, f64)> {
        if self.image.len() != x.vertex_count() {
            return Err(Error::Domain(format!(
                "vertex map has {} entries for {} vertices",
                self.image.len(),
                x.vertex_count()
            )));
        }
        if let Some(&bad) = self.image.iter().find(|&&w| w >= y.vertex_count()) {
            return Err(Error::Domain(format!("vertex map points to missing vertex index {bad}")));
        }
        let mut images = Vec::with_capacity(x.edge_count());
        let mut pushed = vec![0.0; y.edge_count()];
        for e in x.edges() {
            let (a, b) = (self.image[e.u], self.image[e.v]);
            let target = y
                .incident(a)
                .iter()
                .copied()
                .filter(|&t| y.edge(t).other(a) == b)
                .max_by(|&s, &t| y.edge(s).measure.total_cmp(&y.edge(t).measure).then(t.cmp(&s)));
            let Some(t) = target else {
                if e.is_null() && a == b {
                    images.push(usize::MAX);
                    continue;
                }
                return Err(Error::MeasureIncompatible {
                    edge: e.id.clone(),
                    msg: format!("endpoints map to {} and {}, which no edge joins", y.vertex(a).id, y.vertex(b).id),
                });
            };
            pushed[t] += e.measure;
            images.push(t);
        }
        let mut c = 0.0f64;
        for (t, &m) in pushed.iter().enumerate() {
            if m > 0.0 {
                let nu = y.edge(t).measure;
                if nu == 0.0 {
                    let src = images.iter().position(|&s| s == t).expect("pushed edge has a source");
                    return Err(Error::MeasureIncompatible {
                        edge: x.edge(src).id.clone(),
                        msg: format!("mass lands on σ-null edge {}", y.edge(t).id),
                    });
                }
                c = c.max(m / nu);
            }
        }
        Ok((images, c))
    }

    pub fn pull_back(&self, x: &MetricGraph, h: &VertexFunction) -> Result<VertexFunction> {
        VertexFunction::new(x, self.image.iter().map(|&w| h.value(w)).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainRuleCheck {
    pub constant: f64,
    /// `(x, max_j |d_x(h∘F)_j − (d_{F(x)} h · D_x F)_j|)` over chart vertices
    /// mapped into the target chart.
    pub local: Vec<(usize, Rational)>,
}

impl ChainRuleCheck {
    pub fn max_residual(&self) -> f64 {
        self.local.iter().map(|(_, r)| r.to_f64()).fold(0.0, f64::max)
    }
}

/// `d_x(h∘F) = d_{F(x)}h ∘ D_x F`, with `D_x F` assembled from the
/// differentials of `G = ψ∘F`.
pub fn chain_rule(
    x: &MetricGraph,
    y: &MetricGraph,
    map: &VertexMap,
    chart_x: &Chart,
    chart_y: &Chart,
    h: &VertexFunction,
) -> Result<ChainRuleCheck> {
    let (_, constant) = map.edge_images(x, y)?;
    let composed = differential(x, &map.pull_back(x, h)?, chart_x);
    let dh = differential(y, h, chart_y);
    let jac = chart_y
        .phi
        .components
        .iter()
        .map(|psi| Ok(differential(x, &map.pull_back(x, psi)?, chart_x)))
        .collect::<Result<Vec<_>>>()?;
    let mut local = Vec::new();
    for l in &composed.local {
        let Some(outer) = dh.get(map.image[l.vertex]) else { continue };
        let mut worst = Rational::zero();
        for j in 0..chart_x.dim() {
            let chained = jac
                .iter()
                .zip(&outer.xi)
                .fold(Rational::zero(), |acc, (dg, a)| acc + a.clone() * dg.local_at(l.vertex)[j].clone());
            worst = worst.max_of((l.xi[j].clone() - chained).abs_val());
        }
        local.push((l.vertex, worst));
    }
    Ok(ChainRuleCheck { constant, local })
}

impl super::Differential {
    fn local_at(&self, v: usize) -> &[Rational] {
        &self.get(v).expect("differential covers the chart").xi
    }
}

//! The verification suites behind `run` and the single-purpose commands.

use anyhow::Context as _;
use modgrad::bundle::{
    cheeger_compare, differential_section, pq_compose, pq_map, section_norm, transitions, CheegerVerdict,
};
use modgrad::charts::{atlas_to_value, build_atlas, differential, Atlas, Chart, ChartCandidate};
use modgrad::gradient::{
    epsilon_productive_set, minimal_weak_gradient, representing_plan, violating_plan, RepresentingOptions,
    ViolationOptions, ViolationSearch,
};
use modgrad::mmspace::io::{curve_to_value, family_to_value};
use modgrad::mmspace::{CurveFamily, Granularity, Location, MetricGraph, VertexFunction};
use modgrad::modulus::{mod_p, ModulusOptions, ModulusProblem, ModulusStatus};
use modgrad::plans::plan_to_value;
use modgrad::scalar::{Rational, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{input_error, Suite};
use crate::report::{label, num, Report};
use crate::svg;

/// Everything a suite reads.
pub struct Context {
    pub instance: String,
    pub graph: MetricGraph,
    pub family: Option<CurveFamily>,
    pub exponents: Vec<f64>,
    pub functions: Vec<(String, VertexFunction)>,
    pub pool: Vec<(String, VertexFunction)>,
    pub epsilons: Vec<f64>,
    pub exact: bool,
    pub seed: u64,
}

/// Relative float tolerance for identities that are exact in rational mode.
const FLOAT_TOL: f64 = 1e-9;

impl Context {
    fn modulus_options(&self) -> ModulusOptions {
        ModulusOptions {
            exact: self.exact,
            ..ModulusOptions::default()
        }
    }

    fn representing_options(&self) -> RepresentingOptions {
        RepresentingOptions {
            modulus: self.modulus_options(),
            ..RepresentingOptions::default()
        }
    }

    /// The chart pool, or the coordinates when none was given.
    pub fn chart_pool(&self) -> anyhow::Result<Vec<(String, VertexFunction)>> {
        if !self.pool.is_empty() {
            return Ok(self.pool.clone());
        }
        let c = ChartCandidate::coordinates(&self.graph)
            .map_err(|_| input_error("no chart pool given and the space has no vertex positions"))?;
        Ok(c.names.into_iter().zip(c.components).collect())
    }

    fn loc(&self, loc: Location) -> String {
        self.graph.location_id(loc).to_string()
    }

    fn vid(&self, v: usize) -> String {
        self.graph.vertex(v).id.clone()
    }
}

/// Runs the requested suites in dependency order; the first stage error stops
/// the run and names the stage.
pub fn run_suites(ctx: &Context, suites: &[Suite], report: &mut Report) -> anyhow::Result<()> {
    let mut order = suites.to_vec();
    order.sort();
    order.dedup();
    for s in order {
        let r = match s {
            Suite::Modulus => modulus(ctx, report),
            Suite::Thm11 => thm11(ctx, report),
            Suite::Corollary => corollary(ctx, report),
            Suite::Falsify => falsify(ctx, report),
            Suite::Atlas => atlas(ctx, report).map(|_| ()),
            Suite::Differential => differentials(ctx, report),
            Suite::Bundle => bundle(ctx, report),
            Suite::Cheeger => cheeger(ctx, report),
        };
        r.with_context(|| format!("stage {} on {}", s.name(), ctx.instance))?;
    }
    Ok(())
}

pub fn modulus(ctx: &Context, report: &mut Report) -> anyhow::Result<()> {
    const S: &str = "modulus";
    let g = &ctx.graph;
    let family = ctx
        .family
        .as_ref()
        .ok_or_else(|| input_error("the modulus suite needs a curve family"))?;
    let mut runs = Vec::new();
    for &p in &ctx.exponents {
        let inst = format!("{} p={}", ctx.instance, label(p));
        let sol = mod_p(&ModulusProblem { graph: g, family, p }, &ctx.modulus_options())?;
        report.info(S, &inst, "", "value", &num(sol.value));
        if sol.status == ModulusStatus::Solved {
            let scale = sol.value.abs().max(1.0);
            report.at_most(S, &inst, "", "relative_duality_gap", 1e-6, sol.duality_gap / scale);
            report.at_most(S, &inst, "", "kkt_residual", 1e-6, sol.kkt_residual);
            report.flag(
                S,
                &inst,
                "",
                "admissible",
                ">= 1 - tol on every curve",
                &num(sol.min_line_integral),
                sol.min_line_integral >= 1.0 - ctx.modulus_options().tol_feas,
            );
        }
        if let Some(cert) = &sol.exact {
            let exact = cert.value.as_ref().map(ToString::to_string).unwrap_or_default();
            report.flag(S, &inst, "", "exact_certificate", "optimal", &cert.note, cert.optimal);
            report.info(S, &inst, "", "exact_value", &exact);
        }
        let rho: serde_json::Map<String, Value> =
            (0..g.edge_count()).map(|e| (g.edge(e).id.clone(), json!(sol.rho[e]))).collect();
        runs.push(json!({
            "p": p,
            "status": match &sol.status {
                ModulusStatus::Solved => json!("solved"),
                ModulusStatus::Zero { witness } => json!({"zero": curve_to_value(g, witness)}),
                ModulusStatus::Empty => json!("empty"),
            },
            "value": sol.value,
            "dual_value": sol.dual_value,
            "rho": rho,
            "active": sol.active.iter().map(|a| json!({"curve": curve_to_value(g, &a.curve), "lambda": a.lambda})).collect::<Vec<_>>(),
            "duality_gap": sol.duality_gap,
            "kkt_residual": sol.kkt_residual,
            "iterations": sol.iterations,
            "constraints": sol.constraints,
            "degenerate_edges": sol.degenerate_edges.iter().map(|&e| g.edge(e).id.clone()).collect::<Vec<_>>(),
            "exact": sol.exact.as_ref().map(|c| json!({
                "value": c.value.as_ref().map(ToString::to_string),
                "optimal": c.optimal,
                "note": c.note,
                "rho": c.rho.iter().map(ToString::to_string).collect::<Vec<_>>(),
            })),
        }));
        report
            .panels
            .push(svg::panel(g, &format!("rho* {inst}"), Some(&sol.rho), None));
    }
    report.detail(
        format!("{S}/{}", ctx.instance),
        json!({"family": family_to_value(g, family), "runs": runs}),
    );
    Ok(())
}

/// Esssup identity on `D = {g_f > 0}` for every function and exponent.
pub fn thm11(ctx: &Context, report: &mut Report) -> anyhow::Result<()> {
    const S: &str = "thm11";
    let mut details = Vec::new();
    for &p in &ctx.exponents {
        for (name, f) in &ctx.functions {
            let inst = format!("{} f={name} p={}", ctx.instance, label(p));
            let detail = if ctx.exact {
                let rep = representing_plan::<Rational>(&ctx.graph, f, p, &ctx.representing_options())?;
                for c in &rep.checks {
                    report.flag(
                        S,
                        &inst,
                        &ctx.loc(c.location),
                        "esssup_ratio",
                        &c.g.to_string(),
                        &c.esssup.to_string(),
                        c.esssup == c.g,
                    );
                }
                for &e in &rep.missing {
                    report.flag(S, &inst, &ctx.graph.edge(e).id, "charged_by_barycenter", "true", "false", false);
                }
                json!({"instance": inst, "domain": rep.domain.len(), "missing": rep.missing.len(), "plan_atoms": rep.plan.len(), "verified": rep.verified()})
            } else {
                let rep = representing_plan::<f64>(&ctx.graph, f, p, &ctx.representing_options())?;
                for c in &rep.checks {
                    report.close(S, &inst, &ctx.loc(c.location), "esssup_ratio", c.g, c.esssup, FLOAT_TOL * c.g.max(1.0));
                }
                for &e in &rep.missing {
                    report.flag(S, &inst, &ctx.graph.edge(e).id, "charged_by_barycenter", "true", "false", false);
                }
                json!({"instance": inst, "domain": rep.domain.len(), "missing": rep.missing.len(), "plan_atoms": rep.plan.len(), "max_error": rep.max_error(), "plan": plan_to_value(&ctx.graph, &rep.plan)})
            };
            details.push(detail);
        }
    }
    report.detail(format!("{S}/{}", ctx.instance), Value::Array(details));
    Ok(())
}

/// Positive `π_x` mass on the ε-productive traversals at every location of D.
pub fn corollary(ctx: &Context, report: &mut Report) -> anyhow::Result<()> {
    const S: &str = "corollary";
    let eps = if ctx.epsilons.is_empty() { vec![0.1] } else { ctx.epsilons.clone() };
    for &p in &ctx.exponents {
        for (name, f) in &ctx.functions {
            let plan = representing_plan::<f64>(&ctx.graph, f, p, &ctx.representing_options())?.plan;
            for &e in &eps {
                let inst = format!("{} f={name} p={} eps={}", ctx.instance, label(p), label(e));
                let set = epsilon_productive_set(&ctx.graph, f, &plan, Granularity::EdgePoint, e)?;
                for v in &set.verdicts {
                    report.flag(S, &inst, &ctx.loc(v.location), "productive_mass", "> 0", &num(v.mass), v.positive());
                }
            }
        }
    }
    Ok(())
}

/// `g_f` admits no violator; a copy pushed below `g_f` on one σ-positive edge
/// does.
pub fn falsify(ctx: &Context, report: &mut Report) -> anyhow::Result<()> {
    const S: &str = "falsify";
    let g = &ctx.graph;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let opts = ViolationOptions {
        modulus: ctx.modulus_options(),
        ..ViolationOptions::default()
    };
    let p = ctx.exponents[0];
    for (name, f) in &ctx.functions {
        let inst = format!("{} f={name}", ctx.instance);
        let gf = minimal_weak_gradient::<f64>(g, f, Granularity::EdgePoint);
        match violating_plan(g, f, &gf, p, &opts)? {
            ViolationSearch::NoViolator { examined, .. } => {
                report.flag(S, &inst, "", "violators_of_g_f", "none", &format!("none of {examined}"), true)
            }
            ViolationSearch::BudgetExhausted { reason, .. } => {
                report.inconclusive(S, &inst, "", "violators_of_g_f", "none", &reason)
            }
            ViolationSearch::Found { violators, .. } => {
                report.flag(S, &inst, "", "violators_of_g_f", "none", &violators.len().to_string(), false)
            }
        }
        let support: Vec<usize> = gf.support().into_iter().map(Location::index).collect();
        if support.is_empty() {
            report.info(S, &inst, "", "perturbed_violators", "g_f vanishes");
            continue;
        }
        let e = support[rng.random_range(0..support.len())];
        let mut lowered = gf.clone();
        lowered.values[e] *= 1.0 - 1e-3;
        let loc = &g.edge(e).id;
        match violating_plan(g, f, &lowered, p, &opts)? {
            ViolationSearch::Found { .. } => report.flag(S, &inst, loc, "perturbed_violators", "plan found", "plan found", true),
            ViolationSearch::BudgetExhausted { reason, .. } => {
                report.inconclusive(S, &inst, loc, "perturbed_violators", "plan found", &reason)
            }
            ViolationSearch::NoViolator { .. } => report.flag(S, &inst, loc, "perturbed_violators", "plan found", "none", false),
        }
    }
    Ok(())
}

pub fn atlas_at(ctx: &Context, p: f64) -> anyhow::Result<Atlas> {
    Ok(build_atlas(&ctx.graph, p, &ctx.chart_pool()?)?)
}

pub fn atlas(ctx: &Context, report: &mut Report) -> anyhow::Result<Vec<Atlas>> {
    const S: &str = "atlas";
    let g = &ctx.graph;
    let mut out = Vec::new();
    for &p in &ctx.exponents {
        let inst = format!("{} p={}", ctx.instance, label(p));
        let a = atlas_at(ctx, p)?;
        report.info(S, &inst, "", "dimensions", &format!("{:?}", a.dimensions()));
        for w in &a.warnings {
            report.info(S, &inst, &ctx.vid(w.vertex), "dimension_below_ceiling", &format!("{} < {}", w.achieved, w.ceiling));
        }
        let dims: Vec<f64> = (0..g.vertex_count()).map(|v| a.dimension_at(v) as f64).collect();
        report.panels.push(svg::panel(g, &format!("chart dimension {inst}"), None, Some(&dims)));
        report.detail(format!("{S}/{inst}"), atlas_to_value(g, &a));
        out.push(a);
    }
    Ok(out)
}

fn differentials(ctx: &Context, report: &mut Report) -> anyhow::Result<()> {
    const S: &str = "differential";
    let g = &ctx.graph;
    let a = atlas_at(ctx, ctx.exponents[0])?;
    for (name, f) in &ctx.functions {
        let inst = format!("{} f={name}", ctx.instance);
        let gf = minimal_weak_gradient::<Rational>(g, f, Granularity::VertexStar);
        for chart in &a.charts {
            for l in &differential(g, f, chart).local {
                let loc = ctx.vid(l.vertex);
                if l.is_exact() {
                    let want = &gf.values[l.vertex];
                    report.flag(S, &inst, &loc, "norm_vs_g_f", &want.to_string(), &l.norm.to_string(), l.norm == *want);
                } else {
                    report.info(S, &inst, &loc, "fit_residual", &num(l.residual.to_f64()));
                }
            }
        }
    }
    Ok(())
}

/// Transitions and cocycle on the atlas charts, section norms, π_{p,q}.
pub fn bundle(ctx: &Context, report: &mut Report) -> anyhow::Result<()> {
    let a = atlas_at(ctx, ctx.exponents[0])?;
    bundle_cocycle(ctx, &a.charts, report)?;
    bundle_norms(ctx, &a.charts, a.p, report)?;
    bundle_pq(ctx, report)
}

pub fn bundle_cocycle(ctx: &Context, charts: &[Chart], report: &mut Report) -> anyhow::Result<()> {
    const S: &str = "bundle";
    let t = transitions(&ctx.graph, charts)?;
    let inst = format!("{} charts={}", ctx.instance, charts.len());
    report.at_most(S, &inst, "", "max_cocycle_defect", 1e-12, t.max_cocycle_defect());
    for m in &t.maps {
        for l in &m.local {
            let loc = ctx.vid(l.vertex);
            let q = format!("isometry {}->{}", m.from, m.to);
            match l.isometric {
                Some(ok) => report.flag(S, &inst, &loc, &q, "true", &ok.to_string(), ok),
                None => report.info(S, &inst, &loc, &q, &format!("approximate, residual {}", label(l.residual.to_f64()))),
            }
        }
    }
    report.detail(
        format!("bundle/{}/transitions", ctx.instance),
        json!({
            "maps": t.maps.iter().map(|m| json!({
                "from": m.from,
                "to": m.to,
                "local": m.local.iter().map(|l| json!({
                    "vertex": ctx.vid(l.vertex),
                    "matrix": l.matrix.iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "residual": l.residual.to_f64(),
                    "isometric": l.isometric,
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "cocycle_checks": t.cocycle.len(),
            "max_cocycle_defect": t.max_cocycle_defect(),
        }),
    );
    Ok(())
}

pub fn bundle_norms(ctx: &Context, charts: &[Chart], p_atlas: f64, report: &mut Report) -> anyhow::Result<()> {
    const S: &str = "bundle";
    let g = &ctx.graph;
    for (name, f) in &ctx.functions {
        let s = differential_section(g, f, charts);
        let gf = minimal_weak_gradient::<f64>(g, f, Granularity::VertexStar);
        for &p in &ctx.exponents {
            let inst = format!("{} f={name} p={} atlas p={}", ctx.instance, label(p), label(p_atlas));
            let norm = section_norm(g, charts, &s, p)?;
            let covered = s.fiber_dimensions();
            let lp: f64 = covered
                .keys()
                .map(|&x| g.star_measure(x) * gf.values[x].powf(p))
                .sum::<f64>()
                .powf(1.0 / p);
            if s.flagged().is_empty() {
                report.close(S, &inst, "", "section_norm_vs_g_f", lp, norm, FLOAT_TOL * lp.max(1.0));
            } else {
                report.info(S, &inst, "", "section_norm", &num(norm));
                report.info(S, &inst, "", "flagged_locations", &s.flagged().len().to_string());
            }
        }
    }
    Ok(())
}

pub fn bundle_pq(ctx: &Context, report: &mut Report) -> anyhow::Result<()> {
    const S: &str = "bundle";
    let mut ps = ctx.exponents.clone();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let atlases = ps.iter().map(|&p| atlas_at(ctx, p)).collect::<anyhow::Result<Vec<_>>>()?;
    let pool: Vec<VertexFunction> = ctx.chart_pool()?.into_iter().map(|(_, f)| f).chain(ctx.functions.iter().map(|(_, f)| f.clone())).collect();
    let mut maps = Vec::new();
    for i in 0..atlases.len() {
        for j in i + 1..atlases.len() {
            let m = pq_map(&ctx.graph, &atlases[i], &atlases[j], &pool)?;
            let inst = format!("{} p={} q={}", ctx.instance, label(m.p), label(m.q));
            report.flag(S, &inst, "", "pq_lipschitz", "true", &m.all_lipschitz().to_string(), m.all_lipschitz());
            // the right inverse is built for every covered star
            report.flag(S, &inst, "", "pq_surjective", "true", "explicit preimage", true);
            report.flag(S, &inst, "", "pq_differentials", "true", &m.differentials_agree().to_string(), m.differentials_agree());
            report.info(S, &inst, "", "pq_identity", &m.all_identity().to_string());
            maps.push(((i, j), m));
        }
    }
    let get = |i: usize, j: usize| maps.iter().find(|(k, _)| *k == (i, j)).map(|(_, m)| m);
    for i in 0..atlases.len() {
        for s in i + 1..atlases.len() {
            for j in s + 1..atlases.len() {
                let (Some(ps_), Some(sq), Some(pq)) = (get(i, s), get(s, j), get(i, j)) else { continue };
                let inst = format!("{} p={} s={} q={}", ctx.instance, label(ps[i]), label(ps[s]), label(ps[j]));
                let d = pq_compose(ps_, sq, pq);
                report.flag(S, &inst, "", "pq_composition_defect", "0", &d.to_string(), d == Rational::from_integer(0.into()));
            }
        }
    }
    Ok(())
}

pub fn cheeger(ctx: &Context, report: &mut Report) -> anyhow::Result<()> {
    const S: &str = "cheeger";
    let g = &ctx.graph;
    let Ok(phi) = ChartCandidate::coordinates(g) else {
        report.info(S, &ctx.instance, "", "cheeger_chart", "space has no positions");
        return Ok(());
    };
    for (name, f) in &ctx.functions {
        let inst = format!("{} f={name}", ctx.instance);
        let r = cheeger_compare(g, f, &phi);
        for l in &r.local {
            let loc = ctx.vid(l.vertex);
            let verdict = match l.verdict {
                CheegerVerdict::Equal => "equal",
                CheegerVerdict::Gap => "gap",
            };
            report.info(S, &inst, &loc, "lip_vs_weak", &format!("{} vs {} ({verdict})", l.lip, l.weak));
            if let Some(k) = &l.kernel {
                let k: Vec<String> = k.iter().map(ToString::to_string).collect();
                report.info(S, &inst, &loc, "kernel_covector", &format!("({})", k.join(", ")));
            }
            if let Some(ok) = l.submetry {
                report.flag(S, &inst, &loc, "submetry", "true", &ok.to_string(), ok);
            }
        }
    }
    Ok(())
}

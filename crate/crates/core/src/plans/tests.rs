use super::*;
use crate::mmspace::{enumerate_curves, generate, Budget, Curve, CurveFamily, GeneratorKind, Granularity, Location};
use crate::modulus::{mod_p, ModulusOptions, ModulusProblem};
use crate::scalar::rational;

fn grid3() -> crate::mmspace::Generated {
    generate(&GeneratorKind::Grid { nx: 3, ny: 3, h: 1.0 }).unwrap()
}

fn row_curve(g: &MetricGraph, row: usize, n: usize) -> Curve {
    let path: Vec<usize> = (0..n).map(|i| row * n + i).collect();
    Curve::through_vertices(g, &path).unwrap()
}

#[test]
fn barycenter_of_unit_curve() {
    let gen = grid3();
    let g = &gen.graph;
    let plan = Plan::<f64>::dirac(row_curve(g, 0, 3));
    let b = barycenter(g, &plan);
    let on: Vec<usize> = plan.atoms()[0].curve.steps().iter().map(|s| s.edge).collect();
    for (e, m) in b.mass.iter().enumerate() {
        assert_eq!(*m, if on.contains(&e) { 1.0 } else { 0.0 });
    }
    assert!(b.absolutely_continuous);
}

#[test]
fn barycenter_flags_null_edges() {
    let gen = generate(&GeneratorKind::Rug { nx: 2, ny: 2, h: 1.0 }).unwrap();
    let g = &gen.graph;
    let v = g.edges().iter().position(|e| e.is_null()).unwrap();
    let c = Curve::new(g, vec![crate::mmspace::Step::new(v, true)]).unwrap();
    let b = barycenter(g, &Plan::<f64>::dirac(c));
    assert!(!b.absolutely_continuous);
    assert!(density_norm(g, &b, 2.0).is_infinite());
}

#[test]
fn barycenter_is_linear() {
    let gen = grid3();
    let g = &gen.graph;
    let a = row_curve(g, 0, 3);
    let b = row_curve(g, 2, 3);
    let mix = Plan::new(vec![(a.clone(), rational(1, 4)), (b.clone(), rational(3, 4))]).unwrap();
    let ba = barycenter(g, &Plan::<Rational>::dirac(a));
    let bb = barycenter(g, &Plan::<Rational>::dirac(b));
    let bm = barycenter(g, &mix);
    for e in 0..g.edge_count() {
        assert_eq!(bm.mass[e], &ba.mass[e] * rational(1, 4) + &bb.mass[e] * rational(3, 4));
    }
}

#[test]
fn reversal() {
    let gen = grid3();
    let g = &gen.graph;
    let east = row_curve(g, 1, 3);
    let plan = Plan::<f64>::dirac(east.clone());
    let rev = plan.reverse();
    assert_eq!(rev.atoms()[0].curve, east.reversed());
    assert!(!plan.is_reversal_closed());
    let sym = plan.symmetrize();
    assert!(sym.is_reversal_closed());
    assert_eq!(barycenter(g, &rev), barycenter(g, &plan));
}

#[test]
fn duplicate_curves_rejected() {
    let gen = grid3();
    let c = row_curve(&gen.graph, 0, 3);
    assert!(Plan::new(vec![(c.clone(), 1.0), (c.clone(), 2.0)]).is_err());
    assert!(Plan::new(vec![(c, 0.0)]).is_err());
}

#[test]
fn combine_formula() {
    let gen = grid3();
    let g = &gen.graph;
    let plan = Plan::<f64>::dirac(row_curve(g, 0, 3));
    let c = combine_plans(g, &[plan.clone()], 2.0).unwrap();
    // a = 1 + 1 + ‖density‖_2 + Len = 1 + 1 + √2 + 2
    let a = 4.0 + 2f64.sqrt();
    assert!((c.normalizers[0].a - a).abs() < 1e-15);
    assert!((c.plan.atoms()[0].weight.to_f64() - 0.5 / a).abs() < 1e-15);
    let two = combine_plans(g, &[plan.clone(), plan], 2.0).unwrap();
    assert_eq!(two.plan.len(), 1);
    assert!(two.density_norm <= two.norm_bound);
}

#[test]
fn combine_rejects_singular_plan() {
    let gen = generate(&GeneratorKind::Rug { nx: 2, ny: 2, h: 1.0 }).unwrap();
    let g = &gen.graph;
    let v = g.edges().iter().position(|e| e.is_null()).unwrap();
    let c = Curve::new(g, vec![crate::mmspace::Step::new(v, true)]).unwrap();
    assert!(combine_plans(g, &[Plan::<f64>::dirac(c)], 2.0).is_err());
}

#[test]
fn dual_plan_single_path() {
    let gen = generate(&GeneratorKind::ParallelPaths { k: 1, m: 3 }).unwrap();
    let g = &gen.graph;
    let sol = mod_p(
        &ModulusProblem {
            graph: g,
            family: &gen.family,
            p: 2.0,
        },
        &ModulusOptions::default(),
    )
    .unwrap();
    let d = dual_plan(g, &sol).unwrap();
    assert_eq!(d.plan.len(), 1);
    assert!((d.plan.atoms()[0].weight - 1.0).abs() < 1e-12);
    let b = barycenter(g, &d.plan);
    for (e, dens) in b.density.iter().enumerate() {
        assert!((dens.unwrap() - g.edge(e).len / g.edge(e).measure).abs() < 1e-12);
    }
    assert!(d.kkt_residual < 1e-9);
}

#[test]
fn dual_plan_symmetric_weights() {
    let gen = generate(&GeneratorKind::ParallelPaths { k: 2, m: 2 }).unwrap();
    let g = &gen.graph;
    let sol = mod_p(
        &ModulusProblem {
            graph: g,
            family: &gen.family,
            p: 2.0,
        },
        &ModulusOptions::default(),
    )
    .unwrap();
    let d = dual_plan(g, &sol).unwrap();
    for a in d.plan.atoms() {
        assert!((a.weight - 0.5).abs() < 1e-12);
    }
}

#[test]
fn dual_plan_of_zero_family_fails() {
    let gen = generate(&GeneratorKind::Rug { nx: 2, ny: 2, h: 1.0 }).unwrap();
    let g = &gen.graph;
    let v = g.edges().iter().position(|e| e.is_null()).unwrap();
    let fam = CurveFamily::explicit(vec![Curve::new(g, vec![crate::mmspace::Step::new(v, true)]).unwrap()]).unwrap();
    let sol = mod_p(
        &ModulusProblem {
            graph: g,
            family: &fam,
            p: 2.0,
        },
        &ModulusOptions::default(),
    )
    .unwrap();
    assert!(matches!(dual_plan(g, &sol), Err(Error::ZeroModulus(_))));
}

#[test]
fn disintegration_edge_point_dirac() {
    let gen = grid3();
    let g = &gen.graph;
    let plan = Plan::<f64>::dirac(row_curve(g, 0, 3));
    let d = disintegrate(g, &plan, Granularity::EdgePoint);
    assert_eq!(d.local.len(), 2);
    for m in &d.local {
        assert_eq!(m.weights.len(), 1);
        assert_eq!(m.weights[0].1, 1.0);
        assert_eq!(m.total, 1.0);
    }
}

#[test]
fn fubini_exact_on_grid_dual_plan() {
    let gen = grid3();
    let g = &gen.graph;
    let sol = mod_p(
        &ModulusProblem {
            graph: g,
            family: &gen.family,
            p: 2.0,
        },
        &ModulusOptions::default(),
    )
    .unwrap();
    let plan = dual_plan(g, &sol).unwrap().plan.to_rational();
    for gran in [Granularity::EdgePoint, Granularity::VertexStar] {
        let d = disintegrate(g, &plan, gran);
        let sets: Vec<Box<dyn Fn(&Traversal) -> bool>> = vec![
            Box::new(|_| true),
            Box::new(|t| t.forward),
            Box::new(|t| t.edge % 3 == 1),
            Box::new(|t| t.atom % 2 == 0 && t.step > 0),
        ];
        for set in &sets {
            assert_eq!(d.reconstruct(set), plan_measure(g, &plan, set));
        }
    }
    // the optimal plan runs straight along rows
    let d = disintegrate(g, &plan, Granularity::VertexStar);
    let horizontal = |t: &Traversal| {
        let e = g.edge(t.edge);
        g.position(e.u).unwrap()[1] == g.position(e.v).unwrap()[1]
    };
    assert_eq!(d.get(Location::Star(4)).unwrap().measure_of(horizontal), rational(1, 1));

    let all = enumerate_curves(g, &gen.family, Budget::default()).unwrap();
    let uniform = Plan::merged(all.into_iter().map(|c| (c, rational(1, 1))));
    let d = disintegrate(g, &uniform, Granularity::VertexStar);
    let centre = d.get(Location::Star(4)).unwrap();
    assert!(centre.measure_of(horizontal) > rational(0, 1));
    assert!(centre.measure_of(|t| !horizontal(t)) > rational(0, 1));
    assert_eq!(centre.measure_of(|_| true), rational(1, 1));
    assert_eq!(d.reconstruct(|t| t.forward), plan_measure(g, &uniform, |t| t.forward));
}

#[test]
fn plan_json_round_trip() {
    let gen = grid3();
    let g = &gen.graph;
    let all = enumerate_curves(g, &gen.family, Budget::default()).unwrap();
    let plan = Plan::new(all.iter().take(5).enumerate().map(|(i, c)| (c.clone(), 0.5 + i as f64)).collect()).unwrap();
    let back = plan_from_value(g, &plan_to_value(g, &plan)).unwrap();
    assert_eq!(back, plan);
}

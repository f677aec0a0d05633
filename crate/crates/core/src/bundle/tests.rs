use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::charts::{build_atlas, Atlas, ChartCandidate};
use crate::gradient::minimal_weak_gradient;
use crate::mmspace::{generate, GeneratorKind, Granularity};
use crate::scalar::rational;

fn grid(n: usize) -> MetricGraph {
    generate(&GeneratorKind::Grid { nx: n, ny: n, h: 1.0 }).unwrap().graph
}

fn rug(n: usize) -> MetricGraph {
    generate(&GeneratorKind::Rug { nx: n, ny: n, h: 1.0 }).unwrap().graph
}

fn pos(g: &MetricGraph, f: impl Fn(f64, f64) -> f64) -> VertexFunction {
    VertexFunction::from_positions(g, f).unwrap()
}

fn xy_pool(g: &MetricGraph) -> Vec<(String, VertexFunction)> {
    let c = ChartCandidate::coordinates(g).unwrap();
    c.names.into_iter().zip(c.components).collect()
}

/// Chart `A·(x, y)` on every vertex.
fn linear_chart(g: &MetricGraph, a: [[f64; 2]; 2]) -> Chart {
    let phi = ChartCandidate::new(
        vec!["u".into(), "v".into()],
        vec![
            pos(g, |x, y| a[0][0] * x + a[0][1] * y),
            pos(g, |x, y| a[1][0] * x + a[1][1] * y),
        ],
    )
    .unwrap();
    Chart::new(g, phi, (0..g.vertex_count()).collect()).unwrap()
}

fn to_matrix(a: [[i64; 2]; 2]) -> Matrix {
    a.iter().map(|r| r.iter().map(|&v| rational(v, 1)).collect()).collect()
}

#[test]
fn identical_charts_give_identity() {
    let g = grid(3);
    let c = linear_chart(&g, [[1.0, 0.0], [0.0, 1.0]]);
    let t = transitions(&g, &[c.clone(), c]).unwrap();
    assert_eq!(t.maps.len(), 2);
    for l in &t.get(0, 1).unwrap().local {
        assert_eq!(l.matrix, to_matrix([[1, 0], [0, 1]]));
        assert_eq!(l.isometric, Some(true));
    }
}

#[test]
fn linear_reparametrization_transition() {
    let g = grid(4);
    let charts = [linear_chart(&g, [[1.0, 0.0], [0.0, 1.0]]), linear_chart(&g, [[2.0, 1.0], [1.0, 1.0]])];
    let t = transitions(&g, &charts).unwrap();
    let m = t.get(0, 1).unwrap();
    assert!(m.is_exact());
    // (Aᵀ)^{-1} for A = [[2, 1], [1, 1]]
    let want = to_matrix([[1, -1], [-1, 2]]);
    for l in &m.local {
        assert_eq!(l.matrix, want);
        assert_eq!(l.isometric, Some(true));
    }
    assert!(t.all_isometric());
}

#[test]
fn cocycle_on_three_reparametrizations() {
    let g = grid(4);
    let charts = [
        linear_chart(&g, [[1.0, 0.0], [0.0, 1.0]]),
        linear_chart(&g, [[2.0, 1.0], [1.0, 1.0]]),
        linear_chart(&g, [[1.0, 0.0], [3.0, 1.0]]),
    ];
    let t = transitions(&g, &charts).unwrap();
    assert_eq!(t.maps.len(), 6);
    assert_eq!(t.cocycle.len(), 6 * 16);
    assert!(t.cocycle.iter().all(|c| c.defect.is_zero()));
    assert!(t.max_cocycle_defect() <= 1e-12);
}

#[test]
fn overlap_dimension_mismatch_is_an_error() {
    let g = grid(3);
    let one = Chart::new(&g, ChartCandidate::new(vec!["x".into()], vec![pos(&g, |x, _| x)]).unwrap(), vec![4]).unwrap();
    let two = linear_chart(&g, [[1.0, 0.0], [0.0, 1.0]]);
    assert!(matches!(transitions(&g, &[one, two]), Err(Error::Chart(_))));
}

#[test]
fn approximate_overlap_is_flagged() {
    let g = grid(4);
    let square = ChartCandidate::new(
        vec!["x2".into(), "y".into()],
        vec![pos(&g, |x, _| x * x + x), pos(&g, |_, y| y)],
    )
    .unwrap();
    let charts = [linear_chart(&g, [[1.0, 0.0], [0.0, 1.0]]), Chart::new(&g, square, (0..16).collect()).unwrap()];
    let t = transitions(&g, &charts).unwrap();
    let m = t.get(0, 1).unwrap();
    assert!(!m.is_exact());
    let inexact: Vec<_> = m.local.iter().filter(|l| !l.residual.is_zero()).collect();
    assert!(!inexact.is_empty());
    assert!(inexact.iter().all(|l| l.isometric.is_none()));
}

#[test]
fn norm_of_dx_on_small_grid() {
    let g = generate(&GeneratorKind::Grid { nx: 2, ny: 2, h: 1.0 }).unwrap().graph;
    let atlas = build_atlas(&g, 2.0, &xy_pool(&g)).unwrap();
    let s = differential_section(&g, &pos(&g, |x, _| x), &atlas.charts);
    assert!(s.pointwise_norms(&atlas.charts).values().all(|n| n.is_one()));
    for p in [1.0, 1.5, 2.0, 3.0] {
        let n = section_norm(&g, &atlas.charts, &s, p).unwrap();
        assert!((n - g.total_measure().powf(1.0 / p)).abs() < 1e-12);
    }
    let zero = Section::zero(&atlas.charts);
    assert_eq!(section_norm(&g, &atlas.charts, &zero, 2.0).unwrap(), 0.0);
    assert!(section_norm(&g, &atlas.charts, &s, 0.5).is_err());
}

#[test]
fn differential_norm_matches_weak_gradient() {
    let g = grid(4);
    let atlas = build_atlas(&g, 2.0, &xy_pool(&g)).unwrap();
    let f = pos(&g, |x, y| 3.0 * x - 2.0 * y + 1.0);
    let s = differential_section(&g, &f, &atlas.charts);
    assert!(s.flagged().is_empty());
    let gf = minimal_weak_gradient::<f64>(&g, &f, Granularity::VertexStar);
    for p in [1.0, 2.0, 2.5] {
        let want: f64 = (0..16).map(|x| g.star_measure(x) * gf.values[x].powf(p)).sum::<f64>().powf(1.0 / p);
        assert!((section_norm(&g, &atlas.charts, &s, p).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn lp_regrouping_by_index_levels() {
    let g = generate(&GeneratorKind::Grid { nx: 4, ny: 3, h: 0.5 }).unwrap().graph;
    let charts = [linear_chart(&g, [[2.0, 1.0], [1.0, 3.0]])];
    let f = pos(&g, |x, y| x - y);
    let s = differential_section(&g, &f, &charts);
    let index = &charts[0].index;
    // the level of x: least j with I(x) ≥ 1/j
    let level = |x: usize| (1..).find(|&j| index[x] * j as f64 >= 1.0).unwrap();
    let levels: Vec<usize> = (0..g.vertex_count()).map(level).collect();
    let top = *levels.iter().max().unwrap();
    let total = section_power_sum(&g, &charts, &s, 3, |_| true);
    let regrouped = (1..=top).fold(Rational::zero(), |acc, j| {
        acc + section_power_sum(&g, &charts, &s, 3, |x| levels[x] == j)
    });
    assert_eq!(total, regrouped);
    assert!(!total.is_zero());
}

#[test]
fn incompatible_section_names_location() {
    let g = grid(3);
    let charts = [linear_chart(&g, [[1.0, 0.0], [0.0, 1.0]]), linear_chart(&g, [[1.0, 1.0], [0.0, 1.0]])];
    let f = pos(&g, |x, y| x + 2.0 * y);
    let mut s = differential_section(&g, &f, &charts);
    assert!(section_norm(&g, &charts, &s, 2.0).is_ok());
    let k = s.entries.iter().position(|e| e.vertex == 4 && e.chart == 1).unwrap();
    s.entries[k].xi[0] += Rational::one();
    match section_norm(&g, &charts, &s, 2.0) {
        Err(Error::IncompatibleSection { location, .. }) => assert_eq!(location, g.vertex(4).id),
        other => panic!("expected an incompatible section, got {other:?}"),
    }
}

#[test]
fn section_on_union_has_mixed_fibers() {
    let (a, b) = (grid(3), rug(3));
    let u = a.disjoint_union(&b, "g.", "r.").unwrap();
    let atlas = build_atlas(&u, 2.0, &xy_pool(&u)).unwrap();
    let s = differential_section(&u, &pos(&u, |x, _| x), &atlas.charts);
    for (v, d) in s.fiber_dimensions() {
        let want = if u.vertex(v).id.starts_with("g.") { 2 } else { 1 };
        assert_eq!(d, want);
    }
    assert!(s.flagged().is_empty());
    assert!(s.pointwise_norms(&atlas.charts).values().all(|n| n.is_one()));
}

#[test]
fn locality_of_sections() {
    let g = grid(4);
    let atlas = build_atlas(&g, 2.0, &xy_pool(&g)).unwrap();
    let f = pos(&g, |x, y| x * y);
    // agrees with f on the square [0, 2]², differs elsewhere
    let h = pos(&g, |x, y| if x <= 2.0 && y <= 2.0 { x * y } else { x * y + (x - 2.0).max(0.0) * 5.0 + y });
    let (sf, sh) = (differential_section(&g, &f, &atlas.charts), differential_section(&g, &h, &atlas.charts));
    // stars whose closed neighbourhood stays inside the square
    for x in [0usize, 1, 4, 5] {
        let a = sf.entries.iter().find(|e| e.vertex == x).unwrap();
        let b = sh.entries.iter().find(|e| e.vertex == x).unwrap();
        assert_eq!(a.xi, b.xi);
    }
}

fn atlas_at(g: &MetricGraph, p: f64) -> Atlas {
    build_atlas(g, p, &xy_pool(g)).unwrap()
}

#[test]
fn pq_map_is_identity_on_grid() {
    let g = grid(4);
    let pool = vec![pos(&g, |x, _| x), pos(&g, |x, y| x + 2.0 * y), pos(&g, |x, y| x * y)];
    let (a15, a2, a3) = (atlas_at(&g, 1.5), atlas_at(&g, 2.0), atlas_at(&g, 3.0));
    let m = pq_map(&g, &a15, &a2, &pool).unwrap();
    assert_eq!((m.p, m.q), (1.5, 2.0));
    assert_eq!(m.local.len(), 16);
    assert!(m.skipped.is_empty());
    assert!(m.all_identity() && m.all_lipschitz() && m.differentials_agree());
    for l in &m.local {
        assert_eq!(mat_mul(&l.matrix, &l.preimage), to_matrix([[1, 0], [0, 1]]));
    }
    let (m23, m153) = (pq_map(&g, &a2, &a3, &pool).unwrap(), pq_map(&g, &a15, &a3, &pool).unwrap());
    assert!(pq_compose(&m, &m23, &m153).is_zero());
}

#[test]
fn pq_map_between_reparametrized_atlases() {
    let g = grid(3);
    let mut ap = atlas_at(&g, 1.5);
    ap.charts = vec![linear_chart(&g, [[2.0, 1.0], [1.0, 1.0]])];
    let aq = atlas_at(&g, 2.0);
    let m = pq_map(&g, &ap, &aq, &[pos(&g, |x, y| x - y)]).unwrap();
    assert!(!m.all_identity());
    assert!(m.all_lipschitz() && m.differentials_agree());
}

#[test]
fn weak_differential_norms_are_p_free() {
    let g = grid(4);
    let (ap, aq) = (atlas_at(&g, 1.5), atlas_at(&g, 3.0));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let f = VertexFunction::new(&g, (0..16).map(|_| rng.random_range(-8..=8) as f64).collect()).unwrap();
        let np = differential_section(&g, &f, &ap.charts).pointwise_norms(&ap.charts);
        let nq = differential_section(&g, &f, &aq.charts).pointwise_norms(&aq.charts);
        for x in 0..16 {
            assert!(np[&x] <= nq[&x]);
            assert_eq!(np[&x], nq[&x]);
        }
    }
}

#[test]
fn cheeger_equal_on_grid() {
    let g = grid(4);
    let phi = ChartCandidate::coordinates(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = VertexFunction::new(&g, (0..16).map(|_| rng.random_range(-5..=5) as f64).collect()).unwrap();
    let r = cheeger_compare(&g, &f, &phi);
    assert!(r.gaps().is_empty());
    for l in &r.local {
        assert_eq!(l.lip, l.weak);
        assert!(l.kernel.is_none());
        assert_eq!(l.submetry, Some(true));
    }
}

#[test]
fn cheeger_gap_on_rug() {
    let g = rug(4);
    let phi = ChartCandidate::coordinates(&g).unwrap();
    let r = cheeger_compare(&g, &pos(&g, |_, y| y), &phi);
    assert_eq!(r.gaps().len(), 16);
    let l = r.at(5);
    assert_eq!((l.lip.clone(), l.weak.clone()), (rational(1, 1), rational(0, 1)));
    assert_eq!(l.verdict, CheegerVerdict::Gap);
    assert_eq!(l.kernel, Some(vec![rational(0, 1), rational(1, 1)]));
    assert_eq!(l.submetry, Some(true));
}

#[test]
fn cheeger_kernel_without_gap() {
    let g = rug(4);
    let phi = ChartCandidate::coordinates(&g).unwrap();
    let r = cheeger_compare(&g, &pos(&g, |x, y| x + y), &phi);
    assert!(r.gaps().is_empty());
    for l in &r.local {
        assert_eq!(l.lip, rational(1, 1));
        assert_eq!(l.weak, rational(1, 1));
        assert_eq!(l.kernel, Some(vec![rational(0, 1), rational(1, 1)]));
        assert_eq!(l.submetry, Some(true));
    }
}

#[test]
fn submetry_skipped_without_independent_cheeger_chart() {
    let g = grid(3);
    let phi = ChartCandidate::new(vec!["s".into(), "t".into()], vec![pos(&g, |x, y| x + y), pos(&g, |x, y| 2.0 * x + 2.0 * y)]).unwrap();
    let r = cheeger_compare(&g, &pos(&g, |x, _| x), &phi);
    assert!(r.local.iter().all(|l| l.submetry.is_none()));
}

//! Static SVG panels: edge heatmaps and vertex value maps.

use std::fmt::Write as _;

use modgrad::mmspace::MetricGraph;

const SIZE: f64 = 320.0;
const MARGIN: f64 = 24.0;
const TITLE: f64 = 20.0;

/// Vertex positions scaled into the panel; vertices without positions are
/// placed on a circle.
fn layout(graph: &MetricGraph) -> Vec<(f64, f64)> {
    let n = graph.vertex_count();
    let raw: Vec<[f64; 2]> = if graph.has_positions() {
        (0..n).map(|v| graph.position(v).expect("positions present")).collect()
    } else {
        (0..n)
            .map(|v| {
                let t = std::f64::consts::TAU * v as f64 / n.max(1) as f64;
                [t.cos(), t.sin()]
            })
            .collect()
    };
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &raw {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let inner = SIZE - 2.0 * MARGIN;
    raw.iter()
        .map(|p| {
            let x = MARGIN + (p[0] - lo[0]) / span * inner;
            // y grows upward in the model
            let y = TITLE + MARGIN + inner - (p[1] - lo[1]) / span * inner;
            (x, y)
        })
        .collect()
}

/// Blue (low) to red (high).
fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

fn normalizer(values: &[f64]) -> impl Fn(f64) -> f64 {
    let lo = values.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    move |v| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One panel: edges colored by `edge_values` (grey when absent), vertices by
/// `vertex_values`.
pub fn panel(graph: &MetricGraph, title: &str, edge_values: Option<&[f64]>, vertex_values: Option<&[f64]>) -> String {
    let pos = layout(graph);
    let mut s = String::new();
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="16" font-family="sans-serif" font-size="12">{}</text>"#, escape(title));
    let en = edge_values.map(normalizer);
    for (e, edge) in graph.edges().iter().enumerate() {
        let (a, b) = (pos[edge.u], pos[edge.v]);
        let stroke = match (&en, edge_values) {
            (Some(n), Some(vals)) => color(n(vals[e])),
            _ => "#999999".to_string(),
        };
        let dash = if edge.is_null() { r#" stroke-dasharray="3,3""# } else { "" };
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="3"{dash}/>"#,
            a.0, a.1, b.0, b.1
        );
    }
    let vn = vertex_values.map(normalizer);
    for (v, p) in pos.iter().enumerate() {
        let fill = match (&vn, vertex_values) {
            (Some(n), Some(vals)) => color(n(vals[v])),
            _ => "#333333".to_string(),
        };
        let r = if vertex_values.is_some() { 5.0 } else { 2.5 };
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{fill}"/>"#, p.0, p.1);
    }
    s
}

/// Panels stacked in a row.
pub fn document(panels: &[String]) -> String {
    let height = SIZE + TITLE;
    let width = (SIZE * panels.len() as f64).max(SIZE);
    let mut s = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    s.push('\n');
    for (i, p) in panels.iter().enumerate() {
        let _ = writeln!(s, r#"<g transform="translate({},0)">"#, SIZE * i as f64);
        s.push_str(p);
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use modgrad::mmspace::{generate, GeneratorKind};

    #[test]
    fn heatmap_has_one_line_per_edge() {
        let g = generate(&GeneratorKind::Rug { nx: 3, ny: 3, h: 1.0 }).unwrap().graph;
        let vals: Vec<f64> = (0..g.edge_count()).map(|e| e as f64).collect();
        let doc = document(&[panel(&g, "rho <edges>", Some(&vals), None)]);
        assert_eq!(doc.matches("<line").count(), g.edge_count());
        assert_eq!(doc.matches("stroke-dasharray").count(), 6);
        assert!(doc.contains("rho &lt;edges&gt;"));
        assert!(doc.starts_with("<svg") && doc.ends_with("</svg>\n"));
    }
}

use serde_json::{json, Map, Value};

use super::{Atlas, Chart, ChartCandidate};
use crate::error::{Error, Result};
use crate::mmspace::{MetricGraph, VertexFunction};

/// `{"dimension", "components", "phi": {vertex: [..]}, "locations", "stars"}`;
/// `stars` carries `W_x` and `I(φ)(x)` per location for inspection.
pub fn chart_to_value(graph: &MetricGraph, chart: &Chart) -> Value {
    let phi: Map<String, Value> = (0..graph.vertex_count())
        .map(|v| (graph.vertex(v).id.clone(), json!(chart.phi.value(v))))
        .collect();
    let stars: Vec<Value> = chart
        .locations
        .iter()
        .map(|&x| {
            json!({
                "vertex": graph.vertex(x).id,
                "edges": chart.gradient.edges[x].iter().map(|&e| graph.edge(e).id.clone()).collect::<Vec<_>>(),
                "directions": chart.gradient.directions[x],
                "index": chart.index[x],
            })
        })
        .collect();
    json!({
        "dimension": chart.dim(),
        "components": chart.phi.names,
        "phi": phi,
        "locations": chart.locations.iter().map(|&x| graph.vertex(x).id.clone()).collect::<Vec<_>>(),
        "stars": stars,
    })
}

/// Reads the map and locations; directions and indices are recomputed.
pub fn chart_from_value(graph: &MetricGraph, doc: &Value) -> Result<Chart> {
    let names: Vec<String> = doc
        .get("components")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("$.components", "expected an array of names"))?
        .iter()
        .enumerate()
        .map(|(i, n)| {
            n.as_str()
                .map(str::to_owned)
                .ok_or_else(|| Error::parse(format!("$.components[{i}]"), "expected a string"))
        })
        .collect::<Result<_>>()?;
    let phi = doc
        .get("phi")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::parse("$.phi", "expected an object keyed by vertex"))?;
    let mut columns = vec![vec![0.0; graph.vertex_count()]; names.len()];
    for v in 0..graph.vertex_count() {
        let id = &graph.vertex(v).id;
        let path = format!("$.phi.{id}");
        let row = phi
            .get(id)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse(&path, "missing value for vertex"))?;
        if row.len() != names.len() {
            return Err(Error::parse(&path, format!("expected {} components", names.len())));
        }
        for (k, a) in row.iter().enumerate() {
            columns[k][v] = a
                .as_f64()
                .ok_or_else(|| Error::parse(format!("{path}[{k}]"), "expected a number"))?;
        }
    }
    if let Some(extra) = phi.keys().find(|k| graph.vertex_index(k).is_none()) {
        return Err(Error::parse(format!("$.phi.{extra}"), "unknown vertex"));
    }
    let components = columns
        .into_iter()
        .map(|c| VertexFunction::new(graph, c))
        .collect::<Result<Vec<_>>>()?;
    let locations = doc
        .get("locations")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("$.locations", "expected an array of vertex ids"))?
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let path = format!("$.locations[{i}]");
            let id = l.as_str().ok_or_else(|| Error::parse(&path, "expected a string"))?;
            graph
                .vertex_index(id)
                .ok_or_else(|| Error::parse(&path, format!("unknown vertex {id:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Chart::new(graph, ChartCandidate::new(names, components)?, locations)
}

pub fn atlas_to_value(graph: &MetricGraph, atlas: &Atlas) -> Value {
    let ids = |vs: &[usize]| vs.iter().map(|&v| graph.vertex(v).id.clone()).collect::<Vec<_>>();
    json!({
        "p": atlas.p,
        "dimensions": atlas.dimensions(),
        "charts": atlas.charts.iter().map(|c| chart_to_value(graph, c)).collect::<Vec<_>>(),
        "zero": ids(&atlas.zero),
        "uncovered": ids(&atlas.uncovered),
        "warnings": atlas.warnings.iter().map(|w| json!({
            "vertex": graph.vertex(w.vertex).id,
            "achieved": w.achieved,
            "ceiling": w.ceiling,
        })).collect::<Vec<_>>(),
    })
}

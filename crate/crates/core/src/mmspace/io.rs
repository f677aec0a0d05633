//! JSON forms of spaces, curve families and vertex functions.
//!
//! Space documents: `{"vertices":[{"id":..}], "edges":[{"id","u","v","len","measure"}]}`;
//! vertices may carry an optional `"pos":[x,y]`. The canonical form written by
//! [`save_space`] lists vertices and edges sorted by id and prints floats with
//! 17 significant digits.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

use super::curve::{Curve, Step};
use super::family::{Axis, Connector, CurveFamily, EdgeRestriction};
use super::function::VertexFunction;
use super::graph::{GraphBuilder, MetricGraph};

fn get<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::parse(path, format!("missing field \"{key}\"")))
}

fn as_obj<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::parse(path, "expected an object"))
}

fn as_arr<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::parse(path, "expected an array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::parse(path, "expected a string"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::parse(path, "expected a number"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::parse(path, "expected a nonnegative integer"))
}

pub fn parse_json(bytes: &[u8]) -> Result<Value> {
    serde_json::from_slice(bytes).map_err(|e| Error::parse("$", format!("invalid JSON: {e}")))
}

pub fn load_space(bytes: &[u8]) -> Result<MetricGraph> {
    space_from_value(&parse_json(bytes)?)
}

pub fn space_from_value(doc: &Value) -> Result<MetricGraph> {
    let root = as_obj(doc, "$")?;
    let mut b = GraphBuilder::new();
    let mut vertex_ids = BTreeSet::new();
    for (i, v) in as_arr(get(root, "vertices", "$")?, "$.vertices")?.iter().enumerate() {
        let path = format!("$.vertices[{i}]");
        let obj = as_obj(v, &path)?;
        let id = as_str(get(obj, "id", &path)?, &format!("{path}.id"))?;
        if !vertex_ids.insert(id.to_string()) {
            return Err(Error::parse(format!("{path}.id"), format!("duplicate vertex id {id:?}")));
        }
        let pos = match obj.get("pos") {
            None | Some(Value::Null) => None,
            Some(p) => {
                let pp = format!("{path}.pos");
                let arr = as_arr(p, &pp)?;
                if arr.len() != 2 {
                    return Err(Error::parse(pp, "expected [x, y]"));
                }
                Some([as_f64(&arr[0], &pp)?, as_f64(&arr[1], &pp)?])
            }
        };
        b.vertex(id, pos);
    }
    let mut edge_ids = BTreeSet::new();
    for (i, e) in as_arr(get(root, "edges", "$")?, "$.edges")?.iter().enumerate() {
        let path = format!("$.edges[{i}]");
        let obj = as_obj(e, &path)?;
        let id = as_str(get(obj, "id", &path)?, &format!("{path}.id"))?;
        if !edge_ids.insert(id.to_string()) {
            return Err(Error::parse(format!("{path}.id"), format!("duplicate edge id {id:?}")));
        }
        let u = as_str(get(obj, "u", &path)?, &format!("{path}.u"))?;
        let v = as_str(get(obj, "v", &path)?, &format!("{path}.v"))?;
        for (end, name) in [(u, "u"), (v, "v")] {
            if !vertex_ids.contains(end) {
                return Err(Error::parse(
                    format!("{path}.{name}"),
                    format!("edge {id:?} has dangling endpoint {end:?}"),
                ));
            }
        }
        let len = as_f64(get(obj, "len", &path)?, &format!("{path}.len"))?;
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::parse(
                format!("{path}.len"),
                format!("edge {id:?} has nonpositive length {len}"),
            ));
        }
        let measure = as_f64(get(obj, "measure", &path)?, &format!("{path}.measure"))?;
        if !(measure.is_finite() && measure >= 0.0) {
            return Err(Error::parse(
                format!("{path}.measure"),
                format!("edge {id:?} has negative measure {measure}"),
            ));
        }
        b.edge(id, u, v, len, measure);
    }
    b.build()
}

/// Float with 17 significant digits; always parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

pub fn save_space(graph: &MetricGraph) -> Vec<u8> {
    let mut out = String::from("{\"vertices\":[");
    for (i, v) in graph.vertices().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{{\"id\":{}", json_str(&v.id)).unwrap();
        if let Some(p) = v.pos {
            write!(out, ",\"pos\":[{},{}]", fmt_f64(p[0]), fmt_f64(p[1])).unwrap();
        }
        out.push('}');
    }
    out.push_str("],\"edges\":[");
    for (i, e) in graph.edges().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(
            out,
            "{{\"id\":{},\"u\":{},\"v\":{},\"len\":{},\"measure\":{}}}",
            json_str(&e.id),
            json_str(&graph.vertex(e.u).id),
            json_str(&graph.vertex(e.v).id),
            fmt_f64(e.len),
            fmt_f64(e.measure)
        )
        .unwrap();
    }
    out.push_str("]}\n");
    out.into_bytes()
}

pub fn curve_from_value(graph: &MetricGraph, v: &Value, path: &str) -> Result<Curve> {
    let mut steps = Vec::new();
    for (k, s) in as_arr(v, path)?.iter().enumerate() {
        let sp = format!("{path}[{k}]");
        let pair = as_arr(s, &sp)?;
        if pair.len() != 2 {
            return Err(Error::parse(sp, "expected [edge_id, \"+\"|\"-\"]"));
        }
        let id = as_str(&pair[0], &sp)?;
        let e = graph
            .edge_index(id)
            .ok_or_else(|| Error::parse(&sp, format!("unknown edge {id:?}")))?;
        let forward = match as_str(&pair[1], &sp)? {
            "+" => true,
            "-" => false,
            o => return Err(Error::parse(sp, format!("orientation must be \"+\" or \"-\", got {o:?}"))),
        };
        steps.push(Step::new(e, forward));
    }
    Curve::new(graph, steps).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn curve_to_value(graph: &MetricGraph, c: &Curve) -> Value {
    Value::Array(
        c.steps()
            .iter()
            .map(|s| {
                Value::Array(vec![
                    Value::String(graph.edge(s.edge).id.clone()),
                    Value::String(if s.forward { "+" } else { "-" }.into()),
                ])
            })
            .collect(),
    )
}

pub fn load_family(graph: &MetricGraph, bytes: &[u8]) -> Result<CurveFamily> {
    family_from_value(graph, &parse_json(bytes)?)
}

pub fn family_from_value(graph: &MetricGraph, doc: &Value) -> Result<CurveFamily> {
    let root = as_obj(doc, "$")?;
    if let Some(list) = root.get("explicit") {
        let curves = as_arr(list, "$.explicit")?
            .iter()
            .enumerate()
            .map(|(i, c)| curve_from_value(graph, c, &format!("$.explicit[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        return CurveFamily::explicit(curves).map_err(|e| Error::parse("$.explicit", e.to_string()));
    }
    let conn = as_obj(get(root, "connector", "$")?, "$.connector")?;
    let ids = |key: &str| -> Result<Vec<usize>> {
        let path = format!("$.connector.{key}");
        as_arr(get(conn, key, "$.connector")?, &path)?
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let p = format!("{path}[{i}]");
                let id = as_str(v, &p)?;
                graph
                    .vertex_index(id)
                    .ok_or_else(|| Error::parse(p, format!("unknown vertex {id:?}")))
            })
            .collect()
    };
    let from = ids("from")?;
    let to = ids("to")?;
    let simple = match conn.get("simple") {
        None => true,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| Error::parse("$.connector.simple", "expected a boolean"))?,
    };
    let max_steps = as_usize(get(conn, "max_steps", "$.connector")?, "$.connector.max_steps")?;
    let restriction = if let Some(a) = conn.get("axis") {
        Some(EdgeRestriction::Axis(match as_str(a, "$.connector.axis")? {
            "horizontal" => Axis::Horizontal,
            "vertical" => Axis::Vertical,
            o => return Err(Error::parse("$.connector.axis", format!("unknown axis {o:?}"))),
        }))
    } else if let Some(list) = conn.get("edges") {
        let mut set = BTreeSet::new();
        for (i, v) in as_arr(list, "$.connector.edges")?.iter().enumerate() {
            let p = format!("$.connector.edges[{i}]");
            let id = as_str(v, &p)?;
            set.insert(
                graph
                    .edge_index(id)
                    .ok_or_else(|| Error::parse(p, format!("unknown edge {id:?}")))?,
            );
        }
        Some(EdgeRestriction::Edges(set))
    } else {
        None
    };
    Ok(CurveFamily::Connector(Connector {
        from,
        to,
        simple,
        max_steps,
        restriction,
    }))
}

pub fn family_to_value(graph: &MetricGraph, family: &CurveFamily) -> Value {
    match family {
        CurveFamily::Explicit(curves) => serde_json::json!({
            "explicit": curves.iter().map(|c| curve_to_value(graph, c)).collect::<Vec<_>>()
        }),
        CurveFamily::Connector(c) => {
            let names = |v: &[usize]| v.iter().map(|&i| graph.vertex(i).id.clone()).collect::<Vec<_>>();
            let mut obj = serde_json::json!({
                "from": names(&c.from),
                "to": names(&c.to),
                "simple": c.simple,
                "max_steps": c.max_steps,
            });
            match &c.restriction {
                Some(EdgeRestriction::Axis(a)) => {
                    obj["axis"] = Value::String(
                        match a {
                            Axis::Horizontal => "horizontal",
                            Axis::Vertical => "vertical",
                        }
                        .into(),
                    );
                }
                Some(EdgeRestriction::Edges(set)) => {
                    obj["edges"] = set.iter().map(|&e| Value::String(graph.edge(e).id.clone())).collect();
                }
                None => {}
            }
            serde_json::json!({ "connector": obj })
        }
    }
}

/// `{"values":{"v1":0.0,...}}`; every vertex must be assigned.
pub fn load_function(graph: &MetricGraph, bytes: &[u8]) -> Result<VertexFunction> {
    function_from_value(graph, &parse_json(bytes)?)
}

pub fn function_from_value(graph: &MetricGraph, doc: &Value) -> Result<VertexFunction> {
    let root = as_obj(doc, "$")?;
    let map = as_obj(get(root, "values", "$")?, "$.values")?;
    let mut values = vec![f64::NAN; graph.vertex_count()];
    for (id, v) in map {
        let path = format!("$.values.{id}");
        let i = graph
            .vertex_index(id)
            .ok_or_else(|| Error::parse(&path, format!("unknown vertex {id:?}")))?;
        values[i] = as_f64(v, &path)?;
    }
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::parse(
            "$.values",
            format!("no value for vertex {:?}", graph.vertex(i).id),
        ));
    }
    VertexFunction::new(graph, values)
}

pub fn function_to_value(graph: &MetricGraph, f: &VertexFunction) -> Value {
    let mut map = Map::new();
    for (i, v) in f.values().iter().enumerate() {
        map.insert(graph.vertex(i).id.clone(), serde_json::json!(v));
    }
    serde_json::json!({ "values": map })
}

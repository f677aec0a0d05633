//! Experiment configuration files and function definitions.

use std::fmt;
use std::path::{Path, PathBuf};

use modgrad::mmspace::io::{function_from_value, load_family, load_space, parse_json};
use modgrad::mmspace::{generate, CurveFamily, GeneratorKind, MetricGraph, VertexFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::expr;

/// Bad input that is not a library parse error: unreadable config, bad
/// expression, missing file. Maps to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSource {
    Generate(GeneratorKind),
    File(PathBuf),
}

/// Suites in the order they run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Modulus,
    Thm11,
    Corollary,
    Falsify,
    Atlas,
    Differential,
    Bundle,
    Cheeger,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Modulus => "modulus",
            Suite::Thm11 => "thm11",
            Suite::Corollary => "corollary",
            Suite::Falsify => "falsify",
            Suite::Atlas => "atlas",
            Suite::Differential => "differential",
            Suite::Bundle => "bundle",
            Suite::Cheeger => "cheeger",
        }
    }
}

/// A named vertex function: exactly one of a polynomial expression in x, y,
/// explicit values keyed by vertex id, or seeded random integers in a range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Map<String, Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<[i64; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceSource,
    /// Curve family file for the modulus suite; generators supply their own.
    #[serde(default)]
    pub family: Option<PathBuf>,
    #[serde(default = "default_exponents")]
    pub exponents: Vec<f64>,
    #[serde(default)]
    pub functions: Vec<FunctionDef>,
    /// Chart candidates; the coordinates when empty.
    #[serde(default)]
    pub pool: Vec<FunctionDef>,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub output: Outputs,
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_exponents() -> Vec<f64> {
    vec![2.0]
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let bytes = read(path)?;
        let mut cfg: Self = serde_json::from_slice(&bytes)
            .map_err(|e| input_error(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Makes relative paths relative to the config file's directory.
    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let SpaceSource::File(p) = &mut self.space {
            fix(p);
        }
        if let Some(p) = &mut self.family {
            fix(p);
        }
        for p in [&mut self.output.report, &mut self.output.csv, &mut self.output.svg].into_iter().flatten() {
            fix(p);
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if let Some(p) = self.exponents.iter().find(|p| !(p.is_finite() && **p >= 1.0)) {
            return Err(input_error(format!("exponent {p} must be finite and at least 1")));
        }
        if self.exponents.is_empty() {
            return Err(input_error("exponent list is empty"));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(input_error(format!("epsilon {e} must lie in (0, 1)")));
        }
        let files = match &self.space {
            SpaceSource::File(p) => vec![p],
            SpaceSource::Generate(_) => vec![],
        };
        for f in files.into_iter().chain(&self.family) {
            if !f.exists() {
                return Err(input_error(format!("referenced file {} does not exist", f.display())));
            }
        }
        Ok(())
    }

    pub fn space(&self) -> anyhow::Result<(MetricGraph, Option<CurveFamily>)> {
        let (graph, generated) = match &self.space {
            SpaceSource::Generate(kind) => {
                let g = generate(kind)?;
                (g.graph, Some(g.family))
            }
            SpaceSource::File(p) => (load_space(&read(p)?)?, None),
        };
        let family = match &self.family {
            Some(p) => Some(load_family(&graph, &read(p)?)?),
            None => generated,
        };
        Ok((graph, family))
    }
}

pub fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))
}

pub fn from_expression(graph: &MetricGraph, src: &str) -> anyhow::Result<VertexFunction> {
    let e = expr::parse(src).map_err(|e| input_error(format!("expression {src:?}: {e}")))?;
    Ok(VertexFunction::from_positions(graph, |x, y| e.eval(x, y))?)
}

/// Evaluates definitions in order; random ones draw from one seeded stream.
pub fn functions(graph: &MetricGraph, defs: &[FunctionDef], seed: u64) -> anyhow::Result<Vec<(String, VertexFunction)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    defs.iter()
        .map(|d| {
            let f = match (&d.expr, &d.values, d.random) {
                (Some(src), None, None) => from_expression(graph, src)?,
                (None, Some(values), None) => {
                    function_from_value(graph, &serde_json::json!({ "values": values }))?
                }
                (None, None, Some([lo, hi])) => {
                    if lo > hi {
                        return Err(input_error(format!("function {}: empty range [{lo}, {hi}]", d.name)));
                    }
                    let values = (0..graph.vertex_count()).map(|_| rng.random_range(lo..=hi) as f64).collect();
                    VertexFunction::new(graph, values)?
                }
                _ => {
                    return Err(input_error(format!(
                        "function {}: give exactly one of \"expr\", \"values\", \"random\"",
                        d.name
                    )))
                }
            };
            Ok((d.name.clone(), f))
        })
        .collect()
}

/// A function file: `{"values": {...}}` or `{"expr": "..."}`.
pub fn load_function(graph: &MetricGraph, path: &Path) -> anyhow::Result<VertexFunction> {
    let doc = parse_json(&read(path)?)?;
    match doc.get("expr").and_then(Value::as_str) {
        Some(src) => from_expression(graph, src),
        None => Ok(function_from_value(graph, &doc)?),
    }
}

/// A pool file: an array of function definitions, or `{"functions": [...]}`.
pub fn load_pool(graph: &MetricGraph, path: &Path, seed: u64) -> anyhow::Result<Vec<(String, VertexFunction)>> {
    let doc = parse_json(&read(path)?)?;
    let list = doc.get("functions").cloned().unwrap_or(doc);
    let defs: Vec<FunctionDef> = serde_json::from_value(list)
        .map_err(|e| input_error(format!("pool {}: {e}", path.display())))?;
    functions(graph, &defs, seed)
}

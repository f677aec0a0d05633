mod config;
mod expr;
mod report;
mod suites;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use modgrad::charts::{atlas_to_value, chart_from_value, chart_to_value, differential, Chart, ChartCandidate};
use modgrad::gradient::minimal_weak_gradient;
use modgrad::mmspace::io::{family_to_value, load_family, load_space, parse_json, save_space};
use modgrad::mmspace::{generate, GeneratorKind, Granularity, Location, MetricGraph};
use modgrad::scalar::Scalar;
use serde_json::{json, Value};

use config::{input_error, load_function, load_pool, read, ExperimentConfig, InputError};
use report::{num, Report};
use suites::Context;

/// Minimal weak upper gradients, p-weak charts and the cotangent bundle on
/// finite metric graphs.
///
/// Exit codes: 0 every check passed, 1 a check failed, 2 bad input,
/// 3 a search budget ran out.
#[derive(Parser, Debug)]
#[command(name = "modgrad", version)]
struct Cli {
    /// Worker threads for per-location parallelism.
    #[arg(long, env = "MODGRAD_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a space file (and optionally its canonical curve family).
    Gen(GenArgs),
    /// p-modulus of a curve family with its dual certificate.
    Modulus(ModulusArgs),
    /// Minimal weak upper gradient of a function; optionally verify its
    /// curvewise representation.
    Gradient(GradientArgs),
    /// Build an atlas from a pool of candidate maps, or differentiate in a chart.
    Chart(ChartArgs),
    /// Cotangent bundle checks over an atlas file.
    Bundle(BundleArgs),
    /// Run an experiment configuration.
    Run(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Args, Debug, Default)]
struct Output {
    /// Report file, written in --format.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Option<Format>,
    /// Additional CSV summary.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Additional SVG plots.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenKind {
    Grid,
    Rug,
    ParallelPaths,
    Carpet,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 3)]
    nx: usize,
    #[arg(long, default_value_t = 3)]
    ny: usize,
    /// Lattice spacing.
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    /// Number of parallel paths.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Edges per parallel path.
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Carpet level.
    #[arg(long, default_value_t = 1)]
    level: u32,
    /// Space file to write.
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the generator's curve family.
    #[arg(long)]
    family: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ModulusArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    family: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Certify the optimum in rational arithmetic (families of at most 200 curves).
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct GradientArgs {
    #[arg(long)]
    space: PathBuf,
    /// Function file: {"values": {...}} or {"expr": "..."}.
    #[arg(long)]
    f: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Build a representing plan and check the esssup identity on {g_f > 0}.
    #[arg(long)]
    verify_thm11: bool,
    /// Also check positive mass on the ε-productive set.
    #[arg(long)]
    eps: Option<f64>,
    /// Rational arithmetic for the verification.
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct ChartArgs {
    #[command(subcommand)]
    diff: Option<ChartCommand>,
    #[arg(long, required = true)]
    space: Option<PathBuf>,
    /// Pool of candidate maps: [{"name", "expr" | "values" | "random"}].
    #[arg(long, required = true)]
    pool: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Atlas file to write.
    #[arg(long, required = true)]
    atlas: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Chart dimension map.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ChartCommand {
    /// Differential of a function in a chart (or in every chart of an atlas).
    Diff(DiffArgs),
}

#[derive(Args, Debug)]
struct DiffArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    f: PathBuf,
    /// Chart or atlas file.
    #[arg(long)]
    chart: PathBuf,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BundleCheck {
    Cocycle,
    Norms,
    Pq,
    Cheeger,
}

#[derive(Args, Debug)]
struct BundleArgs {
    #[arg(long)]
    space: PathBuf,
    /// Atlas file (or a list of charts) written by `modgrad chart`.
    #[arg(long)]
    atlas: PathBuf,
    #[arg(long, value_enum)]
    check: BundleCheck,
    /// Function file for the norms and cheeger checks.
    #[arg(long)]
    f: Option<PathBuf>,
    /// Exponents for the pq check, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1.5,2,3")]
    exponents: Vec<f64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's report path.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("JSON values serialize");
    s.push(b'\n');
    s
}

/// Writes the report in every requested form; prints the JSON when no file
/// was requested.
fn emit(report: &Report, header: Value, out: &Output) -> anyhow::Result<i32> {
    let doc = report.to_json(header);
    match &out.report {
        Some(path) => {
            let bytes = match out.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&doc),
                Format::Csv => report.to_csv(),
                Format::Svg => report.to_svg().into_bytes(),
            };
            write(path, &bytes)?;
        }
        None => print!("{}", String::from_utf8(json_bytes(&doc)).expect("JSON is UTF-8")),
    }
    if let Some(p) = &out.csv {
        write(p, &report.to_csv())?;
    }
    if let Some(p) = &out.svg {
        write(p, report.to_svg().as_bytes())?;
    }
    Ok(report.exit_code())
}

fn load_graph(path: &Path) -> anyhow::Result<MetricGraph> {
    load_space(&read(path)?).with_context(|| format!("space {}", path.display()))
}

fn context(instance: &str, graph: MetricGraph) -> Context {
    Context {
        instance: instance.into(),
        graph,
        family: None,
        exponents: vec![2.0],
        functions: Vec::new(),
        pool: Vec::new(),
        epsilons: Vec::new(),
        exact: false,
        seed: 0,
    }
}

fn cmd_gen(a: &GenArgs) -> anyhow::Result<i32> {
    let kind = match a.kind {
        GenKind::Grid => GeneratorKind::Grid { nx: a.nx, ny: a.ny, h: a.h },
        GenKind::Rug => GeneratorKind::Rug { nx: a.nx, ny: a.ny, h: a.h },
        GenKind::ParallelPaths => GeneratorKind::ParallelPaths { k: a.k, m: a.m },
        GenKind::Carpet => GeneratorKind::Carpet { level: a.level },
    };
    let g = generate(&kind).map_err(|e| input_error(e.to_string()))?;
    write(&a.output, &save_space(&g.graph))?;
    if let Some(f) = &a.family {
        write(f, &json_bytes(&family_to_value(&g.graph, &g.family)))?;
    }
    Ok(0)
}

fn cmd_modulus(a: &ModulusArgs) -> anyhow::Result<i32> {
    let graph = load_graph(&a.space)?;
    let family = load_family(&graph, &read(&a.family)?).with_context(|| format!("family {}", a.family.display()))?;
    let mut ctx = context(&a.space.display().to_string(), graph);
    ctx.family = Some(family);
    ctx.exponents = vec![a.p];
    ctx.exact = a.exact;
    let mut report = Report::default();
    suites::modulus(&ctx, &mut report)?;
    emit(&report, json!({"command": "modulus", "p": a.p, "exact": a.exact}), &a.out)
}

fn cmd_gradient(a: &GradientArgs) -> anyhow::Result<i32> {
    let graph = load_graph(&a.space)?;
    let f = load_function(&graph, &a.f)?;
    let mut report = Report::default();
    let gf = minimal_weak_gradient::<f64>(&graph, &f, Granularity::EdgePoint);
    let stars = minimal_weak_gradient::<f64>(&graph, &f, Granularity::VertexStar);
    report.detail(
        "gradient",
        json!({
            "edges": (0..graph.edge_count()).map(|e| (graph.location_id(Location::Edge(e)).to_string(), json!(gf.values[e]))).collect::<serde_json::Map<_, _>>(),
            "stars": (0..graph.vertex_count()).map(|v| (graph.vertex(v).id.clone(), json!(stars.values[v]))).collect::<serde_json::Map<_, _>>(),
        }),
    );
    report.panels.push(svg::panel(&graph, "g_f", Some(&gf.values), None));
    let mut ctx = context(&a.space.display().to_string(), graph);
    ctx.functions = vec![(a.f.display().to_string(), f)];
    ctx.exponents = vec![a.p];
    ctx.exact = a.exact;
    ctx.epsilons = a.eps.into_iter().collect();
    if a.verify_thm11 {
        suites::thm11(&ctx, &mut report).context("stage thm11")?;
    }
    if a.eps.is_some() {
        suites::corollary(&ctx, &mut report).context("stage corollary")?;
    }
    emit(&report, json!({"command": "gradient", "p": a.p, "exact": a.exact, "eps": a.eps}), &a.out)
}

fn cmd_chart(a: &ChartArgs) -> anyhow::Result<i32> {
    if let Some(ChartCommand::Diff(d)) = &a.diff {
        return cmd_chart_diff(d);
    }
    let (space, pool, atlas_path) = (
        a.space.as_ref().expect("required by clap"),
        a.pool.as_ref().expect("required by clap"),
        a.atlas.as_ref().expect("required by clap"),
    );
    let graph = load_graph(space)?;
    let mut ctx = context(&space.display().to_string(), graph);
    ctx.pool = load_pool(&ctx.graph, pool, a.seed)?;
    ctx.exponents = vec![a.p];
    let mut report = Report::default();
    let atlas = suites::atlas(&ctx, &mut report)?.remove(0);
    write(atlas_path, &json_bytes(&atlas_to_value(&ctx.graph, &atlas)))?;
    if let Some(p) = &a.svg {
        write(p, report.to_svg().as_bytes())?;
    }
    println!("{}", json!({"dimensions": atlas.dimensions(), "uncovered": atlas.uncovered.len(), "warnings": atlas.warnings.len()}));
    Ok(report.exit_code())
}

/// A single chart document, or every chart of an atlas document.
fn load_charts(graph: &MetricGraph, path: &Path) -> anyhow::Result<Vec<Chart>> {
    let doc = parse_json(&read(path)?)?;
    let list = match doc.get("charts").and_then(Value::as_array) {
        Some(list) => list.clone(),
        None => match doc.as_array() {
            Some(list) => list.clone(),
            None => vec![doc],
        },
    };
    list.iter()
        .map(|c| chart_from_value(graph, c).with_context(|| format!("chart file {}", path.display())))
        .collect()
}

fn cmd_chart_diff(a: &DiffArgs) -> anyhow::Result<i32> {
    let graph = load_graph(&a.space)?;
    let f = load_function(&graph, &a.f)?;
    let charts = load_charts(&graph, &a.chart)?;
    let gf = minimal_weak_gradient::<f64>(&graph, &f, Granularity::VertexStar);
    let mut report = Report::default();
    let mut out = Vec::new();
    for (i, c) in charts.iter().enumerate() {
        let d = differential(&graph, &f, c);
        let inst = format!("chart {i} ({})", c.phi.names.join(", "));
        for l in &d.local {
            let loc = graph.vertex(l.vertex).id.clone();
            if l.is_exact() {
                report.close("differential", &inst, &loc, "norm_vs_g_f", gf.values[l.vertex], l.norm.to_f64(), 1e-12);
            } else {
                report.info("differential", &inst, &loc, "fit_residual", &num(l.residual.to_f64()));
            }
        }
        out.push(json!({
            "chart": chart_to_value(&graph, c),
            "differential": d.local.iter().map(|l| json!({
                "vertex": graph.vertex(l.vertex).id,
                "xi": l.xi_f64(),
                "residual": l.residual.to_f64(),
                "norm": l.norm.to_f64(),
            })).collect::<Vec<_>>(),
        }));
    }
    report.detail("differential", Value::Array(out));
    emit(&report, json!({"command": "chart diff"}), &a.out)
}

fn cmd_bundle(a: &BundleArgs) -> anyhow::Result<i32> {
    let graph = load_graph(&a.space)?;
    let doc = parse_json(&read(&a.atlas)?)?;
    let p_atlas = doc.get("p").and_then(Value::as_f64).unwrap_or(2.0);
    let charts = load_charts(&graph, &a.atlas)?;
    let mut ctx = context(&a.space.display().to_string(), graph);
    if let Some(f) = &a.f {
        ctx.functions = vec![(f.display().to_string(), load_function(&ctx.graph, f)?)];
    }
    let need_f = || {
        if ctx.functions.is_empty() {
            Err(input_error("this check needs --f"))
        } else {
            Ok(())
        }
    };
    let mut report = Report::default();
    match a.check {
        BundleCheck::Cocycle => suites::bundle_cocycle(&ctx, &charts, &mut report)?,
        BundleCheck::Norms => {
            need_f()?;
            ctx.exponents = a.exponents.clone();
            suites::bundle_norms(&ctx, &charts, p_atlas, &mut report)?
        }
        BundleCheck::Pq => {
            if let Some(p) = a.exponents.iter().find(|p| !(p.is_finite() && **p >= 1.0)) {
                return Err(input_error(format!("exponent {p} must be finite and at least 1")));
            }
            ctx.exponents = a.exponents.clone();
            ctx.pool = charts
                .iter()
                .flat_map(|c| c.phi.names.iter().cloned().zip(c.phi.components.iter().cloned()))
                .collect();
            suites::bundle_pq(&ctx, &mut report)?
        }
        BundleCheck::Cheeger => {
            need_f()?;
            if ChartCandidate::coordinates(&ctx.graph).is_err() {
                return Err(input_error("the cheeger check needs vertex positions"));
            }
            suites::cheeger(&ctx, &mut report)?
        }
    }
    emit(&report, json!({"command": "bundle", "check": format!("{:?}", a.check).to_lowercase()}), &a.out)
}

fn cmd_run(a: &RunArgs) -> anyhow::Result<i32> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let (graph, family) = cfg.space()?;
    let instance = match &cfg.space {
        config::SpaceSource::Generate(k) => serde_json::to_string(k).expect("generator specs serialize"),
        config::SpaceSource::File(p) => p.display().to_string(),
    };
    let functions = config::functions(&graph, &cfg.functions, cfg.seed)?;
    // the pool draws from its own stream so adding functions does not move it
    let pool = config::functions(&graph, &cfg.pool, cfg.seed.wrapping_add(1))?;
    let ctx = Context {
        instance,
        graph,
        family,
        exponents: cfg.exponents.clone(),
        functions,
        pool,
        epsilons: cfg.epsilons.clone(),
        exact: cfg.exact,
        seed: cfg.seed,
    };
    let mut report = Report::default();
    suites::run_suites(&ctx, &cfg.suites, &mut report)?;
    let out = Output {
        report: a.report.clone().or(cfg.output.report.clone()),
        format: Some(Format::Json),
        csv: a.csv.clone().or(cfg.output.csv.clone()),
        svg: a.svg.clone().or(cfg.output.svg.clone()),
    };
    let mut order = cfg.suites.clone();
    order.sort();
    order.dedup();
    let header = json!({
        "command": "run",
        "config": serde_json::to_value(&cfg).expect("configs serialize"),
        "suites": order.iter().map(|s| s.name()).collect::<Vec<_>>(),
    });
    emit(&report, header, &out)
}

/// 2 for bad input, 3 for exhausted budgets, 1 otherwise.
fn error_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<InputError>().is_some() || cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<modgrad::Error>() {
            return match e {
                modgrad::Error::Parse { .. }
                | modgrad::Error::InvalidGraph(_)
                | modgrad::Error::InvalidCurve(_)
                | modgrad::Error::Domain(_)
                | modgrad::Error::Io(_) => 2,
                modgrad::Error::Budget(_) => 3,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // a second initialization only fails when a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Modulus(a) => cmd_modulus(a),
        Command::Gradient(a) => cmd_gradient(a),
        Command::Chart(a) => cmd_chart(a),
        Command::Bundle(a) => cmd_bundle(a),
        Command::Run(a) => cmd_run(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn error_codes() {
        let parse: anyhow::Error = modgrad::Error::Parse { path: "$".into(), msg: "x".into() }.into();
        assert_eq!(error_code(&parse.context("stage thm11")), 2);
        let budget: anyhow::Error = modgrad::Error::Budget("x".into()).into();
        assert_eq!(error_code(&budget), 3);
        assert_eq!(error_code(&input_error("bad")), 2);
        let solver: anyhow::Error = modgrad::Error::Solver("x".into()).into();
        assert_eq!(error_code(&solver), 1);
    }

    #[test]
    fn suite_names_match_serde() {
        use config::Suite;
        for s in [Suite::Modulus, Suite::Thm11, Suite::Atlas, Suite::Cheeger] {
            assert_eq!(serde_json::to_value(s).unwrap(), json!(s.name()));
        }
    }
}

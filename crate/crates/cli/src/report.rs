//! Check rows, summaries and the JSON / CSV / SVG renderings of a run.

use std::collections::BTreeMap;

use modgrad::mmspace::io::fmt_f64;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// A measured quantity with nothing to compare against.
    Info,
    /// The search budget ran out before a decision.
    Inconclusive,
}

impl Verdict {
    fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub suite: String,
    pub instance: String,
    pub location: String,
    pub quantity: String,
    pub expected: String,
    pub actual: String,
    pub tolerance: String,
    pub verdict: Verdict,
}

pub const CSV_HEADER: [&str; 8] = [
    "suite", "instance", "location", "quantity", "expected", "actual", "tolerance", "verdict",
];

/// Everything a command produced: check rows, per-suite detail documents and
/// SVG panels.
#[derive(Debug, Default)]
pub struct Report {
    pub rows: Vec<Row>,
    pub details: BTreeMap<String, Value>,
    pub panels: Vec<String>,
}

pub fn num(x: f64) -> String {
    fmt_f64(x)
}

/// Short form for instance names: `2`, `1.5`.
pub fn label(x: f64) -> String {
    format!("{x}")
}

impl Report {
    fn push(&mut self, suite: &str, instance: &str, location: &str, quantity: &str, expected: String, actual: String, tolerance: String, verdict: Verdict) {
        self.rows.push(Row {
            suite: suite.into(),
            instance: instance.into(),
            location: location.into(),
            quantity: quantity.into(),
            expected,
            actual,
            tolerance,
            verdict,
        });
    }

    /// Passes when `|actual − expected| ≤ tol`.
    pub fn close(&mut self, suite: &str, instance: &str, location: &str, quantity: &str, expected: f64, actual: f64, tol: f64) {
        let ok = (actual - expected).abs() <= tol;
        let v = if ok { Verdict::Pass } else { Verdict::Fail };
        self.push(suite, instance, location, quantity, num(expected), num(actual), num(tol), v);
    }

    /// Passes when `actual ≤ bound`.
    pub fn at_most(&mut self, suite: &str, instance: &str, location: &str, quantity: &str, bound: f64, actual: f64) {
        let v = if actual <= bound { Verdict::Pass } else { Verdict::Fail };
        self.push(suite, instance, location, quantity, format!("<= {}", num(bound)), num(actual), String::new(), v);
    }

    pub fn flag(&mut self, suite: &str, instance: &str, location: &str, quantity: &str, expected: &str, actual: &str, ok: bool) {
        let v = if ok { Verdict::Pass } else { Verdict::Fail };
        self.push(suite, instance, location, quantity, expected.into(), actual.into(), String::new(), v);
    }

    pub fn info(&mut self, suite: &str, instance: &str, location: &str, quantity: &str, actual: &str) {
        self.push(suite, instance, location, quantity, String::new(), actual.into(), String::new(), Verdict::Info);
    }

    pub fn inconclusive(&mut self, suite: &str, instance: &str, location: &str, quantity: &str, expected: &str, actual: &str) {
        self.push(suite, instance, location, quantity, expected.into(), actual.into(), String::new(), Verdict::Inconclusive);
    }

    pub fn detail(&mut self, key: impl Into<String>, v: Value) {
        self.details.insert(key.into(), v);
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.rows.iter().filter(|r| r.verdict == v).count()
    }

    /// 0 all pass, 1 any failure, 3 budget exhausted without failures.
    pub fn exit_code(&self) -> i32 {
        if self.count(Verdict::Fail) > 0 {
            1
        } else if self.count(Verdict::Inconclusive) > 0 {
            3
        } else {
            0
        }
    }

    pub fn to_json(&self, header: Value) -> Value {
        json!({
            "run": header,
            "summary": {
                "pass": self.count(Verdict::Pass),
                "fail": self.count(Verdict::Fail),
                "info": self.count(Verdict::Info),
                "inconclusive": self.count(Verdict::Inconclusive),
            },
            "suites": self.details,
            "checks": self.rows,
        })
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.suite.as_str(),
                &r.instance,
                &r.location,
                &r.quantity,
                &r.expected,
                &r.actual,
                &r.tolerance,
                r.verdict.as_str(),
            ])
            .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn to_svg(&self) -> String {
        crate::svg::document(&self.panels)
    }
}

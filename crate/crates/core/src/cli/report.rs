use std::fmt::Write as _;

use serde::Serialize;

use crate::grid::SampledDensity;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `"<="` or `"in"` (with `tolerance` as the lower and `upper` as the upper bound)
    pub comparison: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            comparison: "<=",
            upper: None,
            passed: value <= tolerance,
        }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: lo,
            comparison: "in",
            upper: Some(hi),
            passed: value >= lo && value <= hi,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub task: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub metrics: Vec<Metric>,
}

impl Report {
    pub fn new(task: &str) -> Self {
        Self { task: task.into(), passed: true, checks: Vec::new(), metrics: Vec::new() }
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push(Metric { name: name.into(), value });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// `t,x,u` rows (`t,x1,…,xn,u` in more dimensions), shortest round-trip floats.
pub fn snapshots_csv(snaps: &[(f64, SampledDensity)]) -> String {
    let n = snaps.first().map_or(1, |(_, d)| d.dim());
    let mut out = String::from("t");
    if n == 1 {
        out.push_str(",x");
    } else {
        for d in 1..=n {
            let _ = write!(out, ",x{d}");
        }
    }
    out.push_str(",u\n");
    for (t, d) in snaps {
        for i in 0..d.len() {
            let _ = write!(out, "{t}");
            for x in d.point(i).iter() {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{}", d.values()[i]);
        }
    }
    out
}

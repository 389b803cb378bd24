use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{FpkError, Result};
use crate::grid::SampledDensity;
use crate::linalg::mat_from_row_major;
use crate::model::ModelParams;
use crate::packet::{GaussianMixture, GaussianPacket};
use crate::symmetry::InitialOperator;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelBlock,
    pub initial: InitialBlock,
    pub time: TimeBlock,
    pub grid: GridBlock,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub n: usize,
    /// row-major n×n
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub k3: Vec<f64>,
    pub epsilon: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialBlock {
    Mixture(MixtureBlock),
    /// CSV file with header `x,u` (1D only).
    Sampled { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureBlock {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// one row-major n×n matrix per component
    pub b0: Vec<Vec<f64>>,
    pub c0: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    pub s: f64,
    pub t: f64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Evolve,
    Inverse,
    Symmetry,
    Verify,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryBlock {
    pub operator: OperatorSpec,
    /// First moment of `â·γ`, required when it has zero mass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_gamma_a: Option<Vec<f64>>,
    /// Seed direction for `linsym` in more than one dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Named(NamedOperator),
    Explicit(ExplicitOperator),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedOperator {
    Linsym,
    Identity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitOperator {
    pub a0: f64,
    pub a_lin: Vec<f64>,
    pub a_grad: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_snapshots")]
    pub snapshots: String,
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default = "default_meta")]
    pub meta: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_snapshots() -> String {
    "snapshots.csv".into()
}
fn default_report() -> String {
    "report.json".into()
}
fn default_meta() -> String {
    "run_meta.json".into()
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: default_dir(), snapshots: default_snapshots(), report: default_report(), meta: default_meta() }
    }
}

/// Validated inputs ready for computation.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub params: ModelParams,
    pub initial: Initial,
    pub snapshots: Vec<f64>,
    pub operator: Option<InitialOperator>,
    pub x_gamma_a: Option<DVector<f64>>,
}

#[derive(Debug, Clone)]
pub enum Initial {
    Mixture(GaussianMixture),
    Sampled(SampledDensity),
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| FpkError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FpkError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks everything that does not need numerics. `base` resolves
    /// relative input paths.
    pub fn prepare(&self, base: &Path) -> Result<Prepared> {
        let m = &self.model;
        let n = m.n;
        if n == 0 || n > 3 {
            return Err(FpkError::Config(format!("model.n must be 1, 2 or 3, got {n}")));
        }
        for (name, v) in [("k1", &m.k1), ("k2", &m.k2), ("k3", &m.k3)] {
            if v.len() != n * n {
                return Err(FpkError::Config(format!("model.{name} needs {} entries, got {}", n * n, v.len())));
            }
        }
        let params = ModelParams::new(
            mat_from_row_major(n, &m.k1),
            mat_from_row_major(n, &m.k2),
            mat_from_row_major(n, &m.k3),
            m.epsilon,
            m.kappa,
        )
        .map_err(as_config)?;

        let g = &self.grid;
        if g.nx < 3 || !(g.x_max > g.x_min) || !(g.dt > 0.0) {
            return Err(FpkError::Config("grid needs x_max > x_min, nx >= 3 and dt > 0".into()));
        }
        let tm = &self.time;
        if !tm.s.is_finite() || !tm.t.is_finite() || tm.snapshots.iter().any(|v| !v.is_finite()) {
            return Err(FpkError::Config("times must be finite".into()));
        }
        let snapshots = if tm.snapshots.is_empty() { vec![tm.t] } else { tm.snapshots.clone() };

        let initial = match &self.initial {
            InitialBlock::Mixture(mb) => Initial::Mixture(mixture(mb, n)?),
            InitialBlock::Sampled { path } => {
                if n != 1 {
                    return Err(FpkError::Config("sampled input files are one-dimensional".into()));
                }
                Initial::Sampled(read_samples(&base.join(path))?)
            }
        };

        let (operator, x_gamma_a) = match &self.symmetry {
            None => (None, None),
            Some(sb) => {
                let op = match &sb.operator {
                    OperatorSpec::Named(NamedOperator::Identity) => InitialOperator::identity(n),
                    OperatorSpec::Named(NamedOperator::Linsym) => {
                        let x_gamma = match &initial {
                            Initial::Mixture(g) => g.mean().map_err(as_config)?,
                            Initial::Sampled(d) => crate::grid::grid_first_moment(d, true).map_err(as_config)?,
                        };
                        let d = match &sb.direction {
                            Some(d) => vector(d, n, "symmetry.direction")?,
                            None if n == 1 => DVector::from_element(1, 1.0),
                            None => return Err(FpkError::Config("symmetry.direction is required for linsym when n > 1".into())),
                        };
                        InitialOperator::new(-d.dot(&x_gamma), d.clone(), d).map_err(as_config)?
                    }
                    OperatorSpec::Explicit(e) => InitialOperator::new(
                        e.a0,
                        vector(&e.a_lin, n, "symmetry.operator.a_lin")?,
                        vector(&e.a_grad, n, "symmetry.operator.a_grad")?,
                    )
                    .map_err(as_config)?,
                };
                let xga = sb.x_gamma_a.as_ref().map(|v| vector(v, n, "symmetry.x_gamma_a")).transpose()?;
                (Some(op), xga)
            }
        };
        if self.task == Task::Symmetry && operator.is_none() {
            return Err(FpkError::Config("task symmetry needs a symmetry block".into()));
        }
        Ok(Prepared { params, initial, snapshots, operator, x_gamma_a })
    }
}

fn as_config(e: FpkError) -> FpkError {
    match e {
        FpkError::Config(_) => e,
        other => FpkError::Config(other.to_string()),
    }
}

fn vector(v: &[f64], n: usize, what: &str) -> Result<DVector<f64>> {
    if v.len() != n {
        return Err(FpkError::Config(format!("{what} needs {n} entries, got {}", v.len())));
    }
    Ok(DVector::from_column_slice(v))
}

fn mixture(mb: &MixtureBlock, n: usize) -> Result<GaussianMixture> {
    let k = mb.weights.len();
    if k == 0 || mb.means.len() != k || mb.b0.len() != k || mb.c0.len() != k {
        return Err(FpkError::Config("mixture weights, means, b0 and c0 must have the same nonzero length".into()));
    }
    let mut comps = Vec::with_capacity(k);
    for i in 0..k {
        let mean = vector(&mb.means[i], n, "initial.mixture.means[i]")?;
        if mb.b0[i].len() != n * n || mb.c0[i].len() != n * n {
            return Err(FpkError::Config(format!("component {i}: b0 and c0 need {} entries", n * n)));
        }
        let p = GaussianPacket::new(
            mean,
            mat_from_row_major(n, &mb.b0[i]),
            mat_from_row_major(n, &mb.c0[i]),
            mb.weights[i],
        )
        .map_err(as_config)?;
        p.q().map_err(as_config)?;
        comps.push(p);
    }
    GaussianMixture::new(comps).map_err(as_config)
}

/// Reads `x,u` rows on a uniform grid.
pub fn read_samples(path: &Path) -> Result<SampledDensity> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FpkError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with(|c: char| c.is_ascii_alphabetic())) {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (Some(x), Some(u), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(FpkError::Config(format!("{}:{}: expected two columns", path.display(), lineno + 1)));
        };
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| FpkError::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))
        };
        xs.push(parse(x)?);
        us.push(parse(u)?);
    }
    if xs.len() < 3 {
        return Err(FpkError::Config("sampled input needs at least three rows".into()));
    }
    let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if !(dx > 0.0) || xs.iter().enumerate().any(|(i, x)| (x - (xs[0] + dx * i as f64)).abs() > 1e-9 * dx.max(1.0)) {
        return Err(FpkError::Config("sampled input must be on an increasing uniform grid".into()));
    }
    SampledDensity::new_1d(xs[0], dx, us).map_err(as_config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "model": {"n": 1, "k1": [1.0], "k2": [0.0], "k3": [-0.5], "epsilon": 0.1, "kappa": 1.0},
        "initial": {"mixture": {"weights": [1.0], "means": [[0.5]], "b0": [[1.0]], "c0": [[1.0]]}},
        "time": {"s": 0.0, "t": 1.0},
        "grid": {"x_min": -6.0, "x_max": 6.0, "nx": 121, "dt": 1e-3},
        "task": "evolve"
    }"#;

    #[test]
    fn parses_minimal() {
        let c = RunConfig::parse(BASE).unwrap();
        let p = c.prepare(Path::new(".")).unwrap();
        assert_eq!(p.snapshots, vec![1.0]);
        assert!(matches!(p.initial, Initial::Mixture(_)));
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = BASE.replace("\"task\"", "\"colour\": 1, \"task\"");
        assert!(matches!(RunConfig::parse(&text), Err(FpkError::Config(_))));
    }

    #[test]
    fn rejects_bad_shapes() {
        let c = RunConfig::parse(&BASE.replace("\"k2\": [0.0]", "\"k2\": [0.0, 1.0]")).unwrap();
        assert!(matches!(c.prepare(Path::new(".")), Err(FpkError::Config(_))));
    }

    #[test]
    fn linsym_at_initial_time() {
        let text = BASE.replace("\"task\": \"evolve\"", "\"task\": \"symmetry\", \"symmetry\": {\"operator\": \"linsym\"}");
        let p = RunConfig::parse(&text).unwrap().prepare(Path::new(".")).unwrap();
        let op = p.operator.unwrap();
        assert_eq!((op.a0, op.a_lin[0], op.a_grad[0]), (-0.5, 1.0, 1.0));
    }
}

//! Method-of-lines finite-volume solver for the 1D nonlinear equation.
//!
//! The moment in the drift is taken from the grid at every Runge–Kutta
//! stage, so this solver does not rely on the moment equation at all.

use crate::error::{FpkError, Result};
use crate::grid::{grid_first_moment, total_mass, SampledDensity};
use crate::model::ModelParams;

pub const CFL_LIMIT: f64 = 0.25;
pub const MASS_DRIFT_FLAG: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    ZeroFlux,
    ZeroValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FDConfig {
    x_min: f64,
    x_max: f64,
    nx: usize,
    dt: f64,
    t_end: f64,
    boundary: Boundary,
    snapshots: Vec<f64>,
}

impl FDConfig {
    /// Checks the grid and `ε·dt/dx² ≤ 0.25`. Snapshot at `t_end` only.
    pub fn new(params: &ModelParams, x_min: f64, x_max: f64, nx: usize, dt: f64, t_end: f64) -> Result<Self> {
        if params.dim() != 1 {
            return Err(FpkError::Config("the finite-difference solver is one-dimensional".into()));
        }
        if nx < 3 || !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(FpkError::Config(format!("bad grid [{x_min}, {x_max}] with {nx} nodes")));
        }
        if !(dt > 0.0) || !dt.is_finite() || !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(FpkError::Config(format!("bad time stepping dt={dt}, t_end={t_end}")));
        }
        let dx = (x_max - x_min) / (nx - 1) as f64;
        let cfl = params.epsilon() * dt / (dx * dx);
        if cfl > CFL_LIMIT {
            return Err(FpkError::Config(format!(
                "stability bound violated: eps*dt/dx^2 = {cfl:.4} > {CFL_LIMIT}"
            )));
        }
        Ok(Self { x_min, x_max, nx, dt, t_end, boundary: Boundary::ZeroFlux, snapshots: vec![t_end] })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// Times (inside `[0, t_end]`, relative to the start) at which to record the solution.
    pub fn with_snapshots(mut self, times: Vec<f64>) -> Result<Self> {
        if times.iter().any(|t| !(*t >= 0.0 && *t <= self.t_end)) {
            return Err(FpkError::Config("snapshot times must lie in [0, t_end]".into()));
        }
        self.snapshots = times;
        Ok(self)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Empty density on the solver grid.
    pub fn grid(&self) -> Result<SampledDensity> {
        SampledDensity::new_1d(self.x_min, self.dx(), vec![0.0; self.nx])
    }
}

#[derive(Debug, Clone)]
pub struct FdSolution {
    /// `(t, u)` at each requested snapshot time.
    pub snapshots: Vec<(f64, SampledDensity)>,
    /// `(t, X_grid(t))` after every step, starting at `t = 0`.
    pub moments: Vec<(f64, f64)>,
    pub mass_drift: f64,
    pub mass_flagged: bool,
}

struct Operator {
    eps: f64,
    lambda: f64,
    coupling: f64,
    x0: f64,
    dx: f64,
    boundary: Boundary,
}

impl Operator {
    fn moment(&self, u: &[f64]) -> f64 {
        let n = u.len();
        let (mut m0, mut m1) = (0.0, 0.0);
        for (i, v) in u.iter().enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            m0 += w * v;
            m1 += w * v * (self.x0 + self.dx * i as f64);
        }
        m1 / m0
    }

    fn rhs(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        let shift = self.coupling * self.moment(u);
        let flux = |i: usize| {
            let xf = self.x0 + self.dx * (i as f64 + 0.5);
            let a = self.lambda * xf + shift;
            self.eps * (u[i + 1] - u[i]) / self.dx + a * 0.5 * (u[i] + u[i + 1])
        };
        let mut left = flux(0);
        match self.boundary {
            Boundary::ZeroFlux => out[0] = left / (0.5 * self.dx),
            Boundary::ZeroValue => out[0] = 0.0,
        }
        for (i, o) in out.iter_mut().enumerate().take(n - 1).skip(1) {
            let right = flux(i);
            *o = (right - left) / self.dx;
            left = right;
        }
        match self.boundary {
            Boundary::ZeroFlux => out[n - 1] = -left / (0.5 * self.dx),
            Boundary::ZeroValue => out[n - 1] = 0.0,
        }
    }
}

/// Integrates from `gamma` over `[0, t_end]` (times relative to the start).
pub fn fd_solve(params: &ModelParams, gamma: &SampledDensity, cfg: &FDConfig) -> Result<FdSolution> {
    let grid = cfg.grid()?;
    let compatible = gamma.dim() == 1
        && gamma.shape() == grid.shape()
        && (gamma.origin()[0] - grid.origin()[0]).abs() <= 1e-12 * (1.0 + grid.origin()[0].abs())
        && (gamma.spacing()[0] - grid.spacing()[0]).abs() <= 1e-12 * grid.spacing()[0];
    if !compatible {
        return Err(FpkError::Input("initial density does not live on the solver grid".into()));
    }
    let op = Operator {
        eps: params.epsilon(),
        lambda: params.lambda()[(0, 0)],
        coupling: params.moment_coupling()[(0, 0)],
        x0: cfg.x_min,
        dx: cfg.dx(),
        boundary: cfg.boundary,
    };

    let mut u = gamma.values().to_vec();
    if cfg.boundary == Boundary::ZeroValue {
        let n = u.len();
        u[0] = 0.0;
        u[n - 1] = 0.0;
    }
    let steps = if cfg.t_end == 0.0 { 0 } else { (cfg.t_end / cfg.dt - 1e-9).ceil() as usize };
    let h = if steps == 0 { 0.0 } else { cfg.t_end / steps as f64 };
    let snap_steps: Vec<usize> = cfg
        .snapshots
        .iter()
        .map(|t| if h == 0.0 { 0 } else { (t / h).round() as usize })
        .collect();

    let mass0 = total_mass(gamma)?;
    let mut mass_drift = 0.0f64;
    let mut moments = vec![(0.0, grid_first_moment(gamma, true)?[0])];
    let n = u.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut slots: Vec<Option<(f64, SampledDensity)>> = vec![None; snap_steps.len()];
    let take = |k: usize, u: &[f64], slots: &mut [Option<(f64, SampledDensity)>]| -> Result<()> {
        for (j, _) in snap_steps.iter().enumerate().filter(|(_, s)| **s == k) {
            slots[j] = Some((h * k as f64, grid.with_values(u.to_vec())?));
        }
        Ok(())
    };
    take(0, &u, &mut slots)?;
    for k in 1..=steps {
        op.rhs(&u, &mut k1);
        axpy(&u, 0.5 * h, &k1, &mut tmp);
        op.rhs(&tmp, &mut k2);
        axpy(&u, 0.5 * h, &k2, &mut tmp);
        op.rhs(&tmp, &mut k3);
        axpy(&u, h, &k3, &mut tmp);
        op.rhs(&tmp, &mut k4);
        for i in 0..n {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(FpkError::Input(format!("solution became non-finite at step {k}")));
        }
        let mass = trapezoid(&u, op.dx);
        mass_drift = mass_drift.max((mass - mass0).abs());
        moments.push((h * k as f64, op.moment(&u)));
        take(k, &u, &mut slots)?;
    }
    let snapshots = slots.into_iter().flatten().collect();
    Ok(FdSolution { snapshots, moments, mass_drift, mass_flagged: mass_drift > MASS_DRIFT_FLAG })
}

fn axpy(y: &[f64], a: f64, x: &[f64], out: &mut [f64]) {
    for i in 0..y.len() {
        out[i] = y[i] + a * x[i];
    }
}

fn trapezoid(u: &[f64], dx: f64) -> f64 {
    let n = u.len();
    dx * (u.iter().sum::<f64>() - 0.5 * (u[0] + u[n - 1]))
}

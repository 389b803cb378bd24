//! Model parameters and the first-moment trajectory.
//!
//! The equation is
//!
//! ```text
//! ∂ₜu = εΔu + ∂ₓ·((K1 x + κ ∫ (K2 x + K3 y) u(y) dy) u)
//! ```
//!
//! which, for unit mass, is `∂ₜu = εΔu + ∂ₓ·((Λx + κK3 X_u(t)) u)` with
//! `Λ = K1 + κK2` and `X_u` the first moment of `u`.

use nalgebra::{DMatrix, DVector};

use crate::error::{FpkError, Result};
use crate::linalg::expm;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    k1: DMatrix<f64>,
    k2: DMatrix<f64>,
    k3: DMatrix<f64>,
    epsilon: f64,
    kappa: f64,
}

impl ModelParams {
    pub fn new(
        k1: DMatrix<f64>,
        k2: DMatrix<f64>,
        k3: DMatrix<f64>,
        epsilon: f64,
        kappa: f64,
    ) -> Result<Self> {
        let n = k1.nrows();
        if n == 0 {
            return Err(FpkError::Config("dimension must be at least 1".into()));
        }
        for (name, m) in [("K1", &k1), ("K2", &k2), ("K3", &k3)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(FpkError::Config(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(FpkError::Config(format!("{name} has non-finite entries")));
            }
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(FpkError::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        if !kappa.is_finite() {
            return Err(FpkError::Config("kappa must be finite".into()));
        }
        Ok(Self { k1, k2, k3, epsilon, kappa })
    }

    /// One-dimensional model with scalar coefficients.
    pub fn scalar(k1: f64, k2: f64, k3: f64, epsilon: f64, kappa: f64) -> Result<Self> {
        let m = |v: f64| DMatrix::from_element(1, 1, v);
        Self::new(m(k1), m(k2), m(k3), epsilon, kappa)
    }

    pub fn dim(&self) -> usize {
        self.k1.nrows()
    }

    pub fn k1(&self) -> &DMatrix<f64> {
        &self.k1
    }

    pub fn k2(&self) -> &DMatrix<f64> {
        &self.k2
    }

    pub fn k3(&self) -> &DMatrix<f64> {
        &self.k3
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Same model with a different nonlinearity strength.
    pub fn with_kappa(&self, kappa: f64) -> Self {
        Self { kappa, ..self.clone() }
    }

    /// `Λ = K1 + κK2`, always recomputed from the stored coefficients.
    pub fn lambda(&self) -> DMatrix<f64> {
        &self.k1 + &self.k2 * self.kappa
    }

    /// `κK3`, the coefficient of the first moment in the drift.
    pub fn moment_coupling(&self) -> DMatrix<f64> {
        &self.k3 * self.kappa
    }

    /// Rate matrix of the first-moment equation, `−(Λ + κK3)`.
    pub fn moment_rate(&self) -> DMatrix<f64> {
        -(self.lambda() + self.moment_coupling())
    }

    /// Drift vector `Λx + κK3 X` at a point.
    pub fn drift(&self, x: &DVector<f64>, moment: &DVector<f64>) -> DVector<f64> {
        self.lambda() * x + self.moment_coupling() * moment
    }
}

pub fn effective_drift(params: &ModelParams) -> DMatrix<f64> {
    params.lambda()
}

/// Closed-form solution of `Ẋ = rate·X`, `X(s) = X_start`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTrajectory {
    s: f64,
    x_start: DVector<f64>,
    rate: DMatrix<f64>,
}

impl MomentTrajectory {
    pub fn new(params: &ModelParams, s: f64, x_start: DVector<f64>) -> Result<Self> {
        Self::with_rate(params.moment_rate(), s, x_start)
    }

    /// Trajectory with an arbitrary constant rate, e.g. `−Λ` for the
    /// centre of a linear-equation solution.
    pub fn with_rate(rate: DMatrix<f64>, s: f64, x_start: DVector<f64>) -> Result<Self> {
        if rate.nrows() != x_start.len() || rate.ncols() != x_start.len() {
            return Err(FpkError::Input(format!(
                "moment of length {} does not match a {}x{} rate",
                x_start.len(),
                rate.nrows(),
                rate.ncols()
            )));
        }
        if x_start.iter().any(|v| !v.is_finite()) {
            return Err(FpkError::Input("initial moment is not finite".into()));
        }
        Ok(Self { s, x_start, rate })
    }

    /// Re-anchors so that the trajectory passes through `x_at` at time `at`.
    pub fn through(params: &ModelParams, s: f64, at: f64, x_at: DVector<f64>) -> Result<Self> {
        let back = expm(&(params.moment_rate() * (s - at))) * &x_at;
        Self::new(params, s, back)
    }

    pub fn start_time(&self) -> f64 {
        self.s
    }

    pub fn x_start(&self) -> &DVector<f64> {
        &self.x_start
    }

    pub fn rate(&self) -> &DMatrix<f64> {
        &self.rate
    }

    pub fn at(&self, t: f64) -> DVector<f64> {
        if t == self.s {
            return self.x_start.clone();
        }
        expm(&(&self.rate * (t - self.s))) * &self.x_start
    }
}

pub fn moment_at(traj: &MomentTrajectory, t: f64) -> DVector<f64> {
    traj.at(t)
}

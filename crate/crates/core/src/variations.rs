//! The matrix system in variations and its evolution matrix.
//!
//! `Ḃ = ΛᵀB`, `Ċ = 2B − ΛC`. The evolution matrix of this system is
//! block lower-triangular,
//!
//! ```text
//! M(t,s) = [[M1, 0], [M2, M3]] = exp((t − s)·[[Λᵀ, 0], [2I, −Λ]])
//! ```
//!
//! and `Q = B C⁻¹` solves the Riccati equation `Q̇ + 2Q² − ΛᵀQ − QΛ = 0`.

use nalgebra::DMatrix;

use crate::error::{FpkError, Result};
use crate::linalg::{asymmetry, expm, is_positive_definite, rcond, symmetrize};
use crate::model::ModelParams;

/// Reciprocal condition number below which `C(t)` counts as singular.
pub const FOCAL_RCOND: f64 = 1e-12;
/// Relative asymmetry tolerated in user-supplied `B0`.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Matriciant {
    pub t: f64,
    pub s: f64,
    pub m1: DMatrix<f64>,
    pub m2: DMatrix<f64>,
    pub m3: DMatrix<f64>,
}

/// The `2n × 2n` generator `[[Λᵀ, 0], [2I, −Λ]]`.
pub fn block_generator(params: &ModelParams) -> DMatrix<f64> {
    let n = params.dim();
    let lambda = params.lambda();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (n, n)).copy_from(&lambda.transpose());
    a.view_mut((n, 0), (n, n)).copy_from(&(DMatrix::identity(n, n) * 2.0));
    a.view_mut((n, n), (n, n)).copy_from(&(-lambda));
    a
}

impl Matriciant {
    pub fn identity(n: usize, s: f64) -> Self {
        Self {
            t: s,
            s,
            m1: DMatrix::identity(n, n),
            m2: DMatrix::zeros(n, n),
            m3: DMatrix::identity(n, n),
        }
    }

    fn from_full(full: &DMatrix<f64>, n: usize, t: f64, s: f64) -> Self {
        Self {
            t,
            s,
            m1: full.view((0, 0), (n, n)).into_owned(),
            m2: full.view((n, 0), (n, n)).into_owned(),
            m3: full.view((n, n), (n, n)).into_owned(),
        }
    }

    pub fn dim(&self) -> usize {
        self.m1.nrows()
    }

    pub fn full(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.m1);
        m.view_mut((n, 0), (n, n)).copy_from(&self.m2);
        m.view_mut((n, n), (n, n)).copy_from(&self.m3);
        m
    }

    /// `M(t, r)·M(r, τ) = M(t, τ)` where `self = M(t, r)`, `earlier = M(r, τ)`.
    pub fn compose(&self, earlier: &Matriciant) -> Matriciant {
        Matriciant {
            t: self.t,
            s: earlier.s,
            m1: &self.m1 * &earlier.m1,
            m2: &self.m2 * &earlier.m1 + &self.m3 * &earlier.m2,
            m3: &self.m3 * &earlier.m3,
        }
    }

    /// Largest entrywise gap between the blocks of two evolution matrices.
    pub fn max_block_diff(&self, other: &Matriciant) -> f64 {
        [(&self.m1, &other.m1), (&self.m2, &other.m2), (&self.m3, &other.m3)]
            .iter()
            .map(|(a, b)| (*a - *b).amax())
            .fold(0.0, f64::max)
    }

    /// `M2·M1⁻¹`, symmetric and positive-definite for `t > s`.
    pub fn spread(&self) -> Result<DMatrix<f64>> {
        let inv = self
            .m1
            .clone()
            .try_inverse()
            .ok_or_else(|| FpkError::KernelValidity("M1 is singular".into()))?;
        Ok(symmetrize(&(&self.m2 * inv)))
    }
}

/// Evolution matrix from one `2n × 2n` exponential.
pub fn matriciant(params: &ModelParams, t: f64, s: f64) -> Matriciant {
    let n = params.dim();
    if t == s {
        return Matriciant::identity(n, s);
    }
    let full = expm(&(block_generator(params) * (t - s)));
    Matriciant::from_full(&full, n, t, s)
}

/// Independent route for the diagonal blocks: `M1 = exp(Λᵀτ)`, `M3 = exp(−Λτ)`.
pub fn diagonal_blocks(params: &ModelParams, t: f64, s: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let lambda = params.lambda();
    let tau = t - s;
    (expm(&(lambda.transpose() * tau)), expm(&(-lambda * tau)))
}

/// Fixed-step classical RK4 on `Ṁ = AM`, `M(s) = I`. Kept as an oracle for
/// the exponential route; never used for production results.
pub fn matriciant_rk4(params: &ModelParams, t: f64, s: f64, steps: usize) -> Matriciant {
    let n = params.dim();
    let a = block_generator(params);
    let steps = steps.max(1);
    let h = (t - s) / steps as f64;
    let mut m = DMatrix::identity(2 * n, 2 * n);
    for _ in 0..steps {
        let k1 = &a * &m;
        let k2 = &a * (&m + &k1 * (0.5 * h));
        let k3 = &a * (&m + &k2 * (0.5 * h));
        let k4 = &a * (&m + &k3 * h);
        m += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Matriciant::from_full(&m, n, t, s)
}

/// Pair `(B, C)` of the system in variations.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationState {
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl VariationState {
    /// Validates initial data: `B0` symmetric and `B0ᵀC0` symmetric, the
    /// latter being the condition for `B C⁻¹` to stay symmetric.
    pub fn initial(b0: DMatrix<f64>, c0: DMatrix<f64>) -> Result<Self> {
        let n = b0.nrows();
        if b0.ncols() != n || c0.nrows() != n || c0.ncols() != n {
            return Err(FpkError::Input("B0 and C0 must be square and of equal size".into()));
        }
        if b0.iter().chain(c0.iter()).any(|v| !v.is_finite()) {
            return Err(FpkError::Input("B0 or C0 has non-finite entries".into()));
        }
        if asymmetry(&b0) > SYMMETRY_TOL {
            return Err(FpkError::Input(format!("B0 is not symmetric (asymmetry {:.3e})", asymmetry(&b0))));
        }
        let btc = b0.transpose() * &c0;
        if asymmetry(&btc) > 1e-10 {
            return Err(FpkError::Input(format!(
                "B0·C0⁻¹ is not symmetric (asymmetry of B0ᵀC0 is {:.3e})",
                asymmetry(&btc)
            )));
        }
        Ok(Self { b: b0, c: c0 })
    }

    /// `B(t) = M1 B0`, `C(t) = M2 B0 + M3 C0`.
    pub fn advance(&self, m: &Matriciant) -> Self {
        Self {
            b: &m.m1 * &self.b,
            c: &m.m2 * &self.b + &m.m3 * &self.c,
        }
    }

    /// `Q = B C⁻¹`, symmetrised. Fails at focal points; with
    /// `density_valid` also fails unless `Q` is positive-definite.
    pub fn q(&self, density_valid: bool) -> Result<DMatrix<f64>> {
        let rc = rcond(&self.c);
        if rc < FOCAL_RCOND {
            return Err(FpkError::FocalPoint { rcond: rc });
        }
        let c_inv = self.c.clone().try_inverse().ok_or(FpkError::FocalPoint { rcond: 0.0 })?;
        let q = symmetrize(&(&self.b * c_inv));
        if density_valid && !is_positive_definite(&q) {
            return Err(FpkError::InvalidCovariance("Q = B·C⁻¹ is not positive-definite".into()));
        }
        Ok(q)
    }
}

pub fn riccati_q(m: &Matriciant, b0: &DMatrix<f64>, c0: &DMatrix<f64>, density_valid: bool) -> Result<DMatrix<f64>> {
    VariationState::initial(b0.clone(), c0.clone())?.advance(m).q(density_valid)
}

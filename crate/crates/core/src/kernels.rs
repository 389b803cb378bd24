//! Green's functions of the linear equation and the kernels of the nonlinear
//! evolution operator and its left inverse.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{FpkError, Result};
use crate::linalg::{is_positive_definite, symmetrize};
use crate::model::ModelParams;
use crate::variations::{matriciant, Matriciant};

/// `|t − s|` below which kernels are treated as the delta function.
pub const DELTA_GUARD: f64 = 1e-9;

/// Gaussian kernel `pref·exp(−(x − T y)ᵀ S (x − T y) / 2ε)` assembled from
/// one evolution matrix.
#[derive(Debug, Clone)]
pub struct KernelForm {
    /// `M3`
    pub translate: DMatrix<f64>,
    /// `M1 M2⁻¹`, symmetrised
    pub exponent: DMatrix<f64>,
    /// `det(M2 M1⁻¹)`
    pub det_spread: f64,
    pub epsilon: f64,
}

impl KernelForm {
    fn build(m: &Matriciant, epsilon: f64) -> Result<Self> {
        let gap = (m.t - m.s).abs();
        if gap < DELTA_GUARD {
            return Err(FpkError::DeltaLimit { gap });
        }
        let m2_inv = m
            .m2
            .clone()
            .try_inverse()
            .ok_or_else(|| FpkError::KernelValidity("M2 is singular".into()))?;
        let exponent = symmetrize(&(&m.m1 * m2_inv));
        let det_spread = m.spread()?.determinant();
        Ok(Self { translate: m.m3.clone(), exponent, det_spread, epsilon })
    }

    /// Real prefactor `((2πε)ⁿ det(M2 M1⁻¹))^{−1/2}`, if it exists.
    pub fn real_prefactor(&self) -> Option<f64> {
        let n = self.translate.nrows() as i32;
        let d = (2.0 * PI * self.epsilon).powi(n) * self.det_spread;
        (d > 0.0).then(|| 1.0 / d.sqrt())
    }

    /// Principal-branch prefactor, imaginary when `det(M2 M1⁻¹) < 0`.
    pub fn complex_prefactor(&self) -> Complex<f64> {
        let n = self.translate.nrows() as i32;
        let d = (2.0 * PI * self.epsilon).powi(n) * self.det_spread;
        Complex::new(d, 0.0).sqrt().inv()
    }

    pub fn exponent_at(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let r = x - &self.translate * y;
        -0.5 * r.dot(&(&self.exponent * &r)) / self.epsilon
    }
}

/// Inputs shared by the pointwise kernels for one `(t, s)` pair.
#[derive(Debug, Clone)]
pub struct KernelContext {
    pub params: ModelParams,
    pub m_fwd: Matriciant,
    pub m_bwd: Matriciant,
    pub x_u_t: DVector<f64>,
    pub x_gamma: DVector<f64>,
    fwd: std::result::Result<KernelForm, FpkError>,
    bwd: std::result::Result<KernelForm, FpkError>,
}

impl KernelContext {
    pub fn new(params: &ModelParams, t: f64, s: f64, x_u_t: DVector<f64>, x_gamma: DVector<f64>) -> Result<Self> {
        let n = params.dim();
        if x_u_t.len() != n || x_gamma.len() != n {
            return Err(FpkError::Input("kernel shifts do not match the model dimension".into()));
        }
        let m_fwd = matriciant(params, t, s);
        let m_bwd = matriciant(params, s, t);
        let roundtrip = m_fwd.compose(&m_bwd);
        let scale = m_fwd.full().amax().max(m_bwd.full().amax()).max(1.0);
        let err = roundtrip.max_block_diff(&Matriciant::identity(n, t));
        if err > 1e-10 * scale * scale {
            return Err(FpkError::KernelValidity(format!(
                "forward and backward evolution matrices disagree by {err:.3e}"
            )));
        }
        let eps = params.epsilon();
        let fwd = KernelForm::build(&m_fwd, eps);
        let bwd = KernelForm::build(&m_bwd, eps);
        Ok(Self { params: params.clone(), m_fwd, m_bwd, x_u_t, x_gamma, fwd, bwd })
    }

    pub fn t(&self) -> f64 {
        self.m_fwd.t
    }

    pub fn s(&self) -> f64 {
        self.m_fwd.s
    }

    pub fn forward_form(&self) -> Result<&KernelForm> {
        self.fwd.as_ref().map_err(Clone::clone)
    }

    pub fn inverse_form(&self) -> Result<&KernelForm> {
        self.bwd.as_ref().map_err(Clone::clone)
    }

    /// Forward kernel form, additionally requiring a decaying Gaussian.
    pub fn density_form(&self) -> Result<(&KernelForm, f64)> {
        let form = self.forward_form()?;
        if !is_positive_definite(&form.exponent) {
            return Err(FpkError::KernelValidity("M1·M2⁻¹ is not positive-definite".into()));
        }
        let pref = form
            .real_prefactor()
            .ok_or_else(|| FpkError::KernelValidity("det(M2·M1⁻¹) is not positive".into()))?;
        Ok((form, pref))
    }
}

pub fn green_lin(ctx: &KernelContext, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    let (form, pref) = ctx.density_form()?;
    Ok(pref * form.exponent_at(x, y).exp())
}

pub fn green_nl(ctx: &KernelContext, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    green_lin(ctx, &(x - &ctx.x_u_t), &(y - &ctx.x_gamma))
}

/// Left-inverse kernel evaluated as written: forward form with `t` and `s`
/// exchanged and shifts `(x − X_γ, y − X_u(t))`. For `t > s` the prefactor
/// is imaginary in odd dimensions and the exponent grows.
pub fn green_nl_inv(ctx: &KernelContext, x: &DVector<f64>, y: &DVector<f64>) -> Result<Complex<f64>> {
    let form = ctx.inverse_form()?;
    let e = form.exponent_at(&(x - &ctx.x_gamma), &(y - &ctx.x_u_t));
    Ok(form.complex_prefactor() * e.exp())
}

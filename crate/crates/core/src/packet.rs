//! Gaussian wave packets and mixtures: the closed-form solution class.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{FpkError, Result};
use crate::linalg::symmetrize;
use crate::model::{ModelParams, MomentTrajectory};
use crate::variations::{matriciant, VariationState};

/// `weight·√(det Q / (2πε)ⁿ)·exp(−(x − mean)ᵀQ(x − mean) / 2ε)` with `Q = B C⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPacket {
    pub mean: DVector<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub weight: f64,
}

impl GaussianPacket {
    pub fn new(mean: DVector<f64>, b: DMatrix<f64>, c: DMatrix<f64>, weight: f64) -> Result<Self> {
        if mean.len() != b.nrows() {
            return Err(FpkError::Input(format!(
                "mean has length {} but B is {}x{}",
                mean.len(),
                b.nrows(),
                b.ncols()
            )));
        }
        if !weight.is_finite() || mean.iter().any(|v| !v.is_finite()) {
            return Err(FpkError::Input("packet mean and weight must be finite".into()));
        }
        let state = VariationState::initial(b, c)?;
        Ok(Self { mean, b: state.b, c: state.c, weight })
    }

    /// 1D packet with scalar `B0`, `C0`.
    pub fn scalar(mean: f64, b0: f64, c0: f64, weight: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(1, mean),
            DMatrix::from_element(1, 1, b0),
            DMatrix::from_element(1, 1, c0),
            weight,
        )
    }

    /// Packet with covariance `Σ`: `B = I`, `C = Σ/ε`.
    pub fn from_covariance(mean: DVector<f64>, cov: &DMatrix<f64>, epsilon: f64, weight: f64) -> Result<Self> {
        let n = mean.len();
        Self::new(mean, DMatrix::identity(n, n), cov / epsilon, weight)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn state(&self) -> VariationState {
        VariationState { b: self.b.clone(), c: self.c.clone() }
    }

    pub fn q(&self) -> Result<DMatrix<f64>> {
        self.state().q(true)
    }

    /// `ε Q⁻¹`.
    pub fn covariance(&self, epsilon: f64) -> Result<DMatrix<f64>> {
        let q = self.q()?;
        let inv = q
            .try_inverse()
            .ok_or_else(|| FpkError::InvalidCovariance("Q is singular".into()))?;
        Ok(symmetrize(&inv) * epsilon)
    }

    pub fn translated(&self, shift: &DVector<f64>) -> Self {
        Self { mean: &self.mean + shift, ..self.clone() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { weight: self.weight * factor, ..self.clone() }
    }

    pub fn evaluator(&self, epsilon: f64) -> Result<PacketEval> {
        let q = self.q()?;
        let n = self.dim() as i32;
        let det = q.determinant();
        let coeff = self.weight * (det / (2.0 * PI * epsilon).powi(n)).sqrt();
        Ok(PacketEval {
            mean: self.mean.clone(),
            scaled_q: q / epsilon,
            coeff,
        })
    }
}

/// Precomputed evaluation data for a density-valid packet.
#[derive(Debug, Clone)]
pub struct PacketEval {
    pub mean: DVector<f64>,
    /// `Q / ε`
    pub scaled_q: DMatrix<f64>,
    /// `weight·√(det Q / (2πε)ⁿ)`
    pub coeff: f64,
}

impl PacketEval {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let r = x - &self.mean;
        self.coeff * (-0.5 * r.dot(&(&self.scaled_q * &r))).exp()
    }

    /// Value and gradient at `x`.
    pub fn value_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let r = x - &self.mean;
        let sr = &self.scaled_q * &r;
        let v = self.coeff * (-0.5 * r.dot(&sr)).exp();
        (v, -sr * v)
    }

    pub fn value_1d(&self, x: f64) -> f64 {
        let r = x - self.mean[0];
        self.coeff * (-0.5 * self.scaled_q[(0, 0)] * r * r).exp()
    }
}

pub fn eval_packet(p: &GaussianPacket, params: &ModelParams, x: &DVector<f64>) -> Result<f64> {
    Ok(p.evaluator(params.epsilon())?.value(x))
}

/// Exact nonlinear evolution of a single packet from `s` to `t`.
pub fn evolve_packet(p0: &GaussianPacket, params: &ModelParams, t: f64, s: f64) -> Result<GaussianPacket> {
    if p0.dim() != params.dim() {
        return Err(FpkError::Input("packet and model dimensions differ".into()));
    }
    p0.q()?;
    if t == s {
        return Ok(p0.clone());
    }
    let m = matriciant(params, t, s);
    let state = p0.state().advance(&m);
    let mean = MomentTrajectory::new(params, s, p0.mean.clone())?.at(t);
    let out = GaussianPacket { mean, b: state.b, c: state.c, weight: p0.weight };
    out.q()?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketMoments {
    pub mass: f64,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

pub fn packet_moments(p: &GaussianPacket, params: &ModelParams) -> Result<PacketMoments> {
    Ok(PacketMoments {
        mass: p.weight,
        mean: p.mean.clone(),
        covariance: p.covariance(params.epsilon())?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    pub components: Vec<GaussianPacket>,
}

impl GaussianMixture {
    pub fn new(components: Vec<GaussianPacket>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| FpkError::Input("mixture needs at least one component".into()))?;
        let n = first.dim();
        if components.iter().any(|c| c.dim() != n) {
            return Err(FpkError::Input("mixture components differ in dimension".into()));
        }
        Ok(Self { components })
    }

    pub fn single(p: GaussianPacket) -> Self {
        Self { components: vec![p] }
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// `∫x u dx`.
    pub fn raw_first_moment(&self) -> DVector<f64> {
        self.components
            .iter()
            .fold(DVector::zeros(self.dim()), |acc, c| acc + &c.mean * c.weight)
    }

    /// First moment divided by the total weight.
    pub fn mean(&self) -> Result<DVector<f64>> {
        let w = self.total_weight();
        if w.abs() <= 1e-12 {
            return Err(FpkError::DegenerateMoment(format!("mixture has total weight {w:e}")));
        }
        Ok(self.raw_first_moment() / w)
    }

    pub fn translated(&self, shift: &DVector<f64>) -> Self {
        Self { components: self.components.iter().map(|c| c.translated(shift)).collect() }
    }

    pub fn evaluator(&self, epsilon: f64) -> Result<MixtureEval> {
        Ok(MixtureEval {
            parts: self.components.iter().map(|c| c.evaluator(epsilon)).collect::<Result<_>>()?,
        })
    }

    pub fn eval(&self, epsilon: f64, x: &DVector<f64>) -> Result<f64> {
        Ok(self.evaluator(epsilon)?.value(x))
    }
}

#[derive(Debug, Clone)]
pub struct MixtureEval {
    pub parts: Vec<PacketEval>,
}

impl MixtureEval {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.parts.iter().map(|p| p.value(x)).sum()
    }

    pub fn value_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let mut v = 0.0;
        let mut g = DVector::zeros(x.len());
        for p in &self.parts {
            let (pv, pg) = p.value_grad(x);
            v += pv;
            g += pg;
        }
        (v, g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v1(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn peak_value_is_normalization_factor() {
        let params = ModelParams::scalar(1.0, 0.0, 0.0, 0.3, 0.0).unwrap();
        let p = GaussianPacket::scalar(0.4, 2.0, 1.0, 0.7).unwrap();
        let expected = 0.7 * (2.0 / (2.0 * PI * 0.3)).sqrt();
        assert_relative_eq!(eval_packet(&p, &params, &v1(0.4)).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn unit_packet_at_half_epsilon() {
        let params = ModelParams::scalar(0.0, 0.0, 0.0, 0.5, 0.0).unwrap();
        let p = GaussianPacket::scalar(0.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(eval_packet(&p, &params, &v1(0.0)).unwrap(), 0.5641895835477563, epsilon = 1e-15);
    }

    #[test]
    fn even_about_mean() {
        let params = ModelParams::scalar(0.0, 0.0, 0.0, 0.5, 0.0).unwrap();
        let p = GaussianPacket::scalar(-0.3, 1.5, 0.5, 1.0).unwrap();
        for d in [0.1, 0.77, 2.0] {
            let a = eval_packet(&p, &params, &v1(-0.3 + d)).unwrap();
            let b = eval_packet(&p, &params, &v1(-0.3 - d)).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
    }

    #[test]
    fn invalid_covariance_on_eval() {
        let params = ModelParams::scalar(0.0, 0.0, 0.0, 0.5, 0.0).unwrap();
        let p = GaussianPacket::scalar(0.0, -1.0, 1.0, 1.0).unwrap();
        assert!(matches!(eval_packet(&p, &params, &v1(0.0)), Err(FpkError::InvalidCovariance(_))));
    }

    #[test]
    fn evolve_identity_at_start() {
        let params = ModelParams::scalar(1.0, 0.5, 0.2, 0.5, 1.0).unwrap();
        let p = GaussianPacket::scalar(0.3, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(evolve_packet(&p, &params, 0.7, 0.7).unwrap(), p);
    }

    #[test]
    fn heat_variance_after_unit_time() {
        let params = ModelParams::scalar(0.0, 0.0, 0.0, 0.5, 0.0).unwrap();
        let p = GaussianPacket::scalar(0.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(packet_moments(&p, &params).unwrap().covariance[(0, 0)], 0.5, epsilon = 1e-15);
        let p1 = evolve_packet(&p, &params, 1.0, 0.0).unwrap();
        assert_relative_eq!(p1.q().unwrap()[(0, 0)], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(packet_moments(&p1, &params).unwrap().covariance[(0, 0)], 1.5, epsilon = 1e-14);
    }

    #[test]
    fn mean_follows_moment_equation() {
        let params = ModelParams::scalar(1.0, 0.0, 1.0, 0.5, 1.0).unwrap();
        let p = GaussianPacket::scalar(0.5, 1.0, 1.0, 1.0).unwrap();
        let p1 = evolve_packet(&p, &params, 1.0, 0.0).unwrap();
        assert_relative_eq!(p1.mean[0], 0.0676676416183063, epsilon = 1e-15);
    }

    #[test]
    fn moments_report_weight_and_mean() {
        let params = ModelParams::scalar(0.0, 0.0, 0.0, 0.5, 0.0).unwrap();
        let p = GaussianPacket::from_covariance(v1(1.25), &DMatrix::from_element(1, 1, 1.5), 0.5, 0.9).unwrap();
        let m = packet_moments(&p, &params).unwrap();
        assert_eq!(m.mass, 0.9);
        assert_eq!(m.mean[0], 1.25);
        assert_relative_eq!(p.q().unwrap()[(0, 0)], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(m.covariance[(0, 0)], 1.5, epsilon = 1e-14);
    }

    #[test]
    fn backward_evolution_hits_invalid_covariance() {
        // pure diffusion, variance 0.5 at s; going back by 0.6 would need variance −0.1
        let params = ModelParams::scalar(0.0, 0.0, 0.0, 0.5, 0.0).unwrap();
        let p = GaussianPacket::scalar(0.0, 1.0, 1.0, 1.0).unwrap();
        assert!(evolve_packet(&p, &params, -0.4, 0.0).is_ok());
        let err = evolve_packet(&p, &params, -0.6, 0.0).unwrap_err();
        assert!(matches!(err, FpkError::InvalidCovariance(_) | FpkError::FocalPoint { .. }));
    }

    #[test]
    fn mixture_moments() {
        let a = GaussianPacket::scalar(-1.0, 1.0, 1.0, 0.25).unwrap();
        let b = GaussianPacket::scalar(2.0, 1.0, 1.0, 0.75).unwrap();
        let m = GaussianMixture::new(vec![a, b]).unwrap();
        assert_relative_eq!(m.total_weight(), 1.0);
        assert_relative_eq!(m.mean().unwrap()[0], 1.25);
        assert!(GaussianMixture::new(vec![]).is_err());
    }
}

//! Affine-times-Gaussian fields.
//!
//! First-order operators `a0 + a·x + b·∂ₓ` map a Gaussian to a Gaussian
//! multiplied by an affine polynomial, and the evolution operator maps such
//! terms to terms of the same shape. Fields produced this way may carry zero
//! total mass and are treated as signed fields, not densities.

use nalgebra::DVector;

use crate::error::{FpkError, Result};
use crate::packet::{GaussianMixture, GaussianPacket, PacketEval};

/// `(offset + slope·(x − mean))·packet(x)`
#[derive(Debug, Clone, PartialEq)]
pub struct AffineTerm {
    pub packet: GaussianPacket,
    pub offset: f64,
    pub slope: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianField {
    pub terms: Vec<AffineTerm>,
}

impl GaussianField {
    pub fn new(terms: Vec<AffineTerm>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| FpkError::Input("field needs at least one term".into()))?;
        let n = first.packet.dim();
        if terms.iter().any(|t| t.packet.dim() != n || t.slope.len() != n) {
            return Err(FpkError::Input("field terms differ in dimension".into()));
        }
        Ok(Self { terms })
    }

    pub fn from_mixture(m: &GaussianMixture) -> Self {
        Self {
            terms: m
                .components
                .iter()
                .map(|p| AffineTerm { packet: p.clone(), offset: 1.0, slope: DVector::zeros(p.dim()) })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.terms[0].packet.dim()
    }

    /// `∫u dx`; the slope parts integrate to zero.
    pub fn mass(&self) -> f64 {
        self.terms.iter().map(|t| t.packet.weight * t.offset).sum()
    }

    /// `∫x u dx = Σ w (offset·mean + Σ·slope)` with `Σ = εQ⁻¹`.
    pub fn raw_first_moment(&self, epsilon: f64) -> Result<DVector<f64>> {
        let mut acc = DVector::zeros(self.dim());
        for t in &self.terms {
            let cov = t.packet.covariance(epsilon)?;
            acc += (&t.packet.mean * t.offset + cov * &t.slope) * t.packet.weight;
        }
        Ok(acc)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| AffineTerm { packet: t.packet.scaled(factor), ..t.clone() })
                .collect(),
        }
    }

    pub fn translated(&self, shift: &DVector<f64>) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| AffineTerm { packet: t.packet.translated(shift), ..t.clone() })
                .collect(),
        }
    }

    pub fn evaluator(&self, epsilon: f64) -> Result<FieldEval> {
        let parts = self
            .terms
            .iter()
            .map(|t| Ok((t.packet.evaluator(epsilon)?, t.offset, t.slope.clone())))
            .collect::<Result<_>>()?;
        Ok(FieldEval { parts })
    }

    pub fn eval(&self, epsilon: f64, x: &DVector<f64>) -> Result<f64> {
        Ok(self.evaluator(epsilon)?.value(x))
    }
}

#[derive(Debug, Clone)]
pub struct FieldEval {
    parts: Vec<(PacketEval, f64, DVector<f64>)>,
}

impl FieldEval {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.parts
            .iter()
            .map(|(p, offset, slope)| (offset + slope.dot(&(x - &p.mean))) * p.value(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mass_and_moment_match_quadrature() {
        let eps = 0.4;
        let p = GaussianPacket::scalar(0.3, 2.0, 1.5, 0.8).unwrap();
        let f = GaussianField::new(vec![AffineTerm {
            packet: p,
            offset: 0.5,
            slope: DVector::from_element(1, -1.2),
        }])
        .unwrap();
        let ev = f.evaluator(eps).unwrap();
        let (a, b, n) = (-8.0, 8.0, 3201);
        let h = (b - a) / (n - 1) as f64;
        let (mut m0, mut m1) = (0.0, 0.0);
        for i in 0..n {
            let x = a + h * i as f64;
            let v = ev.value(&DVector::from_element(1, x));
            m0 += h * v;
            m1 += h * x * v;
        }
        assert_relative_eq!(f.mass(), m0, epsilon = 1e-12);
        assert_relative_eq!(f.raw_first_moment(eps).unwrap()[0], m1, epsilon = 1e-12);
    }

    #[test]
    fn mixture_field_evaluates_like_mixture() {
        let m = GaussianMixture::new(vec![
            GaussianPacket::scalar(-0.5, 1.0, 1.0, 0.4).unwrap(),
            GaussianPacket::scalar(0.7, 2.0, 1.0, 0.6).unwrap(),
        ])
        .unwrap();
        let f = GaussianField::from_mixture(&m);
        let x = DVector::from_element(1, 0.1);
        assert_relative_eq!(f.eval(0.3, &x).unwrap(), m.eval(0.3, &x).unwrap(), epsilon = 1e-15);
        assert_relative_eq!(f.mass(), 1.0);
    }
}

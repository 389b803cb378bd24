//! Uniform tensor-product grids carrying sampled fields.

use nalgebra::DVector;

use crate::error::{FpkError, Result};

/// Samples of a (possibly signed) field on a uniform tensor grid.
///
/// Values are stored row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDensity {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl SampledDensity {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let n = origin.len();
        if n == 0 || spacing.len() != n || shape.len() != n {
            return Err(FpkError::Input("grid origin, spacing and shape must share one non-zero length".into()));
        }
        if let Some(dx) = spacing.iter().find(|dx| !(**dx > 0.0) || !dx.is_finite()) {
            return Err(FpkError::Input(format!("grid spacing must be positive, got {dx}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(FpkError::Input("grid origin is not finite".into()));
        }
        if shape.iter().any(|&k| k < 2) {
            return Err(FpkError::Input("every grid axis needs at least two nodes".into()));
        }
        let len: usize = shape.iter().product();
        if values.len() != len {
            return Err(FpkError::Input(format!("grid has {len} nodes but {} values", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FpkError::Input("sampled values must be finite".into()));
        }
        Ok(Self { origin, spacing, shape, values })
    }

    pub fn new_1d(x_min: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        Self::new(vec![x_min], vec![dx], vec![len], values)
    }

    /// Samples `f` on the grid with `nx` nodes spanning `[x_min, x_max]` per axis.
    pub fn sample<F>(dim: usize, x_min: f64, x_max: f64, nx: usize, f: F) -> Result<Self>
    where
        F: FnMut(&DVector<f64>) -> f64,
    {
        if nx < 2 || !(x_max > x_min) {
            return Err(FpkError::Input(format!("bad grid [{x_min}, {x_max}] with {nx} nodes")));
        }
        let dx = (x_max - x_min) / (nx - 1) as f64;
        Self::sample_on(vec![x_min; dim], vec![dx; dim], vec![nx; dim], f)
    }

    pub fn sample_on<F>(origin: Vec<f64>, spacing: Vec<f64>, shape: Vec<usize>, mut f: F) -> Result<Self>
    where
        F: FnMut(&DVector<f64>) -> f64,
    {
        let probe = Self::new(origin, spacing, shape.clone(), vec![0.0; shape.iter().product()])?;
        let values = (0..probe.len()).map(|i| f(&probe.point(i))).collect();
        Self::new(probe.origin, probe.spacing, probe.shape, values)
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.origin.clone(), self.spacing.clone(), self.shape.clone(), values)
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn x_max(&self, axis: usize) -> f64 {
        self.origin[axis] + self.spacing[axis] * (self.shape[axis] - 1) as f64
    }

    /// Multi-index of a flat node index.
    pub fn index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.shape[axis];
            flat /= self.shape[axis];
        }
        idx
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &k)| acc * k + i)
    }

    pub fn point(&self, flat: usize) -> DVector<f64> {
        let idx = self.index(flat);
        DVector::from_iterator(
            self.dim(),
            idx.iter().enumerate().map(|(a, &i)| self.origin[a] + self.spacing[a] * i as f64),
        )
    }

    pub fn points(&self) -> Vec<DVector<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Trapezoid weight of a node (product of per-axis weights).
    pub fn weight(&self, flat: usize) -> f64 {
        self.index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| {
                let h = self.spacing[a];
                if i == 0 || i + 1 == self.shape[a] {
                    0.5 * h
                } else {
                    h
                }
            })
            .product()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    pub fn is_boundary(&self, flat: usize) -> bool {
        self.index(flat).iter().zip(&self.shape).any(|(&i, &k)| i == 0 || i + 1 == k)
    }

    /// Largest absolute value over boundary nodes.
    pub fn edge_max(&self) -> f64 {
        (0..self.len())
            .filter(|&i| self.is_boundary(i))
            .map(|i| self.values[i].abs())
            .fold(0.0, f64::max)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        let close = |a: &[f64], b: &[f64]| {
            a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0))
        };
        self.shape == other.shape && close(&self.origin, &other.origin) && close(&self.spacing, &other.spacing)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * factor).collect(), ..self.clone() }
    }
}

pub fn total_mass(d: &SampledDensity) -> Result<f64> {
    if d.is_empty() {
        return Err(FpkError::Input("empty grid".into()));
    }
    Ok(d.values.iter().enumerate().map(|(i, v)| v * d.weight(i)).sum())
}

/// Trapezoid first moment `∫x·u dx`, divided by the mass when `normalized`.
pub fn grid_first_moment(d: &SampledDensity, normalized: bool) -> Result<DVector<f64>> {
    if d.is_empty() {
        return Err(FpkError::Input("empty grid".into()));
    }
    let mut raw = DVector::zeros(d.dim());
    for (i, v) in d.values.iter().enumerate() {
        raw += d.point(i) * (v * d.weight(i));
    }
    if !normalized {
        return Ok(raw);
    }
    let mass = total_mass(d)?;
    if mass.abs() <= 1e-12 {
        return Err(FpkError::DegenerateMoment(format!(
            "normalized moment requested for a field of mass {mass:e}"
        )));
    }
    Ok(raw / mass)
}

/// Second central moment (covariance), weighting each node by `|u|`.
pub(crate) fn spread(d: &SampledDensity) -> (DVector<f64>, nalgebra::DMatrix<f64>) {
    let n = d.dim();
    let mut mass = 0.0;
    let mut mean = DVector::zeros(n);
    for (i, v) in d.values.iter().enumerate() {
        let w = v.abs() * d.weight(i);
        mass += w;
        mean += d.point(i) * w;
    }
    if mass == 0.0 {
        return (mean, nalgebra::DMatrix::zeros(n, n));
    }
    mean /= mass;
    let mut cov = nalgebra::DMatrix::zeros(n, n);
    for (i, v) in d.values.iter().enumerate() {
        let w = v.abs() * d.weight(i);
        let r = d.point(i) - &mean;
        cov += &r * r.transpose() * w;
    }
    (mean, cov / mass)
}

/// Weighted norms of `a − b`: (L∞, L1, L2).
pub fn compare(a: &SampledDensity, b: &SampledDensity) -> Result<(f64, f64, f64)> {
    if !a.same_grid(b) {
        return Err(FpkError::Input("compared densities live on different grids".into()));
    }
    let (mut linf, mut l1, mut l2) = (0.0f64, 0.0, 0.0);
    for i in 0..a.len() {
        let d = (a.values[i] - b.values[i]).abs();
        let w = a.weight(i);
        linf = linf.max(d);
        l1 += d * w;
        l2 += d * d * w;
    }
    Ok((linf, l1, l2.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gauss(mean: f64, var: f64) -> impl Fn(&DVector<f64>) -> f64 {
        move |x| (-(x[0] - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
    }

    #[test]
    fn unit_gaussian_mass() {
        let d = SampledDensity::sample(1, -8.0, 8.0, 1601, gauss(0.0, 1.0)).unwrap();
        assert_relative_eq!(d.spacing()[0], 0.01, epsilon = 1e-15);
        assert!((total_mass(&d).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_values_have_zero_mass() {
        let d = SampledDensity::new_1d(-1.0, 0.1, vec![0.0; 21]).unwrap();
        assert_eq!(total_mass(&d).unwrap(), 0.0);
    }

    #[test]
    fn mass_is_linear() {
        let d = SampledDensity::sample(1, -5.0, 5.0, 301, gauss(0.3, 0.7)).unwrap();
        let m = total_mass(&d).unwrap();
        assert_relative_eq!(total_mass(&d.scaled(2.0)).unwrap(), 2.0 * m, epsilon = 1e-15);
    }

    #[test]
    fn shifted_gaussian_moment() {
        let d = SampledDensity::sample(1, -8.0, 9.0, 1701, gauss(0.5, 1.0)).unwrap();
        let m = grid_first_moment(&d, true).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn even_density_has_zero_moment() {
        let d = SampledDensity::sample(1, -4.0, 4.0, 81, gauss(0.0, 0.5)).unwrap();
        assert!(grid_first_moment(&d, false).unwrap()[0].abs() < 1e-15);
    }

    #[test]
    fn translated_grid_shifts_raw_moment_by_mass() {
        let f = gauss(0.0, 0.5);
        let d = SampledDensity::sample(1, -4.0, 4.0, 81, &f).unwrap();
        let a = 0.75;
        let shifted = SampledDensity::new_1d(-4.0 + a, d.spacing()[0], d.values().to_vec()).unwrap();
        let mass = total_mass(&d).unwrap();
        let m0 = grid_first_moment(&d, false).unwrap()[0];
        let m1 = grid_first_moment(&shifted, false).unwrap()[0];
        assert_relative_eq!(m1 - m0, a * mass, epsilon = 1e-13);
    }

    #[test]
    fn zero_mass_normalized_moment_errors() {
        let d = SampledDensity::sample(1, -4.0, 4.0, 81, |x| x[0] * (-x[0] * x[0]).exp()).unwrap();
        assert!(matches!(grid_first_moment(&d, true), Err(FpkError::DegenerateMoment(_))));
        assert!(grid_first_moment(&d, false).is_ok());
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        assert!(SampledDensity::new_1d(0.0, 0.1, vec![]).is_err());
        assert!(SampledDensity::new_1d(0.0, 0.1, vec![1.0]).is_err());
        assert!(SampledDensity::new_1d(0.0, -0.1, vec![1.0, 2.0]).is_err());
        assert!(SampledDensity::new_1d(0.0, 0.1, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn two_dimensional_mass_and_moment() {
        let d = SampledDensity::sample(2, -7.0, 7.0, 141, |x| {
            (-(x[0] - 0.5).powi(2) / 2.0 - (x[1] + 0.25).powi(2) / 2.0).exp() / (2.0 * PI)
        })
        .unwrap();
        assert!((total_mass(&d).unwrap() - 1.0).abs() < 1e-9);
        let m = grid_first_moment(&d, true).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-9 && (m[1] + 0.25).abs() < 1e-9);
    }

    #[test]
    fn compare_norms() {
        let a = SampledDensity::sample(1, 0.0, 1.0, 11, |x| x[0]).unwrap();
        assert_eq!(compare(&a, &a).unwrap(), (0.0, 0.0, 0.0));
        let b = a.with_values(a.values().iter().map(|v| v + 0.25).collect()).unwrap();
        let (linf, l1, l2) = compare(&a, &b).unwrap();
        assert_relative_eq!(linf, 0.25, epsilon = 1e-15);
        assert_relative_eq!(l1, 0.25, epsilon = 1e-14);
        assert_relative_eq!(l2, 0.25, epsilon = 1e-14);
        let c = SampledDensity::sample(1, 0.0, 1.0, 12, |x| x[0]).unwrap();
        assert!(compare(&a, &c).is_err());
    }
}

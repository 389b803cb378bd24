//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented on
//! the inner functions, which are plain Rust and tested natively.

use fpk_core::evolution::{evolve_analytic, EvolutionPlan};
use fpk_core::fd::{fd_solve, FDConfig};
use fpk_core::grid::SampledDensity;
use fpk_core::model::ModelParams;
use fpk_core::packet::{GaussianMixture, GaussianPacket};
use fpk_core::symmetry::{symmetry_apply_evolution, InitialOperator};
use nalgebra::DVector;
use wasm_bindgen::prelude::*;

/// Scalar model with `K2 = 0`: drift `λx + κK3·X(t)`.
pub struct Setup {
    pub lambda: f64,
    pub k3: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub mean: f64,
    pub b0: f64,
    pub c0: f64,
}

impl Setup {
    fn params(&self) -> Result<ModelParams, String> {
        ModelParams::scalar(self.lambda, 0.0, self.k3, self.epsilon, self.kappa).map_err(|e| e.to_string())
    }

    fn mixture(&self) -> Result<GaussianMixture, String> {
        let p = GaussianPacket::scalar(self.mean, self.b0, self.c0, 1.0).map_err(|e| e.to_string())?;
        p.q().map_err(|e| e.to_string())?;
        Ok(GaussianMixture::single(p))
    }
}

fn xs(x_min: f64, x_max: f64, nx: usize) -> Result<Vec<f64>, String> {
    if nx < 2 || x_max.partial_cmp(&x_min) != Some(std::cmp::Ordering::Greater) {
        return Err("need x_max > x_min and at least two nodes".into());
    }
    let dx = (x_max - x_min) / (nx - 1) as f64;
    Ok((0..nx).map(|i| x_min + dx * i as f64).collect())
}

fn evolved(setup: &Setup, t: f64) -> Result<GaussianMixture, String> {
    let p = setup.params()?;
    let g = setup.mixture()?;
    let plan = EvolutionPlan::for_mixture(&p, 0.0, t, &g).map_err(|e| e.to_string())?;
    evolve_analytic(&g, &plan).map_err(|e| e.to_string())
}

fn sample(g: &GaussianMixture, eps: f64, x: &[f64]) -> Result<Vec<f64>, String> {
    let ev = g.evaluator(eps).map_err(|e| e.to_string())?;
    Ok(x.iter().map(|&x| ev.value(&DVector::from_element(1, x))).collect())
}

/// `[x…, u(x,0)…, u(x,t)…, X(t)]`
pub fn packet_curves_inner(setup: &Setup, t: f64, x_min: f64, x_max: f64, nx: usize) -> Result<Vec<f64>, String> {
    let x = xs(x_min, x_max, nx)?;
    let u0 = sample(&setup.mixture()?, setup.epsilon, &x)?;
    let ut = evolved(setup, t)?;
    let mut out = x.clone();
    out.extend(u0);
    out.extend(sample(&ut, setup.epsilon, &x)?);
    out.push(ut.mean().map_err(|e| e.to_string())?[0]);
    Ok(out)
}

/// `[x…, analytic…, finite differences…, max |difference|]`
pub fn fd_compare_inner(setup: &Setup, t: f64, x_min: f64, x_max: f64, nx: usize) -> Result<Vec<f64>, String> {
    let p = setup.params()?;
    let x = xs(x_min, x_max, nx)?;
    let dx = x[1] - x[0];
    let dt = (0.2 * dx * dx / setup.epsilon).min(1e-3);
    let cfg = FDConfig::new(&p, x_min, x_max, nx, dt, t.max(0.0)).map_err(|e| e.to_string())?;
    let g0 = sample(&setup.mixture()?, setup.epsilon, &x)?;
    let grid = SampledDensity::new_1d(x_min, dx, g0).map_err(|e| e.to_string())?;
    let sol = fd_solve(&p, &grid, &cfg).map_err(|e| e.to_string())?;
    let fd = sol.snapshots.last().ok_or("no snapshot")?.1.values().to_vec();
    let exact = sample(&evolved(setup, t.max(0.0))?, setup.epsilon, &x)?;
    let diff = exact.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut out = x;
    out.extend(exact);
    out.extend(fd);
    out.push(diff);
    Ok(out)
}

/// Image of the solution under `x − X_γ + ∂ₓ` carried to time `t`, whose
/// output has zero mass, so its moment `x_gamma_a` is chosen by the caller.
/// `[x…, u(x,t)…, u_A(x,t)…]`
pub fn symmetry_curves_inner(setup: &Setup, t: f64, x_gamma_a: f64, x_min: f64, x_max: f64, nx: usize) -> Result<Vec<f64>, String> {
    let p = setup.params()?;
    let g = setup.mixture()?;
    let x = xs(x_min, x_max, nx)?;
    let plan = EvolutionPlan::for_mixture(&p, 0.0, t, &g).map_err(|e| e.to_string())?;
    let u = evolve_analytic(&g, &plan).map_err(|e| e.to_string())?;
    let one = DVector::from_element(1, 1.0);
    let op = InitialOperator::new(-setup.mean, one.clone(), one).map_err(|e| e.to_string())?;
    let ua = symmetry_apply_evolution(&op, &u, &plan, Some(&DVector::from_element(1, x_gamma_a)))
        .map_err(|e| e.to_string())?;
    let ev = ua.field.evaluator(setup.epsilon).map_err(|e| e.to_string())?;
    let mut out = x.clone();
    out.extend(sample(&u, setup.epsilon, &x)?);
    out.extend(x.iter().map(|&x| ev.value(&DVector::from_element(1, x))));
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn setup(lambda: f64, k3: f64, kappa: f64, epsilon: f64, mean: f64, b0: f64, c0: f64) -> Setup {
    Setup { lambda, k3, kappa, epsilon, mean, b0, c0 }
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn packet_curves(
    lambda: f64, k3: f64, kappa: f64, epsilon: f64, mean: f64, b0: f64, c0: f64,
    t: f64, x_min: f64, x_max: f64, nx: usize,
) -> Result<Vec<f64>, JsValue> {
    packet_curves_inner(&setup(lambda, k3, kappa, epsilon, mean, b0, c0), t, x_min, x_max, nx).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn fd_compare(
    lambda: f64, k3: f64, kappa: f64, epsilon: f64, mean: f64, b0: f64, c0: f64,
    t: f64, x_min: f64, x_max: f64, nx: usize,
) -> Result<Vec<f64>, JsValue> {
    fd_compare_inner(&setup(lambda, k3, kappa, epsilon, mean, b0, c0), t, x_min, x_max, nx).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn symmetry_curves(
    lambda: f64, k3: f64, kappa: f64, epsilon: f64, mean: f64, b0: f64, c0: f64,
    t: f64, x_gamma_a: f64, x_min: f64, x_max: f64, nx: usize,
) -> Result<Vec<f64>, JsValue> {
    symmetry_curves_inner(&setup(lambda, k3, kappa, epsilon, mean, b0, c0), t, x_gamma_a, x_min, x_max, nx)
        .map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Setup {
        Setup { lambda: 1.0, k3: -0.5, kappa: 1.0, epsilon: 0.1, mean: 0.5, b0: 1.0, c0: 1.0 }
    }

    #[test]
    fn packet_layout_and_moment() {
        let v = packet_curves_inner(&example(), 1.0, -3.0, 3.0, 61).unwrap();
        assert_eq!(v.len(), 3 * 61 + 1);
        assert!((v[183] - 0.5 * (-0.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn fd_close_to_analytic() {
        let v = fd_compare_inner(&example(), 0.5, -3.0, 3.0, 241).unwrap();
        assert!(*v.last().unwrap() < 5e-3);
    }

    #[test]
    fn symmetry_image_has_zero_mass() {
        let v = symmetry_curves_inner(&example(), 0.7, 0.9, -4.0, 4.0, 401).unwrap();
        let dx = 8.0 / 400.0;
        let mass: f64 = v[802..].iter().sum::<f64>() * dx;
        assert!(mass.abs() < 1e-10);
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(packet_curves_inner(&Setup { b0: -1.0, ..example() }, 1.0, -3.0, 3.0, 61).is_err());
        assert!(packet_curves_inner(&example(), 1.0, 3.0, -3.0, 61).is_err());
    }
}

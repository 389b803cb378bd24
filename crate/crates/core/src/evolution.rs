//! The nonlinear evolution operator and its left inverse.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{FpkError, Result};
use crate::field::{AffineTerm, GaussianField};
use crate::grid::{grid_first_moment, spread, total_mass, SampledDensity};
use crate::kernels::KernelContext;
use crate::linalg::{symmetrize, sym_eigenvalues};
use crate::model::{ModelParams, MomentTrajectory};
use crate::packet::{GaussianMixture, GaussianPacket};
use crate::variations::{matriciant, Matriciant};

pub const MASS_TOL_ANALYTIC: f64 = 1e-10;
pub const MASS_TOL_QUADRATURE: f64 = 1e-6;
pub const EDGE_TOL: f64 = 1e-12;
/// Largest eigenvalue the combined quadratic form of the sampled inverse may have.
pub const INVERSE_GATE: f64 = -1e-10;
/// Largest multiplier `exp(−ε qᵀP q / 2)` the sampled inverse will apply.
pub const MAX_AMPLIFICATION: f64 = 1e8;
const MAX_FREQ_NODES: usize = 4096;

/// Everything the operator needs for one `(t, s)` pair. The moment
/// trajectory is fixed at construction, before any kernel is evaluated.
#[derive(Debug, Clone)]
pub struct EvolutionPlan {
    params: ModelParams,
    s: f64,
    t: f64,
    trajectory: MomentTrajectory,
    normalized: bool,
    m_fwd: Matriciant,
    m_bwd: Matriciant,
}

impl EvolutionPlan {
    /// `x_gamma` is the first moment of the input at `s`.
    pub fn new(params: &ModelParams, s: f64, t: f64, x_gamma: DVector<f64>) -> Result<Self> {
        if !s.is_finite() || !t.is_finite() {
            return Err(FpkError::Input("evolution times must be finite".into()));
        }
        let trajectory = MomentTrajectory::new(params, s, x_gamma)?;
        Ok(Self {
            params: params.clone(),
            s,
            t,
            trajectory,
            normalized: true,
            m_fwd: matriciant(params, t, s),
            m_bwd: matriciant(params, s, t),
        })
    }

    pub fn for_mixture(params: &ModelParams, s: f64, t: f64, g: &GaussianMixture) -> Result<Self> {
        Self::new(params, s, t, g.mean()?)
    }

    pub fn for_density(params: &ModelParams, s: f64, t: f64, g: &SampledDensity) -> Result<Self> {
        Self::new(params, s, t, grid_first_moment(g, true)?)
    }

    /// Plan for inverting a solution whose moment at `t` is `x_u_t`.
    pub fn from_final_moment(params: &ModelParams, s: f64, t: f64, x_u_t: DVector<f64>) -> Result<Self> {
        let back = MomentTrajectory::through(params, s, t, x_u_t)?;
        Self::new(params, s, t, back.x_start().clone())
    }

    /// Accept inputs of any nonzero mass, treated as mass times a density.
    pub fn unnormalized(mut self) -> Self {
        self.normalized = false;
        self
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn trajectory(&self) -> &MomentTrajectory {
        &self.trajectory
    }

    pub fn x_gamma(&self) -> &DVector<f64> {
        self.trajectory.x_start()
    }

    pub fn x_u_t(&self) -> DVector<f64> {
        self.trajectory.at(self.t)
    }

    pub fn forward(&self) -> &Matriciant {
        &self.m_fwd
    }

    pub fn backward(&self) -> &Matriciant {
        &self.m_bwd
    }

    pub fn kernel_context(&self) -> Result<KernelContext> {
        KernelContext::new(&self.params, self.t, self.s, self.x_u_t(), self.x_gamma().clone())
    }

    fn check_mass(&self, mass: f64, tol: f64) -> Result<()> {
        if self.normalized && (mass - 1.0).abs() > tol {
            return Err(FpkError::Normalization { mass, tolerance: tol });
        }
        Ok(())
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.params.dim() {
            return Err(FpkError::Input(format!(
                "input has dimension {n}, model has {}",
                self.params.dim()
            )));
        }
        Ok(())
    }
}

fn propagate_component(p: &GaussianPacket, m: &Matriciant, from: &DVector<f64>, to: &DVector<f64>) -> Result<GaussianPacket> {
    let state = p.state().advance(m);
    state.q(true)?;
    Ok(GaussianPacket {
        mean: to + &m.m3 * (&p.mean - from),
        b: state.b,
        c: state.c,
        weight: p.weight,
    })
}

/// Closed-form `Û(t,s,γ)` on a Gaussian mixture.
pub fn evolve_analytic(g: &GaussianMixture, plan: &EvolutionPlan) -> Result<GaussianMixture> {
    plan.check_dim(g.dim())?;
    for p in &g.components {
        p.q()?;
    }
    plan.check_mass(g.total_weight(), MASS_TOL_ANALYTIC)?;
    if plan.t == plan.s {
        return Ok(g.clone());
    }
    let x_u = plan.x_u_t();
    let components = g
        .components
        .iter()
        .map(|p| propagate_component(p, &plan.m_fwd, plan.x_gamma(), &x_u))
        .collect::<Result<_>>()?;
    GaussianMixture::new(components)
}

/// Closed-form evolution of an affine-times-Gaussian field. The plan's
/// moment is used as given; no mass check is made since such fields may
/// have zero mass.
pub fn evolve_field(f: &GaussianField, plan: &EvolutionPlan) -> Result<GaussianField> {
    plan.check_dim(f.dim())?;
    if plan.t == plan.s {
        return Ok(f.clone());
    }
    let x_u = plan.x_u_t();
    let terms = f
        .terms
        .iter()
        .map(|term| {
            let q0 = term.packet.q()?;
            let packet = propagate_component(&term.packet, &plan.m_fwd, plan.x_gamma(), &x_u)?;
            let qt = packet.q()?;
            let q0_inv = q0
                .try_inverse()
                .ok_or_else(|| FpkError::InvalidCovariance("Q is singular".into()))?;
            let slope = qt * &plan.m_fwd.m3 * q0_inv * &term.slope;
            Ok(AffineTerm { packet, offset: term.offset, slope })
        })
        .collect::<Result<_>>()?;
    GaussianField::new(terms)
}

/// Kernel quadrature `Σ_y G_nl(t,s,x,y)·γ(y)·w_y` on the input grid.
pub fn evolve_quadrature(gamma: &SampledDensity, plan: &EvolutionPlan) -> Result<SampledDensity> {
    plan.check_dim(gamma.dim())?;
    let edge = gamma.edge_max();
    let peak = gamma.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if edge >= EDGE_TOL * peak.max(1.0) {
        return Err(FpkError::Truncation { edge, limit: EDGE_TOL });
    }
    plan.check_mass(total_mass(gamma)?, MASS_TOL_QUADRATURE)?;
    if plan.t == plan.s {
        return Ok(gamma.clone());
    }
    let ctx = plan.kernel_context()?;
    let (form, pref) = ctx.density_form()?;
    let n = gamma.dim();
    let s_over_eps: Vec<f64> = (form.exponent.clone() / form.epsilon).iter().copied().collect();
    let x_u = plan.x_u_t();

    // Kernel centres X_u + M3 (y − X_γ) for each nonzero source node.
    let mut centres = Vec::new();
    let mut coeffs = Vec::new();
    for j in 0..gamma.len() {
        let c = gamma.values()[j] * gamma.weight(j);
        if c == 0.0 {
            continue;
        }
        let z = &x_u + &form.translate * (gamma.point(j) - plan.x_gamma());
        centres.extend(z.iter().copied());
        coeffs.push(c * pref);
    }

    let mut out = vec![0.0; gamma.len()];
    let mut r = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = gamma.point(i);
        let mut acc = 0.0;
        for (j, c) in coeffs.iter().enumerate() {
            let z = &centres[j * n..(j + 1) * n];
            for d in 0..n {
                r[d] = x[d] - z[d];
            }
            let mut quad = 0.0;
            for a in 0..n {
                for b in 0..n {
                    // column-major storage
                    quad += r[a] * s_over_eps[a + b * n] * r[b];
                }
            }
            acc += c * (-0.5 * quad).exp();
        }
        *o = acc;
    }
    gamma.with_values(out)
}

/// Left inverse `Û⁻¹(t,s,·)`.
pub trait InverseEvolve: Sized {
    fn inverse_evolve(&self, plan: &EvolutionPlan) -> Result<Self>;
}

impl InverseEvolve for GaussianMixture {
    /// Components move back under `M(s,t)`; the plan supplies `X_u(t)` and `X_γ`.
    fn inverse_evolve(&self, plan: &EvolutionPlan) -> Result<Self> {
        plan.check_dim(self.dim())?;
        plan.check_mass(self.total_weight(), MASS_TOL_ANALYTIC)?;
        if plan.t == plan.s {
            return Ok(self.clone());
        }
        let x_u = plan.x_u_t();
        let components = self
            .components
            .iter()
            .map(|p| propagate_component(p, &plan.m_bwd, &x_u, plan.x_gamma()))
            .collect::<Result<_>>()?;
        GaussianMixture::new(components)
    }
}

impl InverseEvolve for SampledDensity {
    /// The left-inverse kernel applied through its Fourier symbol
    /// `exp(−ε qᵀP(s,t)q/2)` composed with the translation `M3(s,t)`.
    /// The combined exponent `−(M3 Σ_u M3ᵀ + εP(s,t))` of the transformed
    /// integrand must be negative-definite; otherwise the backward flow has
    /// no integrable representation and the call fails.
    fn inverse_evolve(&self, plan: &EvolutionPlan) -> Result<Self> {
        inverse_sampled(self, plan)
    }
}

pub fn inverse_evolve<T: InverseEvolve>(u: &T, plan: &EvolutionPlan) -> Result<T> {
    u.inverse_evolve(plan)
}

fn inverse_sampled(u: &SampledDensity, plan: &EvolutionPlan) -> Result<SampledDensity> {
    let n = u.dim();
    plan.check_dim(n)?;
    plan.check_mass(total_mass(u)?, MASS_TOL_QUADRATURE)?;
    if plan.t == plan.s {
        return Ok(u.clone());
    }
    let eps = plan.params.epsilon();
    let m = &plan.m_bwd;
    let t3 = &m.m3;
    let p = m.spread()?;
    let (_, sigma_u) = spread(u);

    let combined = -symmetrize(&(t3 * &sigma_u * t3.transpose() + &p * eps));
    let lmax = *sym_eigenvalues(&combined).last().unwrap_or(&0.0);
    if lmax >= INVERSE_GATE {
        return Err(FpkError::IllPosedInverse(format!(
            "combined quadratic form has largest eigenvalue {lmax:.3e}"
        )));
    }
    let k = -combined;
    let k_inv = k
        .clone()
        .try_inverse()
        .ok_or_else(|| FpkError::IllPosedInverse("combined quadratic form is singular".into()))?;

    // Frequency box covering exp(−qᵀKq/2) down to 1e−16; spacing chosen so
    // the periodic images of the output lie three grid spans apart.
    let r2 = 2.0 * (1e16f64).ln();
    let mut q_axes: Vec<Vec<f64>> = Vec::with_capacity(n);
    for d in 0..n {
        let span = u.spacing()[d] * (u.shape()[d] - 1) as f64;
        let nyquist = PI / u.spacing()[d];
        let q_max = (r2 * k_inv[(d, d)]).sqrt().min(nyquist);
        let dq = 2.0 * PI / (3.0 * span);
        let half = (q_max / dq).ceil() as usize;
        if 2 * half + 1 > MAX_FREQ_NODES {
            return Err(FpkError::IllPosedInverse(format!(
                "axis {d} needs {} frequency nodes",
                2 * half + 1
            )));
        }
        q_axes.push((0..=2 * half).map(|i| (i as f64 - half as f64) * dq).collect());
    }
    let dq_vol: f64 = q_axes.iter().map(|a| if a.len() > 1 { a[1] - a[0] } else { 1.0 }).product();
    let nq: usize = q_axes.iter().map(Vec::len).product();

    let x_u = plan.x_u_t();
    let src: Vec<(DVector<f64>, f64)> = (0..u.len())
        .filter(|&j| u.values()[j] != 0.0)
        .map(|j| (u.point(j) - &x_u, u.values()[j] * u.weight(j)))
        .collect();

    let t3t = t3.transpose();
    let mut spectrum = Vec::with_capacity(nq);
    let mut max_amp = 0.0f64;
    for flat in 0..nq {
        let q = freq_point(&q_axes, flat);
        let kappa = &t3t * &q;
        let (mut re, mut im) = (0.0, 0.0);
        for (y, c) in &src {
            let ph = kappa.dot(y);
            re += c * ph.cos();
            im -= c * ph.sin();
        }
        let amp = (-0.5 * eps * q.dot(&(&p * &q))).exp();
        max_amp = max_amp.max(amp);
        spectrum.push((q, re * amp, im * amp));
    }
    if max_amp > MAX_AMPLIFICATION {
        return Err(FpkError::IllPosedInverse(format!(
            "backward flow amplifies frequencies by {max_amp:.3e}"
        )));
    }

    let norm = dq_vol / (2.0 * PI).powi(n as i32);
    let out: Vec<f64> = (0..u.len())
        .map(|i| {
            let xi = u.point(i) - plan.x_gamma();
            spectrum
                .iter()
                .map(|(q, re, im)| {
                    let ph = q.dot(&xi);
                    re * ph.cos() - im * ph.sin()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    u.with_values(out)
}

fn freq_point(axes: &[Vec<f64>], mut flat: usize) -> DVector<f64> {
    let n = axes.len();
    let mut q = DVector::zeros(n);
    for d in (0..n).rev() {
        let len = axes[d].len();
        q[d] = axes[d][flat % len];
        flat /= len;
    }
    q
}

/// Matrix `P(s,t)` of the backward pair; negative-definite for `t > s`.
pub fn backward_spread(plan: &EvolutionPlan) -> Result<DMatrix<f64>> {
    plan.m_bwd.spread()
}

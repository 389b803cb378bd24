//! First-order symmetry operators of the nonlinear equation.
//!
//! Operators are affine in `x` and first order in `∂ₓ`. An operator given at
//! the initial time `s` is carried to time `t` by the linear flow:
//! `a ↦ M1 a`, `b ↦ εM2 a + M3 b`, with the constant fixed in the frame
//! centred at the moment.

use nalgebra::DVector;

use crate::error::{FpkError, Result};
use crate::evolution::{evolve_field, EvolutionPlan, InverseEvolve};
use crate::field::{AffineTerm, GaussianField};
use crate::grid::{grid_first_moment, total_mass, SampledDensity};
use crate::model::{ModelParams, MomentTrajectory};
use crate::packet::{GaussianMixture, GaussianPacket};
use crate::variations::{matriciant, Matriciant};

/// Below this `|α_A|` the operator output is left unnormalized.
pub const ZERO_MASS_TOL: f64 = 1e-10;

/// `a0 + a_lin·x + a_grad·∂ₓ`
#[derive(Debug, Clone, PartialEq)]
pub struct InitialOperator {
    pub a0: f64,
    pub a_lin: DVector<f64>,
    pub a_grad: DVector<f64>,
}

/// Operator written about a moving centre: `c + a·(x − centre) + b·∂ₓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOperator {
    pub c: f64,
    pub a: DVector<f64>,
    pub b: DVector<f64>,
}

impl InitialOperator {
    pub fn new(a0: f64, a_lin: DVector<f64>, a_grad: DVector<f64>) -> Result<Self> {
        if a_lin.len() != a_grad.len() {
            return Err(FpkError::Input("operator coefficient vectors differ in length".into()));
        }
        Ok(Self { a0, a_lin, a_grad })
    }

    pub fn identity(n: usize) -> Self {
        Self { a0: 1.0, a_lin: DVector::zeros(n), a_grad: DVector::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.a_lin.len()
    }

    /// Express about `centre`.
    pub fn about(&self, centre: &DVector<f64>) -> FrameOperator {
        FrameOperator {
            c: self.a0 + self.a_lin.dot(centre),
            a: self.a_lin.clone(),
            b: self.a_grad.clone(),
        }
    }

    /// Carry the operator from `m.s` (centred at `x_gamma`) to `m.t`.
    pub fn propagate(&self, params: &ModelParams, m: &Matriciant, x_gamma: &DVector<f64>) -> FrameOperator {
        let f = self.about(x_gamma);
        FrameOperator {
            c: f.c,
            a: &m.m1 * &f.a,
            b: (&m.m2 * &f.a) * params.epsilon() + &m.m3 * &f.b,
        }
    }
}

impl FrameOperator {
    /// Fixed-frame form `a0 + a·x + b·∂ₓ` once the centre is known.
    pub fn at(&self, centre: &DVector<f64>) -> InitialOperator {
        InitialOperator { a0: self.c - self.a.dot(centre), a_lin: self.a.clone(), a_grad: self.b.clone() }
    }
}

/// `M1 d·(x − X_u(t)) + (εM2 + M3) d·∂ₓ`; in 1D take `d = 1`.
pub fn linsym_operator(params: &ModelParams, m: &Matriciant, x_u_t: &DVector<f64>, direction: &DVector<f64>) -> InitialOperator {
    let a_lin = &m.m1 * direction;
    let a_grad = (&m.m2 * params.epsilon() + &m.m3) * direction;
    InitialOperator { a0: -a_lin.dot(x_u_t), a_lin, a_grad }
}

/// Result of applying an operator: the field (divided by `alpha` unless
/// `zero_mass`), and `alpha = ∫â·γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Applied<T> {
    pub field: T,
    pub alpha: f64,
    pub zero_mass: bool,
}

pub trait ApplyOperator {
    type Output;
    fn apply_raw(&self, op: &InitialOperator, epsilon: f64) -> Result<Self::Output>;
}

impl ApplyOperator for GaussianMixture {
    type Output = GaussianField;

    fn apply_raw(&self, op: &InitialOperator, epsilon: f64) -> Result<GaussianField> {
        apply_to_packets(op, self.components.iter().map(|p| (p, 1.0)), epsilon)
    }
}

impl ApplyOperator for GaussianField {
    type Output = GaussianField;

    /// Only pure Gaussian terms can be differentiated into this class.
    fn apply_raw(&self, op: &InitialOperator, epsilon: f64) -> Result<GaussianField> {
        if self.terms.iter().any(|t| t.slope.iter().any(|v| *v != 0.0)) {
            return Err(FpkError::Input("operator application needs pure Gaussian terms".into()));
        }
        apply_to_packets(op, self.terms.iter().map(|t| (&t.packet, t.offset)), epsilon)
    }
}

fn apply_to_packets<'a>(
    op: &InitialOperator,
    parts: impl Iterator<Item = (&'a GaussianPacket, f64)>,
    epsilon: f64,
) -> Result<GaussianField> {
    let mut terms = Vec::new();
    for (p, scale) in parts {
        if p.dim() != op.dim() {
            return Err(FpkError::Input("operator and input dimensions differ".into()));
        }
        let s = p.q()? / epsilon;
        terms.push(AffineTerm {
            packet: p.clone(),
            offset: scale * (op.a0 + op.a_lin.dot(&p.mean)),
            slope: (&op.a_lin - s * &op.a_grad) * scale,
        });
    }
    GaussianField::new(terms)
}

impl ApplyOperator for SampledDensity {
    type Output = SampledDensity;

    /// Derivatives by centred differences, one-sided at the edges.
    fn apply_raw(&self, op: &InitialOperator, _epsilon: f64) -> Result<SampledDensity> {
        let n = self.dim();
        if op.dim() != n {
            return Err(FpkError::Input("operator and input dimensions differ".into()));
        }
        let v = self.values();
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let x = self.point(i);
            let mut acc = (op.a0 + op.a_lin.dot(&x)) * v[i];
            let idx = self.index(i);
            for d in 0..n {
                if op.a_grad[d] == 0.0 {
                    continue;
                }
                let h = self.spacing()[d];
                let last = self.shape()[d] - 1;
                let mut lo = idx.clone();
                let mut hi = idx.clone();
                let span = if idx[d] == 0 {
                    hi[d] += 1;
                    h
                } else if idx[d] == last {
                    lo[d] -= 1;
                    h
                } else {
                    lo[d] -= 1;
                    hi[d] += 1;
                    2.0 * h
                };
                acc += op.a_grad[d] * (v[self.flat(&hi)] - v[self.flat(&lo)]) / span;
            }
            out.push(acc);
        }
        self.with_values(out)
    }
}

/// `â·γ` with `α_A = ∫â·γ`; divided by `α_A` when `|α_A| > 1e−10`.
pub fn apply_initial_op<T>(op: &InitialOperator, gamma: &T, epsilon: f64) -> Result<Applied<T::Output>>
where
    T: ApplyOperator,
    T::Output: Massive,
{
    let raw = gamma.apply_raw(op, epsilon)?;
    let alpha = raw.mass()?;
    if alpha.abs() > ZERO_MASS_TOL {
        Ok(Applied { field: raw.scale(1.0 / alpha), alpha, zero_mass: false })
    } else {
        Ok(Applied { field: raw, alpha, zero_mass: true })
    }
}

/// Fields with a total mass and a raw first moment.
pub trait Massive: Sized {
    fn mass(&self) -> Result<f64>;
    fn raw_moment(&self, epsilon: f64) -> Result<DVector<f64>>;
    fn scale(&self, factor: f64) -> Self;
}

impl Massive for GaussianField {
    fn mass(&self) -> Result<f64> {
        Ok(GaussianField::mass(self))
    }
    fn raw_moment(&self, epsilon: f64) -> Result<DVector<f64>> {
        self.raw_first_moment(epsilon)
    }
    fn scale(&self, factor: f64) -> Self {
        self.scaled(factor)
    }
}

impl Massive for SampledDensity {
    fn mass(&self) -> Result<f64> {
        total_mass(self)
    }
    fn raw_moment(&self, _epsilon: f64) -> Result<DVector<f64>> {
        grid_first_moment(self, false)
    }
    fn scale(&self, factor: f64) -> Self {
        self.scaled(factor)
    }
}

/// First moment of `γ_A`: raw moment over mass when the mass is nonzero,
/// otherwise the caller's value.
pub fn operator_moment<T: Massive>(applied: &Applied<T>, epsilon: f64, supplied: Option<&DVector<f64>>) -> Result<DVector<f64>> {
    if !applied.zero_mass {
        let raw = applied.field.raw_moment(epsilon)?;
        let mass = applied.field.mass()?;
        return Ok(raw / mass);
    }
    supplied.cloned().ok_or_else(|| {
        FpkError::DegenerateMoment(format!(
            "operator output has mass {:e}; its first moment must be supplied",
            applied.alpha
        ))
    })
}

/// Moment bookkeeping shared by the three constructions.
#[derive(Debug, Clone)]
pub struct SymmetryShifts {
    params: ModelParams,
    s: f64,
    pub x_u: MomentTrajectory,
    pub x_u_a: MomentTrajectory,
    /// rate `−Λ`, starts at `lambda_a`
    pub l_a: MomentTrajectory,
    /// rate `−(Λ + κK3)`, starts at `lambda_a`
    pub y: MomentTrajectory,
    /// `X_{γ_A} − X_γ`
    pub lambda_a: DVector<f64>,
}

impl SymmetryShifts {
    pub fn new(params: &ModelParams, s: f64, x_gamma: DVector<f64>, x_gamma_a: DVector<f64>) -> Result<Self> {
        let lambda_a = &x_gamma_a - &x_gamma;
        Ok(Self {
            params: params.clone(),
            s,
            x_u: MomentTrajectory::new(params, s, x_gamma)?,
            x_u_a: MomentTrajectory::new(params, s, x_gamma_a)?,
            l_a: MomentTrajectory::with_rate(-params.lambda(), s, lambda_a.clone())?,
            y: MomentTrajectory::new(params, s, lambda_a.clone())?,
            lambda_a,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn x_gamma(&self) -> &DVector<f64> {
        self.x_u.x_start()
    }

    pub fn x_gamma_a(&self) -> &DVector<f64> {
        self.x_u_a.x_start()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

/// A constructed symmetry image `u_A` at one time.
#[derive(Debug, Clone)]
pub struct SymmetryField {
    pub field: GaussianField,
    pub alpha: f64,
    pub zero_mass: bool,
    /// `X_{u_A}`: the moment that enters the drift of `u_A`.
    pub moment: MomentTrajectory,
}

fn alpha_of(frame: &FrameOperator) -> (f64, bool) {
    (frame.c, frame.c.abs() <= ZERO_MASS_TOL)
}

/// `(1/α)·[c + a_t·(x − o) + b_t·∂ₓ] u(x − o + X_u(t), t)`.
fn frame_image(
    op: &InitialOperator,
    u: &GaussianMixture,
    shifts: &SymmetryShifts,
    t: f64,
    origin: DVector<f64>,
) -> Result<SymmetryField> {
    let params = &shifts.params;
    let m = matriciant(params, t, shifts.s);
    let frame = op.propagate(params, &m, shifts.x_gamma());
    let (alpha, zero_mass) = alpha_of(&frame);
    let shifted = u.translated(&(&origin - shifts.x_u.at(t)));
    let mut field = shifted.apply_raw(&frame.at(&origin), params.epsilon())?;
    if !zero_mass {
        field = field.scaled(1.0 / alpha);
    }
    Ok(SymmetryField { field, alpha, zero_mass, moment: shifts.x_u_a.clone() })
}

/// Shift construction, argument `x − Y(t) + l_A(t)`.
pub fn symmetry_apply_shift(op: &InitialOperator, u: &GaussianMixture, shifts: &SymmetryShifts, t: f64) -> Result<SymmetryField> {
    let origin = shifts.y.at(t) - shifts.l_a.at(t);
    frame_image(op, u, shifts, t, origin)
}

/// Operator-Cauchy form, argument `x − X_{u_A}(t) + l_A(t)`.
pub fn symmetry_apply_cauchy(op: &InitialOperator, u: &GaussianMixture, shifts: &SymmetryShifts, t: f64) -> Result<SymmetryField> {
    let origin = shifts.x_u_a.at(t) - shifts.l_a.at(t);
    frame_image(op, u, shifts, t, origin)
}

/// `Û(t,s, â·Û⁻¹(t,s,u))`. `x_gamma_a` is needed only when `â·γ` has zero mass.
pub fn symmetry_apply_evolution(
    op: &InitialOperator,
    u: &GaussianMixture,
    plan: &EvolutionPlan,
    x_gamma_a: Option<&DVector<f64>>,
) -> Result<SymmetryField> {
    let eps = plan.params().epsilon();
    let gamma = u.inverse_evolve(plan)?;
    let applied = apply_initial_op(op, &gamma, eps)?;
    let moment = operator_moment(&applied, eps, x_gamma_a)?;
    let plan_a = EvolutionPlan::new(plan.params(), plan.s(), plan.t(), moment)?.unnormalized();
    let field = evolve_field(&applied.field, &plan_a)?;
    Ok(SymmetryField {
        field,
        alpha: applied.alpha,
        zero_mass: applied.zero_mass,
        moment: plan_a.trajectory().clone(),
    })
}

/// 1D closed form for a single packet evolved from `(B0, C0)`:
/// `(1/C(t))(C0 − B0/ε)·ξ·u(ξ + X_u(t), t)`, `ξ = x − X_{u_A}(t) + M3(X_{γ_A} − X_γ)`.
pub fn gaussian_display_1d(b0: f64, c0: f64, u: &GaussianPacket, shifts: &SymmetryShifts, t: f64) -> Result<impl Fn(f64) -> f64> {
    let params = &shifts.params;
    if params.dim() != 1 {
        return Err(FpkError::Input("the scalar display is one-dimensional".into()));
    }
    let eps = params.epsilon();
    let m = matriciant(params, t, shifts.s);
    let c_t = m.m2[(0, 0)] * b0 + m.m3[(0, 0)] * c0;
    let factor = (c0 - b0 / eps) / c_t;
    let shift = shifts.x_u_a.at(t)[0] - m.m3[(0, 0)] * shifts.lambda_a[0];
    let x_u = shifts.x_u.at(t)[0];
    let ev = u.evaluator(eps)?;
    Ok(move |x: f64| {
        let xi = x - shift;
        factor * xi * ev.value_1d(xi + x_u)
    })
}

/// Uniformly sampled space-time field: `slices[k]` holds `u(·, t0 + k·dt)`.
#[derive(Debug, Clone)]
pub struct SpaceTimeSamples {
    pub t0: f64,
    pub dt: f64,
    pub slices: Vec<SampledDensity>,
}

impl SpaceTimeSamples {
    /// `slice(t)` returns the function to sample at time `t`.
    pub fn sample<F, G>(t0: f64, dt: f64, nt: usize, like: &SampledDensity, mut slice: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<G>,
        G: Fn(&DVector<f64>) -> f64,
    {
        let mut slices = Vec::with_capacity(nt);
        for k in 0..nt {
            let f = slice(t0 + dt * k as f64)?;
            slices.push(like.with_values(like.points().iter().map(&f).collect())?);
        }
        Ok(Self { t0, dt, slices })
    }
}

/// Centred-difference residual of `∂ₜu = εΔu + ∇·((Λx + κK3 X(t))u)` at
/// interior nodes. Returns (max, L2).
pub fn residual_field(params: &ModelParams, field: &SpaceTimeSamples, moment: &MomentTrajectory) -> Result<(f64, f64)> {
    let nt = field.slices.len();
    if nt < 3 {
        return Err(FpkError::Input("residual needs at least three time slices".into()));
    }
    let first = &field.slices[0];
    let n = first.dim();
    if n != params.dim() {
        return Err(FpkError::Input("samples and model dimensions differ".into()));
    }
    if first.shape().iter().any(|&s| s < 3) {
        return Err(FpkError::Input("residual needs at least three nodes per axis".into()));
    }
    if field.slices.iter().any(|s| !s.same_grid(first)) || !(field.dt > 0.0) {
        return Err(FpkError::Input("slices must share one grid and dt must be positive".into()));
    }
    let eps = params.epsilon();
    let lambda = params.lambda();
    let trace = lambda.trace();
    let coupling = params.moment_coupling();
    let cell: f64 = first.spacing().iter().product::<f64>() * field.dt;
    let (mut max, mut sum) = (0.0f64, 0.0);
    for k in 1..nt - 1 {
        let t = field.t0 + field.dt * k as f64;
        let shift = &coupling * moment.at(t);
        let (prev, cur, next) = (&field.slices[k - 1], &field.slices[k], &field.slices[k + 1]);
        let v = cur.values();
        for i in 0..cur.len() {
            let idx = cur.index(i);
            if idx.iter().zip(cur.shape()).any(|(&j, &s)| j == 0 || j == s - 1) {
                continue;
            }
            let x = cur.point(i);
            let drift = &lambda * &x + &shift;
            let mut rhs = trace * v[i];
            for d in 0..n {
                let h = cur.spacing()[d];
                let mut lo = idx.clone();
                let mut hi = idx.clone();
                lo[d] -= 1;
                hi[d] += 1;
                let (ul, uh) = (v[cur.flat(&lo)], v[cur.flat(&hi)]);
                rhs += eps * (uh - 2.0 * v[i] + ul) / (h * h) + drift[d] * (uh - ul) / (2.0 * h);
            }
            let dudt = (next.values()[i] - prev.values()[i]) / (2.0 * field.dt);
            let r = (rhs - dudt).abs();
            max = max.max(r);
            sum += r * r * cell;
        }
    }
    Ok((max, sum.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::evolve_analytic;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn v1(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    fn op1(a0: f64, a: f64, b: f64) -> InitialOperator {
        InitialOperator::new(a0, v1(a), v1(b)).unwrap()
    }

    #[test]
    fn identity_operator() {
        let g = GaussianMixture::single(GaussianPacket::scalar(0.3, 1.0, 1.0, 1.0).unwrap());
        let r = apply_initial_op(&InitialOperator::identity(1), &g, 0.2).unwrap();
        assert_relative_eq!(r.alpha, 1.0);
        assert!(!r.zero_mass);
        assert_eq!(r.field, GaussianField::from_mixture(&g));
    }

    #[test]
    fn linsym_initial_is_zero_mass() {
        let g = GaussianMixture::single(GaussianPacket::scalar(0.0, 2.0, 1.0, 1.0).unwrap());
        let r = apply_initial_op(&op1(0.0, 1.0, 1.0), &g, 0.3).unwrap();
        assert!(r.zero_mass);
        assert_eq!(r.alpha, 0.0);
    }

    #[test]
    fn position_operator_gives_mean() {
        let g = GaussianMixture::single(GaussianPacket::scalar(0.8, 1.0, 1.0, 1.0).unwrap());
        let r = apply_initial_op(&op1(0.0, 1.0, 0.0), &g, 0.3).unwrap();
        assert_relative_eq!(r.alpha, 0.8, epsilon = 1e-15);
    }

    #[test]
    fn linsym_values() {
        let p = ModelParams::scalar(1.0, 0.0, 0.0, 1.0, 0.0).unwrap();
        let m = matriciant(&p, 1.0, 0.0);
        let op = linsym_operator(&p, &m, &v1(0.0), &v1(1.0));
        assert_relative_eq!(op.a_lin[0], E, epsilon = 1e-14);
        assert_relative_eq!(op.a_grad[0], E, epsilon = 1e-14);
        assert_eq!(op.a0, 0.0);

        let m0 = matriciant(&p, 0.0, 0.0);
        let op = linsym_operator(&p, &m0, &v1(0.4), &v1(1.0));
        assert_eq!(op, op1(-0.4, 1.0, 1.0));
    }

    #[test]
    fn linsym_is_propagated_initial_operator() {
        let p = ModelParams::scalar(0.7, 0.2, -0.5, 0.3, 1.0).unwrap();
        let xg = v1(0.6);
        let traj = MomentTrajectory::new(&p, 0.0, xg.clone()).unwrap();
        let m = matriciant(&p, 1.3, 0.0);
        let start = op1(-0.6, 1.0, 1.0);
        let moved = start.propagate(&p, &m, &xg).at(&traj.at(1.3));
        let direct = linsym_operator(&p, &m, &traj.at(1.3), &v1(1.0));
        assert_relative_eq!(moved.a0, direct.a0, epsilon = 1e-14);
        assert_relative_eq!(moved.a_lin[0], direct.a_lin[0], epsilon = 1e-14);
        assert_relative_eq!(moved.a_grad[0], direct.a_grad[0], epsilon = 1e-14);
    }

    #[test]
    fn sampled_application_matches_analytic() {
        let eps = 0.3;
        let pk = GaussianPacket::scalar(0.2, 1.0, 1.0, 1.0).unwrap();
        let g = GaussianMixture::single(pk.clone());
        let op = op1(0.5, -0.7, 0.9);
        let ev = pk.evaluator(eps).unwrap();
        let d = SampledDensity::sample(1, -4.0, 4.0, 1601, |x| ev.value(x)).unwrap();
        let a = apply_initial_op(&op, &d, eps).unwrap();
        let b = apply_initial_op(&op, &g, eps).unwrap();
        assert_relative_eq!(a.alpha, b.alpha, epsilon = 1e-8);
        let fe = b.field.evaluator(eps).unwrap();
        for (i, x) in d.points().iter().enumerate().skip(1).take(1598) {
            assert!((a.field.values()[i] - fe.value(x)).abs() < 1e-4);
        }
    }

    fn setup() -> (ModelParams, GaussianMixture, EvolutionPlan, InitialOperator) {
        let p = ModelParams::scalar(1.0, 0.0, -0.5, 0.1, 1.0).unwrap();
        let g = GaussianMixture::single(GaussianPacket::scalar(0.5, 1.0, 1.0, 1.0).unwrap());
        let plan = EvolutionPlan::for_mixture(&p, 0.0, 0.8, &g).unwrap();
        let op = op1(-0.5, 1.0, 1.0);
        (p, g, plan, op)
    }

    #[test]
    fn routes_agree() {
        let (p, g, plan, op) = setup();
        let u = evolve_analytic(&g, &plan).unwrap();
        let xga = v1(0.9);
        let conj = symmetry_apply_evolution(&op, &u, &plan, Some(&xga)).unwrap();
        let shifts = SymmetryShifts::new(&p, 0.0, v1(0.5), xga).unwrap();
        let cauchy = symmetry_apply_cauchy(&op, &u, &shifts, 0.8).unwrap();
        let shift = symmetry_apply_shift(&op, &u, &shifts, 0.8).unwrap();
        let disp = gaussian_display_1d(1.0, 1.0, &u.components[0], &shifts, 0.8).unwrap();
        let (ec, ea, es) = (
            conj.field.evaluator(0.1).unwrap(),
            cauchy.field.evaluator(0.1).unwrap(),
            shift.field.evaluator(0.1).unwrap(),
        );
        let x_u = plan.x_u_t()[0];
        for k in 0..=60 {
            let x = -3.0 + 0.1 * k as f64;
            let c = ec.value(&v1(x));
            assert!((c - ea.value(&v1(x))).abs() < 1e-12);
            assert!((c - es.value(&v1(x - x_u))).abs() < 1e-12);
            assert!((c - disp(x)).abs() < 1e-12);
        }
        assert!(conj.zero_mass);
    }

    #[test]
    fn residual_second_order() {
        let (p, g, _, _) = setup();
        let pk = &g.components[0];
        let traj = MomentTrajectory::new(&p, 0.0, v1(0.5)).unwrap();
        let res = |dx: f64, dt: f64| {
            let nx = (4.0 / dx).round() as usize + 1;
            let like = SampledDensity::sample(1, -2.0, 2.0, nx, |_| 0.0).unwrap();
            let nt = (0.2 / dt).round() as usize + 1;
            let st = SpaceTimeSamples::sample(0.3, dt, nt, &like, |t| {
                let ev = crate::packet::evolve_packet(pk, &p, t, 0.0)?.evaluator(0.1)?;
                Ok(move |x: &DVector<f64>| ev.value(x))
            })
            .unwrap();
            residual_field(&p, &st, &traj).unwrap().0
        };
        let r1 = res(2e-2, 2e-3);
        let r2 = res(1e-2, 1e-3);
        let ratio = r1 / r2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zero_field_residual() {
        let p = ModelParams::scalar(1.0, 0.0, 0.0, 0.1, 0.0).unwrap();
        let like = SampledDensity::sample(1, -1.0, 1.0, 11, |_| 0.0).unwrap();
        let st = SpaceTimeSamples { t0: 0.0, dt: 0.1, slices: vec![like.clone(), like.clone(), like] };
        let traj = MomentTrajectory::new(&p, 0.0, v1(0.0)).unwrap();
        assert_eq!(residual_field(&p, &st, &traj).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn shift_moments() {
        let p = ModelParams::scalar(0.9, 0.1, 0.4, 0.2, 1.0).unwrap();
        let sh = SymmetryShifts::new(&p, 0.0, v1(0.3), v1(-0.2)).unwrap();
        for t in [0.0, 0.5, 2.0] {
            assert_relative_eq!(sh.y.at(t)[0], sh.x_u_a.at(t)[0] - sh.x_u.at(t)[0], epsilon = 1e-14);
            let m = matriciant(&p, t, 0.0);
            assert_relative_eq!(sh.l_a.at(t)[0], m.m3[(0, 0)] * sh.lambda_a[0], epsilon = 1e-14);
        }
    }
}

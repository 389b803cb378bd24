use nalgebra::DVector;

use super::config::{Initial, Prepared, RunConfig, Task};
use super::report::{Check, Report};
use crate::error::{FpkError, Result};
use crate::evolution::{evolve_analytic, evolve_quadrature, EvolutionPlan, InverseEvolve};
use crate::fd::{fd_solve, FDConfig};
use crate::field::GaussianField;
use crate::grid::{compare, grid_first_moment, total_mass, SampledDensity};
use crate::model::{ModelParams, MomentTrajectory};
use crate::packet::GaussianMixture;
use crate::symmetry::{
    apply_initial_op, operator_moment, residual_field, symmetry_apply_cauchy, symmetry_apply_evolution, InitialOperator,
    SpaceTimeSamples, SymmetryShifts,
};

const MAX_GRID_NODES: usize = 4_000_000;

pub struct Outcome {
    pub snapshots: Vec<(f64, SampledDensity)>,
    pub report: Report,
}

pub fn execute(cfg: &RunConfig, prep: &Prepared, task: Task) -> Result<Outcome> {
    match task {
        Task::Evolve => evolve(cfg, prep),
        Task::Inverse => inverse(cfg, prep),
        Task::Symmetry => symmetry(cfg, prep),
        Task::Verify => verify(cfg, prep),
    }
}

fn output_grid(cfg: &RunConfig, n: usize) -> Result<SampledDensity> {
    let g = &cfg.grid;
    if g.nx.checked_pow(n as u32).is_none_or(|c| c > MAX_GRID_NODES) {
        return Err(FpkError::Config(format!("output grid of {}^{n} nodes is too large", g.nx)));
    }
    SampledDensity::sample(n, g.x_min, g.x_max, g.nx, |_| 0.0)
}

fn sample_field(like: &SampledDensity, f: impl Fn(&DVector<f64>) -> f64) -> Result<SampledDensity> {
    like.with_values(like.points().iter().map(f).collect())
}

fn sample_mixture(like: &SampledDensity, g: &GaussianMixture, eps: f64) -> Result<SampledDensity> {
    let ev = g.evaluator(eps)?;
    sample_field(like, |x| ev.value(x))
}

fn sample_gfield(like: &SampledDensity, f: &GaussianField, eps: f64) -> Result<SampledDensity> {
    let ev = f.evaluator(eps)?;
    sample_field(like, |x| ev.value(x))
}

fn max_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

fn evolve(cfg: &RunConfig, prep: &Prepared) -> Result<Outcome> {
    let p = &prep.params;
    let eps = p.epsilon();
    let s = cfg.time.s;
    let mut report = Report::new("evolve");
    let mut snapshots = Vec::new();
    match &prep.initial {
        Initial::Mixture(g) => {
            let grid = output_grid(cfg, p.dim())?;
            let traj = MomentTrajectory::new(p, s, g.mean()?)?;
            let (mut mass_err, mut moment_err) = (0.0f64, 0.0f64);
            for &t in &prep.snapshots {
                let u = evolve_analytic(g, &EvolutionPlan::for_mixture(p, s, t, g)?)?;
                mass_err = mass_err.max((u.total_weight() - 1.0).abs());
                moment_err = moment_err.max(max_norm(&(u.mean()? - traj.at(t))));
                snapshots.push((t, sample_mixture(&grid, &u, eps)?));
            }
            report.check(Check::at_most("analytic_mass_error", mass_err, 1e-12));
            report.check(Check::at_most("analytic_moment_error", moment_err, 1e-12));
        }
        Initial::Sampled(d) => {
            let traj = MomentTrajectory::new(p, s, grid_first_moment(d, true)?)?;
            let (mut mass_err, mut moment_err) = (0.0f64, 0.0f64);
            for &t in &prep.snapshots {
                let u = evolve_quadrature(d, &EvolutionPlan::for_density(p, s, t, d)?)?;
                mass_err = mass_err.max((total_mass(&u)? - 1.0).abs());
                moment_err = moment_err.max(max_norm(&(grid_first_moment(&u, true)? - traj.at(t))));
                snapshots.push((t, u));
            }
            report.check(Check::at_most("quadrature_mass_error", mass_err, 1e-6));
            report.check(Check::at_most("quadrature_moment_error", moment_err, 1e-6));
        }
    }
    Ok(Outcome { snapshots, report })
}

/// The initial block is the state at `t`; the output is at `s`.
fn inverse(cfg: &RunConfig, prep: &Prepared) -> Result<Outcome> {
    let p = &prep.params;
    let eps = p.epsilon();
    let (s, t) = (cfg.time.s, cfg.time.t);
    let mut report = Report::new("inverse");
    let snapshot = match &prep.initial {
        Initial::Mixture(u) => {
            let plan = EvolutionPlan::from_final_moment(p, s, t, u.mean()?)?;
            let gamma = u.inverse_evolve(&plan)?;
            let again = evolve_analytic(&gamma, &plan)?;
            let mut err = 0.0f64;
            for (a, b) in again.components.iter().zip(&u.components) {
                err = err.max(max_norm(&(&a.mean - &b.mean)));
                err = err.max((a.q()? - b.q()?).amax());
            }
            report.check(Check::at_most("analytic_reevolution_error", err, 1e-10));
            report.metric("x_gamma", plan.x_gamma()[0]);
            sample_mixture(&output_grid(cfg, p.dim())?, &gamma, eps)?
        }
        Initial::Sampled(u) => {
            let plan = EvolutionPlan::from_final_moment(p, s, t, grid_first_moment(u, true)?)?;
            let gamma = u.inverse_evolve(&plan)?;
            report.check(Check::at_most("inverse_mass_error", (total_mass(&gamma)? - 1.0).abs(), 1e-6));
            gamma
        }
    };
    Ok(Outcome { snapshots: vec![(s, snapshot)], report })
}

fn op_of(prep: &Prepared) -> Result<&InitialOperator> {
    prep.operator
        .as_ref()
        .ok_or_else(|| FpkError::Config("a symmetry block is required".into()))
}

fn mixture_of(prep: &Prepared, what: &str) -> Result<GaussianMixture> {
    match &prep.initial {
        Initial::Mixture(g) => Ok(g.clone()),
        Initial::Sampled(_) => Err(FpkError::Config(format!("{what} needs a Gaussian mixture initial block"))),
    }
}

fn symmetry(cfg: &RunConfig, prep: &Prepared) -> Result<Outcome> {
    let p = &prep.params;
    let eps = p.epsilon();
    let s = cfg.time.s;
    let g = mixture_of(prep, "task symmetry")?;
    let op = op_of(prep)?;
    let grid = output_grid(cfg, p.dim())?;
    let mut report = Report::new("symmetry");
    let applied = apply_initial_op(op, &g, eps)?;
    let x_gamma_a = operator_moment(&applied, eps, prep.x_gamma_a.as_ref())?;
    report.metric("alpha", applied.alpha);
    report.metric("zero_mass", if applied.zero_mass { 1.0 } else { 0.0 });
    let shifts = SymmetryShifts::new(p, s, g.mean()?, x_gamma_a.clone())?;
    let mut agree = 0.0f64;
    let mut snapshots = Vec::new();
    for &t in &prep.snapshots {
        let plan = EvolutionPlan::for_mixture(p, s, t, &g)?;
        let u = evolve_analytic(&g, &plan)?;
        let ua = symmetry_apply_evolution(op, &u, &plan, Some(&x_gamma_a))?;
        let other = symmetry_apply_cauchy(op, &u, &shifts, t)?;
        let a = sample_gfield(&grid, &ua.field, eps)?;
        let b = sample_gfield(&grid, &other.field, eps)?;
        agree = agree.max(compare(&a, &b)?.0);
        snapshots.push((t, a));
    }
    report.check(Check::at_most("symmetry_route_agreement", agree, 1e-8));
    Ok(Outcome { snapshots, report })
}

fn verify(cfg: &RunConfig, prep: &Prepared) -> Result<Outcome> {
    let p = &prep.params;
    if p.dim() != 1 {
        return Err(FpkError::Config("task verify runs the one-dimensional oracle".into()));
    }
    let eps = p.epsilon();
    let (s, t) = (cfg.time.s, cfg.time.t);
    if !(t > s) {
        return Err(FpkError::Config("task verify needs t > s".into()));
    }
    let g = mixture_of(prep, "task verify")?;
    let mut report = Report::new("verify");
    let plan = EvolutionPlan::for_mixture(p, s, t, &g)?;
    let grid = output_grid(cfg, 1)?;

    // analytic pathway
    let u = evolve_analytic(&g, &plan)?;
    report.check(Check::at_most("analytic_mass_error", (u.total_weight() - 1.0).abs(), 1e-12));
    let back = u.inverse_evolve(&plan)?;
    let mut rt = 0.0f64;
    for (a, b) in back.components.iter().zip(&g.components) {
        rt = rt.max(max_norm(&(&a.mean - &b.mean))).max((a.q()? - b.q()?).amax());
    }
    report.check(Check::at_most("analytic_roundtrip_error", rt, 1e-12));

    // finite-difference oracle
    let g0 = sample_mixture(&grid, &g, eps)?;
    let fd_cfg = FDConfig::new(p, cfg.grid.x_min, cfg.grid.x_max, cfg.grid.nx, cfg.grid.dt, t - s)?;
    let sol = fd_solve(p, &g0, &fd_cfg)?;
    let exact = sample_mixture(&grid, &u, eps)?;
    let fd_u = &sol.snapshots.last().expect("final snapshot").1;
    report.check(Check::at_most("fd_linf_vs_analytic", compare(fd_u, &exact)?.0, 5e-3));
    let traj = plan.trajectory();
    let dev = sol
        .moments
        .iter()
        .map(|(tau, x)| (x - traj.at(s + tau)[0]).abs())
        .fold(0.0f64, f64::max);
    report.check(Check::at_most("fd_moment_deviation", dev, 1e-3));
    report.check(Check::at_most("fd_mass_drift", sol.mass_drift, 1e-6));

    // kernel quadrature
    let quad = evolve_quadrature(&g0, &EvolutionPlan::for_density(p, s, t, &g0)?)?;
    report.check(Check::at_most("quadrature_linf_vs_analytic", compare(&quad, &exact)?.0, 1e-6));
    report.check(Check::at_most("quadrature_mass_error", (total_mass(&quad)? - 1.0).abs(), 1e-6));
    let qm = (grid_first_moment(&quad, true)?[0] - traj.at(t)[0]).abs();
    report.check(Check::at_most("quadrature_moment_error", qm, 1e-6));

    if let Some(op) = &prep.operator {
        let applied = apply_initial_op(op, &g, eps)?;
        let xga = operator_moment(&applied, eps, prep.x_gamma_a.as_ref())?;
        let shifts = SymmetryShifts::new(p, s, g.mean()?, xga.clone())?;
        let ua = symmetry_apply_evolution(op, &u, &plan, Some(&xga))?;
        let other = symmetry_apply_cauchy(op, &u, &shifts, t)?;
        let diff = compare(&sample_gfield(&grid, &ua.field, eps)?, &sample_gfield(&grid, &other.field, eps)?)?.0;
        report.check(Check::at_most("symmetry_route_agreement", diff, 1e-8));

        let tc = 0.5 * (s + t);
        let r1 = symmetry_residual(p, &g, op, &xga, s, tc, cfg, 1)?;
        let r2 = symmetry_residual(p, &g, op, &xga, s, tc, cfg, 2)?;
        report.metric("symmetry_residual_coarse", r1);
        report.metric("symmetry_residual_fine", r2);
        report.check(Check::within("symmetry_residual_ratio", r1 / r2, 3.0, 5.0));
    }
    Ok(Outcome { snapshots: vec![(s, g0), (t, fd_u.clone())], report })
}

/// Max residual of `u_A` on a window around `tc`; `level` 2 halves both steps.
#[allow(clippy::too_many_arguments)]
fn symmetry_residual(
    p: &ModelParams,
    g: &GaussianMixture,
    op: &InitialOperator,
    xga: &DVector<f64>,
    s: f64,
    tc: f64,
    cfg: &RunConfig,
    level: usize,
) -> Result<f64> {
    let eps = p.epsilon();
    let nx = (cfg.grid.nx - 1) / 4 * level + 1;
    let like = SampledDensity::sample(1, cfg.grid.x_min, cfg.grid.x_max, nx, |_| 0.0)?;
    let dt = 4e-3 / level as f64;
    let nt = 4 * level + 1;
    let t0 = tc - dt * (nt / 2) as f64;
    let mut moment = None;
    let mut slices = Vec::with_capacity(nt);
    for k in 0..nt {
        let t = t0 + dt * k as f64;
        let plan = EvolutionPlan::for_mixture(p, s, t, g)?;
        let u = evolve_analytic(g, &plan)?;
        let ua = symmetry_apply_evolution(op, &u, &plan, Some(xga))?;
        moment.get_or_insert(ua.moment.clone());
        slices.push(sample_gfield(&like, &ua.field, eps)?);
    }
    let st = SpaceTimeSamples { t0, dt, slices };
    Ok(residual_field(p, &st, moment.as_ref().expect("at least one slice"))?.0)
}

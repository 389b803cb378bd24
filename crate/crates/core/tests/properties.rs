use fpk_core::evolution::{evolve_analytic, EvolutionPlan, InverseEvolve};
use fpk_core::linalg::asymmetry;
use fpk_core::model::{ModelParams, MomentTrajectory};
use fpk_core::packet::{GaussianMixture, GaussianPacket};
use fpk_core::symmetry::{linsym_operator, InitialOperator};
use fpk_core::variations::{matriciant, riccati_q};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn mat(n: usize, v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, &v[..n * n])
}

fn params2(v: &[f64], kappa: f64) -> ModelParams {
    ModelParams::new(mat(2, &v[0..4]), mat(2, &v[4..8]), mat(2, &v[8..12]), 0.4, kappa).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matriciant_composes(v in coeffs(), kappa in 0.0f64..1.0, t in -1.0f64..1.0, r in -1.0f64..1.0, s in -1.0f64..1.0) {
        let p = params2(&v, kappa);
        let direct = matriciant(&p, t, s);
        let composed = matriciant(&p, t, r).compose(&matriciant(&p, r, s));
        let scale = direct.full().amax().max(1.0);
        prop_assert!(composed.max_block_diff(&direct) <= 1e-11 * scale);
    }

    #[test]
    fn moment_semigroup(v in coeffs(), kappa in 0.0f64..1.0, x0 in -2.0f64..2.0, t in 0.0f64..2.0, r in 0.0f64..1.0) {
        let p = params2(&v, kappa);
        let start = DVector::from_row_slice(&[x0, -0.5 * x0]);
        let a = MomentTrajectory::new(&p, 0.0, start.clone()).unwrap();
        let b = MomentTrajectory::new(&p, r, a.at(r)).unwrap();
        prop_assert!((a.at(t) - b.at(t)).amax() <= 1e-10 * a.at(t).amax().max(1.0));
    }

    #[test]
    fn drift_is_linear_in_kappa(v in coeffs(), k in -2.0f64..2.0) {
        let p0 = params2(&v, 0.0);
        let p1 = params2(&v, 1.0);
        let pk = params2(&v, k);
        let expect = p0.lambda() + (p1.lambda() - p0.lambda()) * k;
        prop_assert!((pk.lambda() - expect).amax() <= 1e-14);
    }

    #[test]
    fn riccati_solution_stays_symmetric(v in coeffs(), kappa in 0.0f64..1.0, d1 in 0.5f64..2.0, d2 in 0.5f64..2.0, t in 0.01f64..2.0) {
        let p = params2(&v, kappa);
        let b0 = DMatrix::from_diagonal(&DVector::from_row_slice(&[d1, d2]));
        let c0 = DMatrix::from_diagonal(&DVector::from_row_slice(&[d2, 1.0]));
        let q = riccati_q(&matriciant(&p, t, 0.0), &b0, &c0, true).unwrap();
        prop_assert!(asymmetry(&q) <= 1e-12 * q.amax().max(1.0));
    }

    #[test]
    fn analytic_mass_is_invariant(lambda in -1.5f64..1.5, k3 in -1.0f64..1.0, w in 0.1f64..0.9, m1 in -1.0f64..1.0, m2 in -1.0f64..1.0, t in 0.0f64..2.0) {
        let p = ModelParams::scalar(lambda, 0.0, k3, 0.2, 1.0).unwrap();
        let g = GaussianMixture::new(vec![
            GaussianPacket::scalar(m1, 1.0, 1.0, w).unwrap(),
            GaussianPacket::scalar(m2, 2.0, 0.5, 1.0 - w).unwrap(),
        ]).unwrap();
        let u = evolve_analytic(&g, &EvolutionPlan::for_mixture(&p, 0.0, t, &g).unwrap()).unwrap();
        prop_assert!((u.total_weight() - 1.0).abs() <= 1e-15);
        let x = MomentTrajectory::new(&p, 0.0, g.mean().unwrap()).unwrap().at(t);
        prop_assert!((u.mean().unwrap() - x).amax() <= 1e-12);
    }

    #[test]
    fn analytic_semigroup(lambda in -1.0f64..1.5, k3 in -1.0f64..1.0, m in -1.0f64..1.0, r in 0.0f64..1.0, dt in 0.0f64..1.0) {
        let p = ModelParams::scalar(lambda, 0.2, k3, 0.3, 0.7).unwrap();
        let g = GaussianMixture::single(GaussianPacket::scalar(m, 1.3, 0.8, 1.0).unwrap());
        let t = r + dt;
        let mid = evolve_analytic(&g, &EvolutionPlan::for_mixture(&p, 0.0, r, &g).unwrap()).unwrap();
        let two = evolve_analytic(&mid, &EvolutionPlan::for_mixture(&p, r, t, &mid).unwrap()).unwrap();
        let one = evolve_analytic(&g, &EvolutionPlan::for_mixture(&p, 0.0, t, &g).unwrap()).unwrap();
        let (a, b) = (&two.components[0], &one.components[0]);
        prop_assert!((a.mean[0] - b.mean[0]).abs() <= 1e-10);
        prop_assert!((a.q().unwrap()[(0, 0)] - b.q().unwrap()[(0, 0)]).abs() <= 1e-10);
    }

    #[test]
    fn left_inverse_recovers_mixture(lambda in -1.0f64..1.5, k3 in -1.0f64..1.0, m in -1.0f64..1.0, t in 0.0f64..1.5) {
        let p = ModelParams::scalar(lambda, 0.0, k3, 0.3, 1.0).unwrap();
        let g = GaussianMixture::new(vec![
            GaussianPacket::scalar(m, 1.0, 1.0, 0.5).unwrap(),
            GaussianPacket::scalar(-m, 0.5, 1.0, 0.5).unwrap(),
        ]).unwrap();
        let plan = EvolutionPlan::for_mixture(&p, 0.0, t, &g).unwrap();
        let back = evolve_analytic(&g, &plan).unwrap().inverse_evolve(&plan).unwrap();
        for (a, b) in back.components.iter().zip(&g.components) {
            prop_assert!((a.mean[0] - b.mean[0]).abs() <= 1e-12);
            prop_assert!((a.q().unwrap()[(0, 0)] - b.q().unwrap()[(0, 0)]).abs() <= 1e-12);
        }
    }

    #[test]
    fn linsym_at_initial_time(lambda in -2.0f64..2.0, xg in -2.0f64..2.0) {
        let p = ModelParams::scalar(lambda, 0.0, 0.0, 0.5, 0.0).unwrap();
        let m = matriciant(&p, 0.3, 0.3);
        let op = linsym_operator(&p, &m, &DVector::from_element(1, xg), &DVector::from_element(1, 1.0));
        prop_assert_eq!(op, InitialOperator::new(-xg, DVector::from_element(1, 1.0), DVector::from_element(1, 1.0)).unwrap());
    }
}

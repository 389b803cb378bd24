//! Exact and numerical solutions of the Fokker–Planck–Kolmogorov equation
//! with a drift that depends on the first moment of the solution:
//!
//! `∂ₜu = εΔu + ∇·((Λx + κK3·X_u(t)) u)`, `Λ = K1 + κK2`, `X_u = ∫x u dx`.
//!
//! The moment obeys a closed linear ODE, so the nonlinear problem reduces
//! to a linear one with a known time-dependent shift. Gaussian packets and
//! their mixtures evolve in closed form through the evolution matrix of a
//! linear system; sampled densities use kernel quadrature; a
//! finite-difference solver with the self-consistent moment is kept as an
//! independent reference.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod evolution;
pub mod fd;
pub mod field;
pub mod grid;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod packet;
pub mod symmetry;
pub mod variations;

pub use error::{FpkError, Result};
pub use evolution::{evolve_analytic, evolve_field, evolve_quadrature, inverse_evolve, EvolutionPlan, InverseEvolve};
pub use fd::{fd_solve, Boundary, FDConfig, FdSolution};
pub use field::{AffineTerm, GaussianField};
pub use grid::{compare, grid_first_moment, total_mass, SampledDensity};
pub use kernels::{green_lin, green_nl, green_nl_inv, KernelContext};
pub use model::{effective_drift, moment_at, ModelParams, MomentTrajectory};
pub use packet::{eval_packet, evolve_packet, packet_moments, GaussianMixture, GaussianPacket};
pub use symmetry::{
    apply_initial_op, linsym_operator, residual_field, symmetry_apply_cauchy, symmetry_apply_evolution,
    symmetry_apply_shift, InitialOperator, SpaceTimeSamples, SymmetryShifts,
};
pub use variations::{matriciant, riccati_q, Matriciant, VariationState};

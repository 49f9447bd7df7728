//! Continuous-time primal-dual flows for linearly constrained convex programs.
//!
//! The crate integrates a second-order primal / first-order dual dynamical system
//! with variable mass `m(t)`, slowly vanishing viscous damping `α/t^q`, constant
//! Hessian-driven damping `γ`, time scaling `t^s` and a vanishing Tikhonov term
//! `c/t^p`, and measures how its trajectories approach the minimal-norm
//! primal-dual solution.
//!
//! Module map:
//!
//! - [`problem`]: objectives with value / gradient / Hessian-vector oracles, the
//!   constraint pair `(A, b)`, and the random-QP and toy instance families.
//! - [`lagrangian`]: the regularized Lagrangian `L_t`, its saddle path and the
//!   minimal-norm KKT pair.
//! - [`dynamics`]: parameters, mass functions, the extrapolation coefficient,
//!   the first-order vector field and the regime classifier.
//! - [`integrator`]: adaptive Dormand-Prince 5(4) with Hermite sampling.
//! - [`diagnostics`]: Lyapunov energy, per-sample metrics, log-log rate fits and
//!   oscillation measures.
//! - [`experiment`]: config files, presets and the sweep runner behind the CLI.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod integrator;
pub mod lagrangian;
pub mod problem;
pub mod rng;

pub use error::{Error, Result};

pub use nalgebra::{DMatrix, DVector};

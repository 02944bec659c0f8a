//! Mirror-descent solvers for variational inequalities.
//!
//! A variational inequality (VI) over a convex compact set `Q` asks for a
//! point `x*` with `<F(x), x* - x> <= 0` for every `x` in `Q`. This crate
//! provides:
//!
//! * [`geometry`]: prox-structures (norm, prox-function, feasible set), the
//!   Bregman divergence and closed-form mirror steps.
//! * [`problems`]: operator library (the 2D/3D sine-perturbed operators,
//!   the HpHard affine generator, reductions from minimization, saddle-point
//!   and fixed-point problems) and functional constraint stacks.
//! * [`solvers`]: weighted mirror descent, its switching variant for
//!   functional constraints, step-size schedules and an extragradient
//!   baseline.
//! * [`metrics`]: sampled restricted gap, residual ratio, a-priori bound
//!   evaluation and convergence-slope fitting.
//! * [`experiment`]: spec-file driven benchmark runs with CSV/JSON output.

pub mod error;
pub mod experiment;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use geometry::{FeasibleSet, Norm, ProxFunction, ProxGeometry};
pub use problems::{ConstraintStack, HpHardProblem, VIInstance};
pub use solvers::{RunResult, Schedule, SolverConfig, StopReason};

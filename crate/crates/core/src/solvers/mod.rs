//! Weighted mirror descent for VIs, its switching variant for functional
//! constraints, step-size schedules and an extragradient baseline.
//!
//! Both mirror-descent solvers output a step-weighted average of their
//! iterates,
//!
//! ```text
//! x_hat = sum_k gamma_k^(-m) x^k / sum_k gamma_k^(-m),   m >= -1,
//! ```
//!
//! so that larger `m` shifts weight towards recent iterates. `m = 0` is the
//! plain mean and `m = -1` the classic step-weighted ergodic average; all
//! three are reported by every run.

mod baseline;
mod mirror;
mod steps;
mod switching;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ProxGeometry, MEMBERSHIP_TOL};
use crate::problems::VIInstance;

pub use baseline::{
    extragradient_run, extragradient_run_observed, mpm_baseline_run, mpm_baseline_run_observed, mpm_step,
};
pub use mirror::{algorithm1_run, algorithm1_run_observed};
pub use steps::{
    step_adaptive, step_nonadaptive, weighted_average, BoundSums, StoppingRuleConstants, StoppingRuleValues,
    WeightedAverager, ZERO_OPERATOR_FLOOR,
};
pub use switching::{algorithm2_run, algorithm2_run_observed, stopping_rule_lhs_rhs};

/// Full iterate logs are kept only up to this many iterations.
pub const ITERATE_LOG_LIMIT: usize = 10_000;

/// Per-iteration metrics are recorded at most this many times per run.
pub const METRIC_RECORD_LIMIT: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// `gamma_k = sqrt(2 sigma) / (L_F sqrt k)`.
    NonAdaptive,
    /// `gamma_k = sqrt(2 sigma) / (||F(x^k)||_* sqrt k)`; may increase.
    Adaptive,
    /// `L_F` on productive steps and `M_g` on non-productive ones.
    ConstraintSplit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Weighting exponent, `m >= -1`.
    pub m: f64,
    pub iterations: usize,
    pub epsilon: f64,
    /// Bound `R` on the Bregman divergence over `Q`.
    pub radius: f64,
    pub schedule: Schedule,
    pub x1: Vec<f64>,
}

impl SolverConfig {
    /// Defaults: `m = 0`, `epsilon = 1e-2`, non-adaptive steps and the
    /// geometry's default `R`.
    pub fn new(geom: &ProxGeometry, x1: Vec<f64>, iterations: usize) -> Self {
        SolverConfig {
            m: 0.0,
            iterations,
            epsilon: 1e-2,
            radius: geom.default_radius(),
            schedule: Schedule::NonAdaptive,
            x1,
        }
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self, geom: &ProxGeometry) -> Result<()> {
        if !(self.m.is_finite() && self.m >= -1.0) {
            return Err(Error::invalid(format!(
                "weighting exponent m must be >= -1, got {}",
                self.m
            )));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iteration budget must be positive"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::invalid(format!("R must be positive, got {}", self.radius)));
        }
        if !geom.set().contains(&self.x1, MEMBERSHIP_TOL) {
            return Err(Error::invalid("initial point lies outside the feasible set"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    MirrorDescent,
    SwitchingMirrorDescent,
    Extragradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Productive,
    #[serde(rename = "nonproductive")]
    NonProductive,
    Unconstrained,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Productive => "productive",
            Branch::NonProductive => "nonproductive",
            Branch::Unconstrained => "unconstrained",
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "productive" => Ok(Branch::Productive),
            "nonproductive" => Ok(Branch::NonProductive),
            "unconstrained" => Ok(Branch::Unconstrained),
            other => Err(Error::invalid(format!("unknown branch '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    BudgetExhausted,
    StoppingRuleMet,
    /// Adaptive steps hit `||F(x^k)||_* = 0`; the current iterate is returned.
    ZeroOperatorValue,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::BudgetExhausted => "budget_exhausted",
            StopReason::StoppingRuleMet => "stopping_rule_met",
            StopReason::ZeroOperatorValue => "zero_operator_value",
        }
    }
}

/// `x_hat` for the configured `m`, plus the `m = 0` and `m = -1` averages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedOutputs {
    pub weighted: Vec<f64>,
    pub uniform: Vec<f64>,
    pub step_weighted: Vec<f64>,
}

impl WeightedOutputs {
    fn all(x: Vec<f64>) -> Self {
        WeightedOutputs {
            weighted: x.clone(),
            uniform: x.clone(),
            step_weighted: x,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub k: usize,
    pub branch: Branch,
    pub gamma: f64,
    /// `||F(x_hat_k)||_2^2 / ||F(x^1)||_2^2`; `None` when `F(x^1) = 0` or no
    /// estimate exists yet.
    pub residual: Option<f64>,
    /// Running a-priori gap bound at iteration `k`.
    pub bound_rhs: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub solver: SolverKind,
    /// `x^1 .. x^(K+1)` when the budget is at most [`ITERATE_LOG_LIMIT`].
    pub iterates: Option<Vec<Vec<f64>>>,
    pub output: WeightedOutputs,
    /// `x^(K+1)`, the point after the last executed step.
    pub last_point: Vec<f64>,
    pub step_sizes: Vec<f64>,
    /// Dual norm of the direction used at each step (`F(x^k)` or a subgradient of `g`).
    pub direction_norms: Vec<f64>,
    pub branches: Vec<Branch>,
    pub productive: Vec<usize>,
    pub nonproductive: Vec<usize>,
    pub stop_reason: StopReason,
    pub metrics: Vec<IterationMetrics>,
    /// Whether the realized step sequence was positive and non-increasing.
    pub theorem_hypotheses_met: bool,
    /// Last evaluation of the switching stopping rule.
    pub stopping_rule: Option<StoppingRuleValues>,
}

impl RunResult {
    /// Number of executed iterations.
    pub fn iterations(&self) -> usize {
        self.step_sizes.len()
    }
}

/// One solver iteration, streamed to an [`IterationObserver`].
#[derive(Clone, Copy, Debug)]
pub struct IterationEvent<'a> {
    pub k: usize,
    /// `x^k`.
    pub point: &'a [f64],
    pub gamma: f64,
    pub branch: Branch,
    /// Current solution estimate: `x_hat_k` for mirror descent, `x^(k+1)`
    /// for the baseline. `None` before the first productive step.
    pub estimate: Option<&'a [f64]>,
}

pub trait IterationObserver {
    fn on_iteration(&mut self, event: &IterationEvent<'_>);
}

impl<F> IterationObserver for F
where
    F: FnMut(&IterationEvent<'_>),
{
    fn on_iteration(&mut self, event: &IterationEvent<'_>) {
        self(event)
    }
}

/// Observer that ignores every event.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoopObserver;

impl IterationObserver for NoopObserver {
    fn on_iteration(&mut self, _event: &IterationEvent<'_>) {}
}

/// Metrics are recorded every `stride`-th iteration (and at the first and last).
pub fn metric_stride(iterations: usize) -> usize {
    iterations.div_ceil(METRIC_RECORD_LIMIT).max(1)
}

fn should_record(k: usize, stride: usize, last: usize) -> bool {
    k == 1 || k == last || k.is_multiple_of(stride)
}

fn check_problem(instance: &VIInstance, geom: &ProxGeometry, config: &SolverConfig) -> Result<()> {
    if instance.set() != geom.set() {
        return Err(Error::config(
            "the instance's feasible set differs from the prox-geometry's set",
        ));
    }
    config.validate(geom)
}

fn evaluate_checked(instance: &VIInstance, x: &[f64], k: usize) -> Result<Vec<f64>> {
    let fx = instance.evaluate(x);
    if fx.len() != instance.dimension() || !crate::linalg::all_finite(&fx) {
        return Err(Error::invalid(format!(
            "operator returned an invalid value at iteration {k}"
        )));
    }
    Ok(fx)
}

fn non_increasing(steps: &[f64]) -> bool {
    steps.windows(2).all(|w| w[1] <= w[0])
}

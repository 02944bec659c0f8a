use super::steps::{step_nonadaptive, BoundSums, StoppingRuleConstants, StoppingRuleValues, WeightedAverager};
use super::{
    check_problem, evaluate_checked, non_increasing, should_record, Branch, IterationEvent, IterationMetrics,
    IterationObserver, NoopObserver, RunResult, Schedule, SolverConfig, SolverKind, StopReason, WeightedOutputs,
    ITERATE_LOG_LIMIT,
};
use crate::error::{Error, Result};
use crate::geometry::ProxGeometry;
use crate::metrics::ResidualReference;
use crate::problems::{ConstraintStack, VIInstance};

/// Stopping-rule sides from the running sums (O(1); see [`BoundSums`]).
pub fn stopping_rule_lhs_rhs(sums: &BoundSums, constants: &StoppingRuleConstants) -> StoppingRuleValues {
    sums.stopping_rule(constants)
}

/// Switching mirror descent for `g(x) = max_i g_i(x) <= 0`.
///
/// Steps with `g(x^k) <= epsilon` move along `F(x^k)` (productive),
/// the others along a subgradient of `g`. The output averages productive
/// iterates only. The run ends when the budget is exhausted or the stopping
/// rule is met.
pub fn algorithm2_run(
    instance: &VIInstance,
    constraints: &ConstraintStack,
    geom: &ProxGeometry,
    config: &SolverConfig,
) -> Result<RunResult> {
    algorithm2_run_observed(instance, constraints, geom, config, &mut NoopObserver)
}

pub fn algorithm2_run_observed(
    instance: &VIInstance,
    constraints: &ConstraintStack,
    geom: &ProxGeometry,
    config: &SolverConfig,
    observer: &mut dyn IterationObserver,
) -> Result<RunResult> {
    check_problem(instance, geom, config)?;
    if config.schedule != Schedule::ConstraintSplit {
        return Err(Error::config(
            "the switching method requires the constraint-split schedule",
        ));
    }
    let n_iters = config.iterations;
    let dim = instance.dimension();
    let sigma = geom.sigma();
    let norm = geom.norm();
    let m_g = constraints.lipschitz();
    let constants = StoppingRuleConstants {
        radius: config.radius,
        sigma,
        lipschitz: m_g,
        diameter: geom.set().diameter(),
        epsilon: config.epsilon,
    };
    let stride = super::metric_stride(n_iters);
    let residual = ResidualReference::new(instance, &config.x1).ok();

    let mut x = config.x1.clone();
    let mut iterates = (n_iters <= ITERATE_LOG_LIMIT).then(|| vec![x.clone()]);
    let mut weighted = WeightedAverager::new(config.m, dim);
    let mut uniform = WeightedAverager::new(0.0, dim);
    let mut step_weighted = WeightedAverager::new(-1.0, dim);
    let mut sums = BoundSums::new(config.m);
    let mut step_sizes = Vec::with_capacity(n_iters);
    let mut direction_norms = Vec::with_capacity(n_iters);
    let mut branches = Vec::with_capacity(n_iters);
    let mut productive = Vec::new();
    let mut nonproductive = Vec::new();
    let mut metrics = Vec::new();
    let mut stop_reason = StopReason::BudgetExhausted;
    let mut rule = None;

    for k in 1..=n_iters {
        let (_, g_value) = constraints.active(&x)?;
        let (branch, direction, gamma) = if g_value <= config.epsilon {
            let fx = evaluate_checked(instance, &x, k)?;
            (Branch::Productive, fx, step_nonadaptive(k, sigma, instance.bound())?)
        } else {
            let sub = constraints.subgradient(&x)?;
            if sub.len() != dim {
                return Err(Error::invalid(format!(
                    "constraint subgradient has length {}, expected {dim}",
                    sub.len()
                )));
            }
            (Branch::NonProductive, sub, step_nonadaptive(k, sigma, m_g)?)
        };
        let dual = norm.dual_norm(&direction);
        if branch == Branch::Productive {
            weighted.push(&x, gamma);
            uniform.push(&x, gamma);
            step_weighted.push(&x, gamma);
            productive.push(k);
        } else {
            nonproductive.push(k);
        }
        sums.record(branch, gamma, dual);
        step_sizes.push(gamma);
        direction_norms.push(dual);
        branches.push(branch);

        let next = geom.prox_step(&x, &direction, gamma)?;
        let values = stopping_rule_lhs_rhs(&sums, &constants);
        rule = Some(values);
        let estimate = weighted.mean();
        if should_record(k, stride, n_iters) || values.met {
            metrics.push(IterationMetrics {
                k,
                branch,
                gamma,
                residual: residual
                    .as_ref()
                    .zip(estimate.as_ref())
                    .map(|(r, e)| r.ratio(instance, e)),
                bound_rhs: sums.theorem2_rhs(&constants, instance.delta()),
            });
        }
        observer.on_iteration(&IterationEvent {
            k,
            point: &x,
            gamma,
            branch,
            estimate: estimate.as_deref(),
        });
        x = next;
        if let Some(log) = iterates.as_mut() {
            log.push(x.clone());
        }
        if values.met {
            stop_reason = StopReason::StoppingRuleMet;
            break;
        }
    }

    if productive.is_empty() {
        return Err(Error::NoProductiveSteps {
            iterations: step_sizes.len(),
        });
    }
    let output = WeightedOutputs {
        weighted: weighted.mean().expect("I is non-empty"),
        uniform: uniform.mean().expect("I is non-empty"),
        step_weighted: step_weighted.mean().expect("I is non-empty"),
    };
    Ok(RunResult {
        solver: SolverKind::SwitchingMirrorDescent,
        iterates,
        output,
        last_point: x,
        theorem_hypotheses_met: non_increasing(&step_sizes),
        step_sizes,
        direction_norms,
        branches,
        productive,
        nonproductive,
        stop_reason,
        metrics,
        stopping_rule: rule,
    })
}

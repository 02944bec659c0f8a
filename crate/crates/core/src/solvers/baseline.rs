use super::{
    check_problem, evaluate_checked, should_record, Branch, IterationEvent, IterationMetrics, IterationObserver,
    NoopObserver, RunResult, SolverConfig, SolverKind, StopReason, WeightedOutputs, ITERATE_LOG_LIMIT,
};
use crate::error::{Error, Result};
use crate::geometry::{ProxFunction, ProxGeometry};
use crate::metrics::ResidualReference;
use crate::problems::VIInstance;

/// Extragradient with constant step `lambda`:
///
/// ```text
/// y^k     = Proj_Q(x^k - lambda F(x^k))
/// x^(k+1) = Proj_Q(x^k - lambda F(y^k))
/// ```
///
/// Metrics row `k` reports the residual at `x^(k+1)`. Only `m`-independent
/// fields of the config are used.
pub fn extragradient_run(
    instance: &VIInstance,
    geom: &ProxGeometry,
    config: &SolverConfig,
    lambda: f64,
) -> Result<RunResult> {
    extragradient_run_observed(instance, geom, config, lambda, &mut NoopObserver)
}

pub fn extragradient_run_observed(
    instance: &VIInstance,
    geom: &ProxGeometry,
    config: &SolverConfig,
    lambda: f64,
    observer: &mut dyn IterationObserver,
) -> Result<RunResult> {
    if geom.psi() != ProxFunction::HalfSquaredEuclidean {
        return Err(Error::config("the extragradient baseline needs the Euclidean geometry"));
    }
    check_problem(instance, geom, config)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {lambda}")));
    }
    let n_iters = config.iterations;
    let norm = geom.norm();
    let stride = super::metric_stride(n_iters);
    let residual = ResidualReference::new(instance, &config.x1).ok();

    let mut x = config.x1.clone();
    let mut iterates = (n_iters <= ITERATE_LOG_LIMIT).then(|| vec![x.clone()]);
    let mut direction_norms = Vec::with_capacity(n_iters);
    let mut metrics = Vec::new();

    for k in 1..=n_iters {
        let fx = evaluate_checked(instance, &x, k)?;
        let y = geom.prox_step(&x, &fx, lambda)?;
        let fy = evaluate_checked(instance, &y, k)?;
        let next = geom.prox_step(&x, &fy, lambda)?;
        direction_norms.push(norm.dual_norm(&fy));
        if should_record(k, stride, n_iters) {
            metrics.push(IterationMetrics {
                k,
                branch: Branch::Unconstrained,
                gamma: lambda,
                residual: residual.as_ref().map(|r| r.ratio(instance, &next)),
                bound_rhs: None,
            });
        }
        observer.on_iteration(&IterationEvent {
            k,
            point: &x,
            gamma: lambda,
            branch: Branch::Unconstrained,
            estimate: Some(&next),
        });
        x = next;
        if let Some(log) = iterates.as_mut() {
            log.push(x.clone());
        }
    }

    Ok(RunResult {
        solver: SolverKind::Extragradient,
        iterates,
        output: WeightedOutputs::all(x.clone()),
        last_point: x,
        step_sizes: vec![lambda; n_iters],
        direction_norms,
        branches: vec![Branch::Unconstrained; n_iters],
        productive: (1..=n_iters).collect(),
        nonproductive: Vec::new(),
        stop_reason: StopReason::BudgetExhausted,
        metrics,
        // The a-priori weighted bound does not cover this method.
        theorem_hypotheses_met: false,
        stopping_rule: None,
    })
}

/// Step used by the modified-projection stand-in: `1 / (sqrt 2 L_F)`.
pub fn mpm_step(instance: &VIInstance) -> f64 {
    1.0 / (std::f64::consts::SQRT_2 * instance.bound())
}

/// Modified-projection baseline: [`extragradient_run`] with `lambda = 1 / (sqrt 2 L_F)`.
pub fn mpm_baseline_run(instance: &VIInstance, geom: &ProxGeometry, config: &SolverConfig) -> Result<RunResult> {
    mpm_baseline_run_observed(instance, geom, config, &mut NoopObserver)
}

pub fn mpm_baseline_run_observed(
    instance: &VIInstance,
    geom: &ProxGeometry,
    config: &SolverConfig,
    observer: &mut dyn IterationObserver,
) -> Result<RunResult> {
    extragradient_run_observed(instance, geom, config, mpm_step(instance), observer)
}

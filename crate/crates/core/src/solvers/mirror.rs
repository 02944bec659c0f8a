use super::steps::{step_adaptive, step_nonadaptive, BoundSums, WeightedAverager};
use super::{
    check_problem, evaluate_checked, should_record, Branch, IterationEvent, IterationMetrics, IterationObserver,
    NoopObserver, RunResult, Schedule, SolverConfig, SolverKind, StopReason, WeightedOutputs, ITERATE_LOG_LIMIT,
};
use crate::error::{Error, Result};
use crate::geometry::ProxGeometry;
use crate::metrics::ResidualReference;
use crate::problems::VIInstance;

/// Weighted mirror descent: `x^(k+1) = argmin_Q <x, F(x^k)> + V(x, x^k) / gamma_k`.
pub fn algorithm1_run(instance: &VIInstance, geom: &ProxGeometry, config: &SolverConfig) -> Result<RunResult> {
    algorithm1_run_observed(instance, geom, config, &mut NoopObserver)
}

pub fn algorithm1_run_observed(
    instance: &VIInstance,
    geom: &ProxGeometry,
    config: &SolverConfig,
    observer: &mut dyn IterationObserver,
) -> Result<RunResult> {
    check_problem(instance, geom, config)?;
    if config.schedule == Schedule::ConstraintSplit {
        return Err(Error::config(
            "the constraint-split schedule applies only to the switching method",
        ));
    }
    let n_iters = config.iterations;
    let dim = instance.dimension();
    let sigma = geom.sigma();
    let norm = geom.norm();
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
    let mut metrics = Vec::new();
    let mut stop_reason = StopReason::BudgetExhausted;

    for k in 1..=n_iters {
        let fx = evaluate_checked(instance, &x, k)?;
        let dual = norm.dual_norm(&fx);
        let gamma = match config.schedule {
            Schedule::Adaptive => match step_adaptive(k, sigma, dual) {
                Ok(g) => g,
                Err(Error::ZeroOperatorValue { .. }) => {
                    stop_reason = StopReason::ZeroOperatorValue;
                    break;
                }
                Err(e) => return Err(e),
            },
            _ => step_nonadaptive(k, sigma, instance.bound())?,
        };
        weighted.push(&x, gamma);
        uniform.push(&x, gamma);
        step_weighted.push(&x, gamma);
        sums.record(Branch::Unconstrained, gamma, dual);
        step_sizes.push(gamma);
        direction_norms.push(dual);

        let next = geom.prox_step(&x, &fx, gamma)?;
        let estimate = weighted.mean().expect("at least one point");
        if should_record(k, stride, n_iters) {
            metrics.push(IterationMetrics {
                k,
                branch: Branch::Unconstrained,
                gamma,
                residual: residual.as_ref().map(|r| r.ratio(instance, &estimate)),
                bound_rhs: sums.theorem1_rhs(config.radius, sigma, instance.delta()),
            });
        }
        observer.on_iteration(&IterationEvent {
            k,
            point: &x,
            gamma,
            branch: Branch::Unconstrained,
            estimate: Some(&estimate),
        });
        x = next;
        if let Some(log) = iterates.as_mut() {
            log.push(x.clone());
        }
    }

    let output = if stop_reason == StopReason::ZeroOperatorValue {
        WeightedOutputs::all(x.clone())
    } else {
        WeightedOutputs {
            weighted: weighted.mean().expect("budget >= 1"),
            uniform: uniform.mean().expect("budget >= 1"),
            step_weighted: step_weighted.mean().expect("budget >= 1"),
        }
    };
    let executed = step_sizes.len();
    Ok(RunResult {
        solver: SolverKind::MirrorDescent,
        iterates,
        output,
        last_point: x,
        theorem_hypotheses_met: config.schedule == Schedule::NonAdaptive,
        step_sizes,
        direction_norms,
        branches: vec![Branch::Unconstrained; executed],
        productive: (1..=executed).collect(),
        nonproductive: Vec::new(),
        stop_reason,
        metrics,
        stopping_rule: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FeasibleSet, MEMBERSHIP_TOL};
    use crate::problems::{fixedpoint_adapter, HpHardProblem};

    fn identity_1d() -> (VIInstance, ProxGeometry) {
        let set = FeasibleSet::boxed(vec![-1.0], vec![1.0]).unwrap();
        let inst = VIInstance::new("identity", set.clone(), 1.0, |x| x.to_vec()).unwrap();
        (inst, ProxGeometry::euclidean(set).unwrap())
    }

    #[test]
    fn zero_operator_keeps_iterates_fixed() {
        let set = FeasibleSet::unit_ball(2).unwrap();
        let inst = fixedpoint_adapter(|x| x.to_vec(), set.clone(), 1.0).unwrap();
        let geom = ProxGeometry::euclidean(set).unwrap();
        let cfg = SolverConfig::new(&geom, vec![0.3, -0.2], 25).with_m(1.0);
        let run = algorithm1_run(&inst, &geom, &cfg).unwrap();
        assert!(run.iterates.unwrap().iter().all(|x| x == &cfg.x1));
        assert_eq!(run.output.weighted, cfg.x1);
        // Residual is undefined when F(x1) = 0.
        assert!(run.metrics.iter().all(|r| r.residual.is_none()));
    }

    #[test]
    fn zero_operator_stops_adaptive_run() {
        let set = FeasibleSet::unit_ball(2).unwrap();
        let inst = fixedpoint_adapter(|x| x.to_vec(), set.clone(), 1.0).unwrap();
        let geom = ProxGeometry::euclidean(set).unwrap();
        let cfg = SolverConfig::new(&geom, vec![0.3, -0.2], 25).with_schedule(Schedule::Adaptive);
        let run = algorithm1_run(&inst, &geom, &cfg).unwrap();
        assert_eq!(run.stop_reason, StopReason::ZeroOperatorValue);
        assert_eq!(run.iterations(), 0);
        assert_eq!(run.output.uniform, cfg.x1);
        assert!(!run.theorem_hypotheses_met);
    }

    // Scalar oracle: x_(k+1) = clamp((1 - gamma_k) x_k, -1, 1), gamma_k = sqrt 2 / sqrt k.
    fn scalar_oracle(x1: f64, n: usize, m: f64) -> f64 {
        let mut x = x1;
        let (mut num, mut den) = (0.0, 0.0);
        for k in 1..=n {
            let g = 2f64.sqrt() / (k as f64).sqrt();
            let w = g.powf(-m);
            num += w * x;
            den += w;
            x = ((1.0 - g) * x).clamp(-1.0, 1.0);
        }
        num / den
    }

    #[test]
    fn one_dimensional_identity_matches_scalar_oracle() {
        let (inst, geom) = identity_1d();
        for m in [-1.0, 0.0, 1.0, 5.0] {
            let mut prev = f64::INFINITY;
            for n in [5, 10, 20, 50] {
                let cfg = SolverConfig::new(&geom, vec![0.8], n).with_m(m);
                let run = algorithm1_run(&inst, &geom, &cfg).unwrap();
                let want = scalar_oracle(0.8, n, m);
                assert!((run.output.weighted[0] - want).abs() < 1e-12, "m={m} n={n}");
                if n >= 10 {
                    assert!(run.output.weighted[0].abs() < prev, "m={m} n={n}");
                }
                prev = run.output.weighted[0].abs();
            }
            assert!(prev < 0.8);
        }
    }

    #[test]
    fn identity_matrix_residual_decreases() {
        let p = HpHardProblem::from_matrix(vec![1.0, 0.0, 0.0, 1.0], vec![0.0; 2], 0).unwrap();
        let inst = p.to_instance().unwrap();
        let geom = ProxGeometry::euclidean(inst.set().clone()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let res = |n| {
            let cfg = SolverConfig::new(&geom, vec![h, h], n).with_m(1.0);
            let run = algorithm1_run(&inst, &geom, &cfg).unwrap();
            crate::linalg::dot(&run.output.weighted, &run.output.weighted)
        };
        assert!(res(200) < res(10));
    }

    #[test]
    fn iterates_stay_feasible_and_runs_are_deterministic() {
        let inst = crate::problems::example1_2d();
        let geom = ProxGeometry::euclidean(inst.set().clone()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let cfg = SolverConfig::new(&geom, vec![h, h], 300).with_m(5.0);
        let a = algorithm1_run(&inst, &geom, &cfg).unwrap();
        let b = algorithm1_run(&inst, &geom, &cfg).unwrap();
        assert!(a
            .iterates
            .as_ref()
            .unwrap()
            .iter()
            .all(|x| geom.set().contains(x, MEMBERSHIP_TOL)));
        assert_eq!(a.iterates.as_ref().unwrap().len(), 301);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.step_sizes.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(a.metrics.len(), 300);
    }

    #[test]
    fn observer_sees_every_iteration() {
        let (inst, geom) = identity_1d();
        let cfg = SolverConfig::new(&geom, vec![0.5], 12);
        let mut seen = Vec::new();
        let mut obs = |e: &IterationEvent<'_>| seen.push((e.k, e.branch, e.gamma));
        let run = algorithm1_run_observed(&inst, &geom, &cfg, &mut obs).unwrap();
        assert_eq!(seen.len(), 12);
        assert!(seen
            .iter()
            .zip(&run.step_sizes)
            .all(|((_, b, g), s)| *b == Branch::Unconstrained && g == s));
    }

    #[test]
    fn rejects_mismatched_set_and_schedule() {
        let (inst, _) = identity_1d();
        let other = ProxGeometry::euclidean(FeasibleSet::boxed(vec![-2.0], vec![2.0]).unwrap()).unwrap();
        let cfg = SolverConfig::new(&other, vec![0.5], 5);
        assert!(matches!(algorithm1_run(&inst, &other, &cfg), Err(Error::Config(_))));
        let (inst, geom) = identity_1d();
        let cfg = SolverConfig::new(&geom, vec![0.5], 5).with_schedule(Schedule::ConstraintSplit);
        assert!(matches!(algorithm1_run(&inst, &geom, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn entropy_geometry_runs_on_simplex() {
        let set = FeasibleSet::simplex(3).unwrap();
        // F(x) = x - c with c in the simplex is monotone; its solution is c.
        let c = [0.2, 0.3, 0.5];
        let inst = VIInstance::new("shifted", set, 2.0, move |x| crate::linalg::sub(x, &c)).unwrap();
        let geom = ProxGeometry::entropic_simplex(3).unwrap();
        let cfg = SolverConfig::new(&geom, vec![1.0 / 3.0; 3], 2000).with_m(1.0);
        let run = algorithm1_run(&inst, &geom, &cfg).unwrap();
        assert!(geom.set().contains(&run.output.weighted, MEMBERSHIP_TOL));
        let err = crate::linalg::norm1(&crate::linalg::sub(&run.output.weighted, &c));
        assert!(err < 0.05, "{:?}", run.output.weighted);
    }
}

use proptest::prelude::*;
use vi_mirror::experiment::initial_point;
use vi_mirror::metrics::{gap_sampled, rate_slope, residual_metric};
use vi_mirror::problems::{ball_constraint_stack, example1_2d, example2_3d, hphard_generate};
use vi_mirror::solvers::{algorithm1_run, algorithm2_run};
use vi_mirror::{ProxGeometry, Schedule, SolverConfig, VIInstance};

const TOL: f64 = 1e-9;

fn instance(which: u8, seed: u64) -> VIInstance {
    match which {
        0 => example1_2d(),
        1 => example2_3d(1.0, 1.0, 1.0).unwrap(),
        _ => hphard_generate(6, seed, vec![0.0; 6]).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mirror_descent_invariants(which in 0u8..3, seed in 0u64..50, m in -1.0f64..6.0, n in 1usize..300) {
        let inst = instance(which, seed);
        let geom = ProxGeometry::euclidean(inst.set().clone()).unwrap();
        let x1 = initial_point(inst.dimension());
        let cfg = SolverConfig::new(&geom, x1.clone(), n).with_m(m);
        let run = algorithm1_run(&inst, &geom, &cfg).unwrap();

        for x in run.iterates.as_ref().unwrap() {
            prop_assert!(inst.set().contains(x, TOL));
        }
        prop_assert!(run.step_sizes.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(run.theorem_hypotheses_met);

        let bound = run.metrics.last().unwrap().bound_rhs.unwrap();
        let gap = gap_sampled(&run.output.weighted, &inst, &x1, 500, seed).unwrap();
        prop_assert!(gap.value <= bound + 1e-9, "gap {} bound {}", gap.value, bound);

        let again = algorithm1_run(&inst, &geom, &cfg).unwrap();
        prop_assert_eq!(
            serde_json::to_string(&run).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
    }

    #[test]
    fn switching_invariants(radius in 0.2f64..0.9, eps in 1e-3f64..0.5, m in -1.0f64..4.0, n in 1usize..400) {
        let inst = example1_2d();
        let geom = ProxGeometry::euclidean(inst.set().clone()).unwrap();
        let stack = ball_constraint_stack(&[radius], &[vec![0.0, 0.0]]).unwrap();
        let cfg = SolverConfig::new(&geom, initial_point(2), n)
            .with_m(m)
            .with_epsilon(eps)
            .with_schedule(Schedule::ConstraintSplit);
        let Ok(run) = algorithm2_run(&inst, &stack, &geom, &cfg) else {
            // Only an empty productive set may fail, and only for short runs
            // that never reach the constraint region.
            prop_assert!(stack.value(&cfg.x1).unwrap() > eps);
            return Ok(());
        };
        let executed = run.iterations();
        let mut all: Vec<usize> = run.productive.iter().chain(&run.nonproductive).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (1..=executed).collect::<Vec<_>>());

        let iterates = run.iterates.as_ref().unwrap();
        for x in iterates {
            prop_assert!(inst.set().contains(x, TOL));
        }
        for &k in &run.productive {
            prop_assert!(stack.value(&iterates[k - 1]).unwrap() <= eps);
        }
        prop_assert!(stack.value(&run.output.weighted).unwrap() <= eps + 1e-12);
    }

    #[test]
    fn residual_at_start_is_one(which in 0u8..3, seed in 0u64..50) {
        let inst = instance(which, seed);
        let x1 = initial_point(inst.dimension());
        prop_assert_eq!(residual_metric(&x1, &inst, &x1).unwrap(), 1.0);
    }

    #[test]
    fn gap_estimate_is_reproducible(which in 0u8..3, seed in 0u64..1000) {
        let inst = instance(which, 3);
        let x1 = initial_point(inst.dimension());
        let xhat: Vec<f64> = x1.iter().map(|v| 0.5 * v).collect();
        let a = gap_sampled(&xhat, &inst, &x1, 200, seed).unwrap();
        let b = gap_sampled(&xhat, &inst, &x1, 200, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn slope_recovers_power_laws(exponent in -3.0f64..1.0, scale in 1e-3f64..1e3) {
        let ns = [10usize, 31, 100, 316, 1000, 3162];
        let gaps: Vec<f64> = ns.iter().map(|&n| scale * (n as f64).powf(exponent)).collect();
        prop_assert!((rate_slope(&ns, &gaps).unwrap() - exponent).abs() <= 1e-10);
    }
}

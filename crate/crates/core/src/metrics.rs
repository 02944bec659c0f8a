//! Gap estimation, the residual ratio, a-priori bound evaluation and
//! convergence-slope fitting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MEMBERSHIP_TOL;
use crate::linalg;
use crate::problems::VIInstance;
use crate::solvers::{BoundSums, Branch};

/// Sampled lower bound on `Gap(x_hat) = max_{u in Q} <F(u), x_hat - u>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub value: f64,
    /// Number of uniform samples (deterministic candidates not included).
    pub samples: usize,
    pub seed: u64,
    /// Candidate attaining `value`.
    pub maximizer: Vec<f64>,
}

/// `<F(u), x_hat - u>`.
pub fn gap_term(instance: &VIInstance, xhat: &[f64], u: &[f64]) -> f64 {
    linalg::dot(&instance.evaluate(u), &linalg::sub(xhat, u))
}

fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Maximum of [`gap_term`] over deterministic candidates and `n_samples`
/// uniform points of `Q`.
///
/// Candidates are `x_hat`, `x1`, the known solution if any, the midpoints of
/// `x_hat` with `x1` and with the known solution, and the axis points on the
/// boundary of `Q`. Uniform samples come from `ChaCha8Rng::seed_from_u64(seed)`,
/// so raising `n_samples` only appends candidates and never lowers the value.
pub fn gap_sampled(
    xhat: &[f64],
    instance: &VIInstance,
    x1: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<GapEstimate> {
    let set = instance.set();
    if xhat.len() != instance.dimension() || !set.contains(xhat, MEMBERSHIP_TOL) {
        return Err(Error::invalid(
            "gap estimate requested for a point outside the feasible set",
        ));
    }
    if x1.len() != instance.dimension() || !set.contains(x1, MEMBERSHIP_TOL) {
        return Err(Error::invalid("initial point lies outside the feasible set"));
    }
    let mut candidates = vec![xhat.to_vec(), x1.to_vec(), midpoint(xhat, x1)];
    if let Some(star) = instance.known_solution() {
        candidates.push(star.to_vec());
        candidates.push(midpoint(xhat, star));
    }
    candidates.extend(set.axis_boundary_points());

    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut consider = |u: Vec<f64>| {
        let v = gap_term(instance, xhat, &u);
        if v > best.0 {
            best = (v, u);
        }
    };
    candidates.into_iter().for_each(&mut consider);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        consider(set.sample_uniform(&mut rng));
    }
    if !best.0.is_finite() {
        return Err(Error::invalid("operator produced a non-finite gap term"));
    }
    Ok(GapEstimate {
        value: best.0,
        samples: n_samples,
        seed,
        maximizer: best.1,
    })
}

/// Cached `||F(x^1)||_2^2` for repeated residual evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualReference {
    initial: f64,
}

impl ResidualReference {
    /// Fails when `F(x1) = 0`, where the ratio is undefined.
    pub fn new(instance: &VIInstance, x1: &[f64]) -> Result<Self> {
        let f1 = instance.evaluate(x1);
        let initial = linalg::dot(&f1, &f1);
        if !(initial.is_finite() && initial > 0.0) {
            return Err(Error::invalid("||F(x1)|| is zero, so the residual ratio is undefined"));
        }
        Ok(ResidualReference { initial })
    }

    /// `||F(x)||_2^2 / ||F(x^1)||_2^2`.
    pub fn ratio(&self, instance: &VIInstance, x: &[f64]) -> f64 {
        let f = instance.evaluate(x);
        linalg::dot(&f, &f) / self.initial
    }
}

/// `||F(x_hat)||_2^2 / ||F(x1)||_2^2`.
pub fn residual_metric(xhat: &[f64], instance: &VIInstance, x1: &[f64]) -> Result<f64> {
    Ok(ResidualReference::new(instance, x1)?.ratio(instance, xhat))
}

/// A-priori gap bound of weighted mirror descent,
///
/// ```text
/// (R / gamma_N^(m+1) + (1 / 2 sigma) sum_k ||F(x^k)||_*^2 gamma_k^(1-m)) / sum_k gamma_k^(-m) + delta,
/// ```
///
/// evaluated with a shared log-scale so that large `m` does not overflow.
pub fn theorem1_rhs(
    step_sizes: &[f64],
    dual_norms: &[f64],
    radius: f64,
    sigma: f64,
    m: f64,
    delta: f64,
) -> Result<f64> {
    if step_sizes.is_empty() || step_sizes.len() != dual_norms.len() {
        return Err(Error::invalid("need equal-length, non-empty step and norm lists"));
    }
    if step_sizes.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::invalid("step sizes must be positive and finite"));
    }
    let mut sums = BoundSums::new(m);
    for (&g, &f) in step_sizes.iter().zip(dual_norms) {
        sums.record(Branch::Unconstrained, g, f);
    }
    Ok(sums.theorem1_rhs(radius, sigma, delta).expect("non-empty"))
}

/// Least-squares slope of `ln gap` against `ln N`.
pub fn rate_slope(ns: &[usize], gaps: &[f64]) -> Result<f64> {
    if ns.len() < 4 || ns.len() != gaps.len() {
        return Err(Error::invalid(format!(
            "need at least 4 matching points, got {} Ns and {} gaps",
            ns.len(),
            gaps.len()
        )));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) || ns[0] == 0 {
        return Err(Error::invalid(
            "iteration counts must be positive and strictly increasing",
        ));
    }
    if let Some(g) = gaps.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::invalid(format!("gaps must be positive, got {g}")));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}

/// Roughly `per_decade` log-spaced iteration counts in `1..=max`, always
/// ending at `max`.
pub fn log_spaced_checkpoints(max: usize, per_decade: usize) -> Vec<usize> {
    if max == 0 {
        return Vec::new();
    }
    let per_decade = per_decade.max(1) as f64;
    let steps = ((max as f64).log10() * per_decade).ceil() as usize;
    let mut out: Vec<usize> = (0..=steps)
        .map(|i| (10f64.powf(i as f64 / per_decade).round() as usize).min(max))
        .collect();
    out.push(max);
    out.dedup();
    out
}

use serde::{Deserialize, Serialize};

use super::Branch;
use crate::error::{Error, Result};

/// Dual norms at or below this are treated as `F(x^k) = 0` by the adaptive rule.
pub const ZERO_OPERATOR_FLOOR: f64 = 1e-12;

// Running sums are rescaled once a new log-weight exceeds the shared scale
// by this much, which keeps every stored term below e^64.
const RESCALE_MARGIN: f64 = 64.0;

/// `gamma_k = sqrt(2 sigma) / (L sqrt k)`.
pub fn step_nonadaptive(k: usize, sigma: f64, l: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("iteration index must be >= 1"));
    }
    if !(sigma.is_finite() && sigma > 0.0) || !(l.is_finite() && l > 0.0) {
        return Err(Error::invalid(format!(
            "step rule needs positive sigma and L, got sigma={sigma}, L={l}"
        )));
    }
    Ok((2.0 * sigma).sqrt() / (l * (k as f64).sqrt()))
}

/// `gamma_k = sqrt(2 sigma) / (||F(x^k)||_* sqrt k)`.
///
/// Returns [`Error::ZeroOperatorValue`] when the dual norm is at or below
/// [`ZERO_OPERATOR_FLOOR`].
pub fn step_adaptive(k: usize, sigma: f64, dual_norm: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("iteration index must be >= 1"));
    }
    if !(sigma.is_finite() && sigma > 0.0) || dual_norm.is_nan() {
        return Err(Error::invalid(format!(
            "adaptive step needs positive sigma and a finite norm, got sigma={sigma}, norm={dual_norm}"
        )));
    }
    if dual_norm <= ZERO_OPERATOR_FLOOR {
        return Err(Error::ZeroOperatorValue { k });
    }
    Ok((2.0 * sigma).sqrt() / (dual_norm * (k as f64).sqrt()))
}

fn check_gamma(gamma: f64) {
    assert!(
        gamma.is_finite() && gamma > 0.0,
        "step size must be positive and finite, got {gamma}"
    );
}

/// `sum_k gamma_k^(-m) x^k / sum_k gamma_k^(-m)`, with weights divided by
/// the largest one before summation.
pub fn weighted_average(points: &[Vec<f64>], gammas: &[f64], m: f64) -> Result<Vec<f64>> {
    if points.is_empty() || points.len() != gammas.len() {
        return Err(Error::invalid(format!(
            "need equal-length, non-empty lists ({} points, {} steps)",
            points.len(),
            gammas.len()
        )));
    }
    if gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::invalid("step sizes must be positive and finite"));
    }
    let n = points[0].len();
    if points.iter().any(|p| p.len() != n) {
        return Err(Error::invalid("points have differing dimensions"));
    }
    let log_w: Vec<f64> = gammas.iter().map(|g| -m * g.ln()).collect();
    let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut acc = vec![0.0; n];
    for (p, lw) in points.iter().zip(&log_w) {
        let w = (lw - top).exp();
        total += w;
        for (a, x) in acc.iter_mut().zip(p) {
            *a += w * x;
        }
    }
    Ok(acc.into_iter().map(|a| a / total).collect())
}

/// Streaming form of [`weighted_average`].
#[derive(Clone, Debug)]
pub struct WeightedAverager {
    m: f64,
    log_scale: f64,
    weight: f64,
    sum: Vec<f64>,
    count: usize,
}

impl WeightedAverager {
    pub fn new(m: f64, dimension: usize) -> Self {
        WeightedAverager {
            m,
            log_scale: 0.0,
            weight: 0.0,
            sum: vec![0.0; dimension],
            count: 0,
        }
    }

    pub fn push(&mut self, x: &[f64], gamma: f64) {
        check_gamma(gamma);
        let lw = -self.m * gamma.ln();
        if self.count == 0 {
            self.log_scale = lw;
        } else if lw > self.log_scale + RESCALE_MARGIN {
            let f = (self.log_scale - lw).exp();
            self.weight *= f;
            self.sum.iter_mut().for_each(|s| *s *= f);
            self.log_scale = lw;
        }
        let w = (lw - self.log_scale).exp();
        self.weight += w;
        for (s, xi) in self.sum.iter_mut().zip(x) {
            *s += w * xi;
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Option<Vec<f64>> {
        (self.count > 0).then(|| self.sum.iter().map(|s| s / self.weight).collect())
    }
}

/// Constants entering the switching stopping rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingRuleConstants {
    /// `R`.
    pub radius: f64,
    pub sigma: f64,
    /// `M_g`.
    pub lipschitz: f64,
    /// `D`.
    pub diameter: f64,
    pub epsilon: f64,
}

/// Both sides of the stopping rule, divided by `exp(log_scale)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingRuleValues {
    pub lhs: f64,
    pub rhs: f64,
    pub log_scale: f64,
    pub met: bool,
}

impl StoppingRuleValues {
    /// `(lhs, rhs)` on the original scale; may overflow for extreme weights.
    pub fn absolute(&self) -> (f64, f64) {
        let s = self.log_scale.exp();
        (self.lhs * s, self.rhs * s)
    }
}

/// Step-weighted sums behind the a-priori gap bounds and the stopping rule,
/// with weights `w_k = gamma_k^(-m)`:
///
/// ```text
/// W_I = sum_I w_k,   E_I = sum_I ||F(x^k)||_*^2 gamma_k w_k,
/// W_J = sum_J w_k,   E_J = sum_J ||grad g(x^k)||_*^2 gamma_k w_k.
/// ```
///
/// Unconstrained steps count as productive. All sums share the scale
/// `exp(log_scale)`, so each update is O(1).
#[derive(Clone, Debug)]
pub struct BoundSums {
    m: f64,
    log_scale: f64,
    productive_weight: f64,
    productive_energy: f64,
    nonproductive_weight: f64,
    nonproductive_energy: f64,
    last_gamma: f64,
    last_log_weight: f64,
    count: usize,
}

impl BoundSums {
    pub fn new(m: f64) -> Self {
        BoundSums {
            m,
            log_scale: 0.0,
            productive_weight: 0.0,
            productive_energy: 0.0,
            nonproductive_weight: 0.0,
            nonproductive_energy: 0.0,
            last_gamma: f64::NAN,
            last_log_weight: f64::NAN,
            count: 0,
        }
    }

    pub fn record(&mut self, branch: Branch, gamma: f64, dual_norm: f64) {
        check_gamma(gamma);
        let lw = -self.m * gamma.ln();
        if self.count == 0 {
            self.log_scale = lw;
        } else if lw > self.log_scale + RESCALE_MARGIN {
            let f = (self.log_scale - lw).exp();
            self.productive_weight *= f;
            self.productive_energy *= f;
            self.nonproductive_weight *= f;
            self.nonproductive_energy *= f;
            self.log_scale = lw;
        }
        let w = (lw - self.log_scale).exp();
        let e = dual_norm * dual_norm * gamma * w;
        match branch {
            Branch::Productive | Branch::Unconstrained => {
                self.productive_weight += w;
                self.productive_energy += e;
            }
            Branch::NonProductive => {
                self.nonproductive_weight += w;
                self.nonproductive_energy += e;
            }
        }
        self.last_gamma = gamma;
        self.last_log_weight = lw;
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Scaled `(W_I, E_I, W_J, E_J)`.
    pub fn scaled_sums(&self) -> (f64, f64, f64, f64) {
        (
            self.productive_weight,
            self.productive_energy,
            self.nonproductive_weight,
            self.nonproductive_energy,
        )
    }

    // Scaled R / gamma_k^(m+1).
    fn radius_term(&self, radius: f64) -> f64 {
        radius * (self.last_log_weight - self.log_scale).exp() / self.last_gamma
    }

    /// `(R / gamma_N^(m+1) + E / (2 sigma)) / W + delta`; `None` before the first step.
    pub fn theorem1_rhs(&self, radius: f64, sigma: f64, delta: f64) -> Option<f64> {
        if self.productive_weight <= 0.0 {
            return None;
        }
        let num = self.radius_term(radius) + self.productive_energy / (2.0 * sigma);
        Some(num / self.productive_weight + delta)
    }

    /// Gap bound of the switching method; `None` while `I` is empty.
    pub fn theorem2_rhs(&self, c: &StoppingRuleConstants, delta: f64) -> Option<f64> {
        if self.productive_weight <= 0.0 {
            return None;
        }
        let num = self.radius_term(c.radius) + (self.productive_energy + self.nonproductive_energy) / (2.0 * c.sigma)
            - (c.epsilon - c.lipschitz * c.diameter) * self.nonproductive_weight;
        Some(num / self.productive_weight + delta)
    }

    /// Evaluates the stopping rule at the current iteration.
    pub fn stopping_rule(&self, c: &StoppingRuleConstants) -> StoppingRuleValues {
        let md = c.lipschitz * c.diameter;
        let lhs = md * self.productive_weight;
        if self.count == 0 {
            return StoppingRuleValues {
                lhs: 0.0,
                rhs: f64::INFINITY,
                log_scale: 0.0,
                met: false,
            };
        }
        let rhs = self.radius_term(c.radius)
            + (self.productive_energy + self.nonproductive_energy) / (2.0 * c.sigma)
            + (md - c.epsilon) * (self.productive_weight + self.nonproductive_weight);
        StoppingRuleValues {
            lhs,
            rhs,
            log_scale: self.log_scale,
            met: self.productive_weight > 0.0 && lhs >= rhs,
        }
    }
}

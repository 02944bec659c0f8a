//! Operator library: test problems, reduction adapters and constraint stacks.

mod constraints;
mod hphard;

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::linalg;

pub use constraints::{ball_constraint_stack, Constraint, ConstraintStack};
pub use hphard::{hphard_generate, random_affine_term, spectral_norm, HpHardFactors, HpHardProblem};

/// Vector field `x -> F(x)`.
pub type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// Scalar field `x -> g(x)`.
pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// An operator `F` over a feasible set `Q`, with a declared bound
/// `||F(x)||_* <= L_F` on `Q` and monotonicity defect `delta`.
#[derive(Clone)]
pub struct VIInstance {
    name: String,
    operator: VectorField,
    dimension: usize,
    bound: f64,
    delta: f64,
    set: FeasibleSet,
    known_solution: Option<Vec<f64>>,
}

impl fmt::Debug for VIInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VIInstance")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("bound", &self.bound)
            .field("delta", &self.delta)
            .field("set", &self.set)
            .field("known_solution", &self.known_solution)
            .finish_non_exhaustive()
    }
}

impl VIInstance {
    pub fn new<F>(name: impl Into<String>, set: FeasibleSet, bound: f64, operator: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::invalid(format!(
                "operator bound L_F must be positive, got {bound}"
            )));
        }
        Ok(VIInstance {
            name: name.into(),
            operator: Arc::new(operator),
            dimension: set.dimension(),
            bound,
            delta: 0.0,
            set,
            known_solution: None,
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::invalid(format!("delta must be non-negative, got {delta}")));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn with_known_solution(mut self, solution: Vec<f64>) -> Result<Self> {
        if !self.set.contains(&solution, crate::geometry::MEMBERSHIP_TOL) {
            return Err(Error::invalid("known solution lies outside the feasible set"));
        }
        self.known_solution = Some(solution);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Declared `L_F`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn known_solution(&self) -> Option<&[f64]> {
        self.known_solution.as_deref()
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dimension);
        (self.operator)(x)
    }

    /// Largest `||F(x)||_* - L_F` over `samples` uniform points of `Q`.
    /// Non-positive when the declared bound holds on the sample.
    pub fn sampled_bound_excess(&self, samples: usize, seed: u64) -> f64 {
        let norm = self.set.natural_norm();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| {
                let x = self.set.sample_uniform(&mut rng);
                norm.dual_norm(&self.evaluate(&x)) - self.bound
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `-<F(y) - F(x), y - x> - delta` over `pairs` uniform pairs.
    /// Non-positive when the operator is `delta`-monotone on the sample.
    pub fn sampled_monotonicity_excess(&self, pairs: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..pairs)
            .map(|_| {
                let x = self.set.sample_uniform(&mut rng);
                let y = self.set.sample_uniform(&mut rng);
                let df = linalg::sub(&self.evaluate(&y), &self.evaluate(&x));
                -linalg::dot(&df, &linalg::sub(&y, &x)) - self.delta
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `F(x1, x2) = (2 x1 + 2 x2 + sin x1, -2 x1 + 2 x2 + sin x2)` on the unit disc.
///
/// `L_F = 3 sqrt 2`: the linear part has spectral norm `2 sqrt 2` and the
/// sine part is bounded by `sqrt 2` in norm.
pub fn example1_2d() -> VIInstance {
    let l_f = 3.0 * std::f64::consts::SQRT_2;
    VIInstance::new("example1", FeasibleSet::unit_ball(2).expect("n > 0"), l_f, |x| {
        vec![
            2.0 * x[0] + 2.0 * x[1] + x[0].sin(),
            -2.0 * x[0] + 2.0 * x[1] + x[1].sin(),
        ]
    })
    .expect("positive bound")
    .with_known_solution(vec![0.0, 0.0])
    .expect("origin is feasible")
}

/// Three-dimensional operator `F(x) = (I + S) x + sin(x)` on the unit ball,
/// where `S` is the skew matrix built from `(r, s, t)`:
///
/// ```text
/// F1 = x1 - s x2 + t x3 + sin x1
/// F2 = x2 - r x3 + s x1 + sin x2
/// F3 = x3 - t x1 + r x2 + sin x3
/// ```
///
/// `||I + S||_2 = sqrt(1 + r^2 + s^2 + t^2)` since `S` is normal with
/// purely imaginary spectrum, so `L_F = sqrt(1 + r^2 + s^2 + t^2) + sqrt 3`.
pub fn example2_3d(r: f64, s: f64, t: f64) -> Result<VIInstance> {
    if !(r.is_finite() && s.is_finite() && t.is_finite()) {
        return Err(Error::invalid("example2 parameters must be finite"));
    }
    let l_f = (1.0 + r * r + s * s + t * t).sqrt() + 3f64.sqrt();
    VIInstance::new("example2", FeasibleSet::unit_ball(3)?, l_f, move |x| {
        vec![
            x[0] - s * x[1] + t * x[2] + x[0].sin(),
            x[1] - r * x[2] + s * x[0] + x[1].sin(),
            x[2] - t * x[0] + r * x[1] + x[2].sin(),
        ]
    })?
    .with_known_solution(vec![0.0; 3])
}

/// Minimization reduction: `F = grad f`. Monotone iff `f` is convex.
pub fn gradient_adapter<G>(grad: G, set: FeasibleSet, bound: f64) -> Result<VIInstance>
where
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
{
    VIInstance::new("gradient", set, bound, grad)
}

/// Saddle-point reduction for `min_u max_v f(u, v)`:
/// `F(u, v) = (grad_u f(u, v), -grad_v f(u, v))`, with `x = (u, v)` split
/// after the first `split` coordinates.
pub fn saddle_adapter<GU, GV>(grad_u: GU, grad_v: GV, split: usize, set: FeasibleSet, bound: f64) -> Result<VIInstance>
where
    GU: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    GV: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
{
    let n = set.dimension();
    if split == 0 || split >= n {
        return Err(Error::invalid(format!(
            "split index {split} out of range for dimension {n}"
        )));
    }
    VIInstance::new("saddle", set, bound, move |x| {
        let (u, v) = x.split_at(split);
        let mut out = grad_u(u, v);
        out.extend(grad_v(u, v).into_iter().map(|g| -g));
        out
    })
}

/// Fixed-point reduction: `F(x) = x - T(x)`.
pub fn fixedpoint_adapter<T>(map: T, set: FeasibleSet, bound: f64) -> Result<VIInstance>
where
    T: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
{
    VIInstance::new("fixed_point", set, bound, move |x| linalg::sub(x, &map(x)))
}

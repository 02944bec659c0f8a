use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::linalg;

/// A convex functional constraint `g_i(x) <= 0` with a subgradient oracle
/// and Lipschitz constant `M_gi`.
#[derive(Clone)]
pub struct Constraint {
    label: String,
    value: ScalarField,
    subgradient: VectorField,
    lipschitz: f64,
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Constraint")
            .field("label", &self.label)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl Constraint {
    pub fn new<G, S>(label: impl Into<String>, lipschitz: f64, value: G, subgradient: S) -> Result<Self>
    where
        G: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        S: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::invalid(format!(
                "Lipschitz constant must be positive, got {lipschitz}"
            )));
        }
        Ok(Constraint {
            label: label.into(),
            value: Arc::new(value),
            subgradient: Arc::new(subgradient),
            lipschitz,
        })
    }

    /// `g(x) = ||x - center||_2 - radius`, 1-Lipschitz.
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) || !linalg::all_finite(&center) {
            return Err(Error::invalid(
                "ball constraint needs a finite center and positive radius",
            ));
        }
        let c2 = center.clone();
        Constraint::new(
            format!("ball(r={radius})"),
            1.0,
            move |x| linalg::norm2(&linalg::sub(x, &center)) - radius,
            move |x| {
                let d = linalg::sub(x, &c2);
                let len = linalg::norm2(&d);
                if len == 0.0 {
                    vec![0.0; d.len()]
                } else {
                    linalg::scale(&d, 1.0 / len)
                }
            },
        )
    }

    /// `g(x) = <normal, x> - offset`, Lipschitz with `||normal||_2`.
    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let len = linalg::norm2(&normal);
        if !(len.is_finite() && len > 0.0 && offset.is_finite()) {
            return Err(Error::invalid("halfspace constraint needs a finite nonzero normal"));
        }
        let n2 = normal.clone();
        Constraint::new(
            "halfspace",
            len,
            move |x| linalg::dot(&normal, x) - offset,
            move |_| n2.clone(),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        (self.subgradient)(x)
    }
}

/// Constraints `g_1..g_p` aggregated into `g = max_i g_i`, which is
/// `M_g`-Lipschitz with `M_g = max_i M_gi`.
#[derive(Clone, Debug)]
pub struct ConstraintStack {
    constraints: Vec<Constraint>,
    lipschitz: f64,
}

impl ConstraintStack {
    pub fn new(constraints: Vec<Constraint>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::invalid("constraint stack must be non-empty"));
        }
        let lipschitz = constraints.iter().map(Constraint::lipschitz).fold(0.0, f64::max);
        Ok(ConstraintStack { constraints, lipschitz })
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// `M_g`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Index and value of the maximizing component (lowest index on ties).
    pub fn active(&self, x: &[f64]) -> Result<(usize, f64)> {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, c) in self.constraints.iter().enumerate() {
            let v = c.value(x);
            if !v.is_finite() {
                return Err(Error::invalid(format!(
                    "constraint {i} ({}) evaluated to {v}",
                    c.label()
                )));
            }
            if v > best.1 {
                best = (i, v);
            }
        }
        Ok(best)
    }

    /// `g(x) = max_i g_i(x)`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.active(x).map(|(_, v)| v)
    }

    /// A subgradient of `g` at `x`: that of the active component.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (i, _) = self.active(x)?;
        let g = self.constraints[i].subgradient(x);
        if !linalg::all_finite(&g) {
            return Err(Error::invalid(format!(
                "constraint {i} returned a non-finite subgradient"
            )));
        }
        Ok(g)
    }

    /// Largest `|g(x) - g(y)| - M_g ||x - y||` over `pairs` uniform pairs of `set`.
    pub fn sampled_lipschitz_excess(&self, set: &FeasibleSet, pairs: usize, seed: u64) -> Result<f64> {
        let norm = set.natural_norm();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..pairs {
            let x = set.sample_uniform(&mut rng);
            let y = set.sample_uniform(&mut rng);
            let excess = (self.value(&x)? - self.value(&y)?).abs() - self.lipschitz * norm.norm(&linalg::sub(&x, &y));
            worst = worst.max(excess);
        }
        Ok(worst)
    }
}

/// Stack of ball constraints `||x - c_i||_2 - r_i <= 0`.
pub fn ball_constraint_stack(radii: &[f64], centers: &[Vec<f64>]) -> Result<ConstraintStack> {
    if radii.is_empty() || radii.len() != centers.len() {
        return Err(Error::invalid(format!(
            "need equal-length, non-empty radii and centers ({} vs {})",
            radii.len(),
            centers.len()
        )));
    }
    let constraints = radii
        .iter()
        .zip(centers)
        .map(|(&r, c)| Constraint::ball(c.clone(), r))
        .collect::<Result<Vec<_>>>()?;
    ConstraintStack::new(constraints)
}

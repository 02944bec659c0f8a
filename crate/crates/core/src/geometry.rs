//! Prox-structures: a norm, a prox-function `psi` and the feasible set `Q`.
//!
//! Only `(psi, Q)` pairs whose mirror step has a closed form are admissible:
//!
//! | prox-function            | norm      | sets       | mirror step                        |
//! |--------------------------|-----------|------------|------------------------------------|
//! | `0.5 * ||x||_2^2`        | Euclidean | ball, box  | Euclidean projection of `x - g*v`  |
//! | `sum_i x_i ln x_i`       | L1        | simplex    | multiplicative update, renormalize |
//!
//! Both prox-functions are 1-strongly convex with respect to their norm on
//! their sets (Pinsker's inequality for the entropy), so `sigma = 1`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance used for membership tests of prox-step outputs and iterates.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Coordinates of entropy arguments are clipped to this before taking logs.
const ENTROPY_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    Euclidean,
    L1,
}

impl Norm {
    pub fn norm(self, x: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => linalg::norm2(x),
            Norm::L1 => linalg::norm1(x),
        }
    }

    /// Norm of the conjugate space: Euclidean is self-dual, L1 pairs with L-infinity.
    pub fn dual_norm(self, y: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => linalg::norm2(y),
            Norm::L1 => linalg::norm_inf(y),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxFunction {
    HalfSquaredEuclidean,
    NegativeEntropy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSet {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Simplex { dimension: usize },
}

impl FeasibleSet {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::invalid("ball center must be non-empty"));
        }
        if !linalg::all_finite(&center) || !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!(
                "ball needs a finite center and a positive radius, got radius {radius}"
            )));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    /// Unit ball centered at the origin of `R^n`.
    pub fn unit_ball(n: usize) -> Result<Self> {
        Self::ball(vec![0.0; n], 1.0)
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid(format!(
                "box bounds must be non-empty and of equal length ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        let ok = lower
            .iter()
            .zip(&upper)
            .all(|(l, u)| l.is_finite() && u.is_finite() && l < u);
        if !ok {
            return Err(Error::invalid("box needs finite bounds with lower < upper"));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    pub fn simplex(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("simplex dimension must be positive"));
        }
        Ok(FeasibleSet::Simplex { dimension })
    }

    pub fn dimension(&self) -> usize {
        match self {
            FeasibleSet::Ball { center, .. } => center.len(),
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Simplex { dimension } => *dimension,
        }
    }

    /// The norm that the admissible prox-structure on this set uses.
    pub fn natural_norm(&self) -> Norm {
        match self {
            FeasibleSet::Simplex { .. } => Norm::L1,
            _ => Norm::Euclidean,
        }
    }

    /// `D` with `max_{x,y in Q} ||x - y|| <= D` in the natural norm.
    pub fn diameter(&self) -> f64 {
        match self {
            FeasibleSet::Ball { radius, .. } => 2.0 * radius,
            FeasibleSet::Box { lower, upper } => linalg::norm2(&linalg::sub(upper, lower)),
            FeasibleSet::Simplex { .. } => 2.0,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dimension() || !linalg::all_finite(x) {
            return false;
        }
        match self {
            FeasibleSet::Ball { center, radius } => linalg::norm2(&linalg::sub(x, center)) <= radius + tol,
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            FeasibleSet::Simplex { .. } => x.iter().all(|v| *v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol,
        }
    }

    /// Euclidean projection onto a ball (radial rescale) or a box (clamp).
    pub fn project_euclidean(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dimension() {
            return Err(dimension_mismatch(self.dimension(), y.len()));
        }
        match self {
            FeasibleSet::Ball { center, radius } => {
                let offset = linalg::sub(y, center);
                let dist = linalg::norm2(&offset);
                if dist <= *radius {
                    Ok(y.to_vec())
                } else {
                    Ok(linalg::axpy(center, radius / dist, &offset))
                }
            }
            FeasibleSet::Box { lower, upper } => Ok(y
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect()),
            FeasibleSet::Simplex { .. } => Err(Error::config(
                "Euclidean projection onto the simplex is not supported; use the entropy prox-structure",
            )),
        }
    }

    /// Uniform sample from the set.
    ///
    /// Ball: normalized Gaussian direction times `radius * U^(1/n)`.
    /// Box: independent uniforms per coordinate. Simplex: normalized
    /// exponential spacings (a flat Dirichlet draw).
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            FeasibleSet::Ball { center, radius } => {
                let n = center.len();
                let mut dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
                let mut len = linalg::norm2(&dir);
                while len == 0.0 {
                    dir = (0..n).map(|_| StandardNormal.sample(rng)).collect();
                    len = linalg::norm2(&dir);
                }
                let u: f64 = rng.random();
                let r = radius * u.powf(1.0 / n as f64);
                linalg::axpy(center, r / len, &dir)
            }
            FeasibleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                .collect(),
            FeasibleSet::Simplex { dimension } => {
                let e: Vec<f64> = (0..*dimension).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = e.iter().sum();
                e.into_iter().map(|v| v / total).collect()
            }
        }
    }

    /// Points `+-e_i` pushed out to the boundary of the set (simplex: its vertices).
    pub fn axis_boundary_points(&self) -> Vec<Vec<f64>> {
        let n = self.dimension();
        let mut out = Vec::with_capacity(2 * n);
        match self {
            FeasibleSet::Ball { center, radius } => {
                for i in 0..n {
                    for sign in [1.0, -1.0] {
                        let mut p = center.clone();
                        p[i] += sign * radius;
                        out.push(p);
                    }
                }
            }
            FeasibleSet::Box { lower, upper } => {
                let mid: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect();
                for i in 0..n {
                    for bound in [upper[i], lower[i]] {
                        let mut p = mid.clone();
                        p[i] = bound;
                        out.push(p);
                    }
                }
            }
            FeasibleSet::Simplex { .. } => {
                for i in 0..n {
                    let mut p = vec![0.0; n];
                    p[i] = 1.0;
                    out.push(p);
                }
            }
        }
        out
    }
}

/// A norm, a prox-function with its strong-convexity modulus, and the set
/// on which mirror steps are solved. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxGeometry {
    norm: Norm,
    psi: ProxFunction,
    sigma: f64,
    set: FeasibleSet,
}

impl ProxGeometry {
    pub fn new(norm: Norm, psi: ProxFunction, set: FeasibleSet) -> Result<Self> {
        let admissible = matches!(
            (psi, norm, &set),
            (
                ProxFunction::HalfSquaredEuclidean,
                Norm::Euclidean,
                FeasibleSet::Ball { .. } | FeasibleSet::Box { .. }
            ) | (ProxFunction::NegativeEntropy, Norm::L1, FeasibleSet::Simplex { .. })
        );
        if !admissible {
            return Err(Error::config(format!(
                "unsupported prox-structure: {psi:?} with {norm:?} norm on {}",
                set_kind(&set)
            )));
        }
        Ok(ProxGeometry {
            norm,
            psi,
            sigma: 1.0,
            set,
        })
    }

    /// Standard Euclidean prox-structure `psi = 0.5 ||x||^2` on a ball or box.
    pub fn euclidean(set: FeasibleSet) -> Result<Self> {
        Self::new(Norm::Euclidean, ProxFunction::HalfSquaredEuclidean, set)
    }

    /// Negative entropy on the probability simplex with the L1 norm.
    pub fn entropic_simplex(dimension: usize) -> Result<Self> {
        Self::new(
            Norm::L1,
            ProxFunction::NegativeEntropy,
            FeasibleSet::simplex(dimension)?,
        )
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn psi(&self) -> ProxFunction {
        self.psi
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn dimension(&self) -> usize {
        self.set.dimension()
    }

    /// Default bound `R >= V(x, y)` over `Q`.
    ///
    /// Ball of radius `r`: `2 r^2`; box: `0.5 ||upper - lower||^2`. The
    /// divergence is unbounded near the simplex boundary, so the simplex
    /// default `ln(n) + 1` is only a convention for interior iterates.
    pub fn default_radius(&self) -> f64 {
        match &self.set {
            FeasibleSet::Ball { radius, .. } => 2.0 * radius * radius,
            FeasibleSet::Box { lower, upper } => {
                0.5 * linalg::dot(&linalg::sub(upper, lower), &linalg::sub(upper, lower))
            }
            FeasibleSet::Simplex { dimension } => (*dimension as f64).ln() + 1.0,
        }
    }

    pub fn psi_value(&self, x: &[f64]) -> Result<f64> {
        self.check_domain(x, "x")?;
        Ok(match self.psi {
            ProxFunction::HalfSquaredEuclidean => 0.5 * linalg::dot(x, x),
            ProxFunction::NegativeEntropy => x.iter().map(|&v| xlogx(v)).sum(),
        })
    }

    pub fn psi_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x, "x")?;
        Ok(match self.psi {
            ProxFunction::HalfSquaredEuclidean => x.to_vec(),
            ProxFunction::NegativeEntropy => x.iter().map(|&v| clip(v).ln() + 1.0).collect(),
        })
    }

    /// `V(x, y) = psi(x) - psi(y) - <grad psi(y), x - y>`.
    pub fn bregman_divergence(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_domain(x, "x")?;
        self.check_domain(y, "y")?;
        Ok(match self.psi {
            ProxFunction::HalfSquaredEuclidean => {
                let d = linalg::sub(x, y);
                0.5 * linalg::dot(&d, &d)
            }
            // Expanded coordinatewise: x ln(x/y) - x + y, each term >= 0.
            ProxFunction::NegativeEntropy => x
                .iter()
                .zip(y)
                .map(|(&a, &b)| xlogx(a) - a * clip(b).ln() - a + b)
                .sum::<f64>()
                .max(0.0),
        })
    }

    /// Exact minimizer over `Q` of `<x', v> + V(x', x) / gamma`.
    pub fn prox_step(&self, x: &[f64], v: &[f64], gamma: f64) -> Result<Vec<f64>> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(format!("step size must be positive, got {gamma}")));
        }
        if v.len() != self.dimension() {
            return Err(dimension_mismatch(self.dimension(), v.len()));
        }
        if !linalg::all_finite(v) {
            return Err(Error::invalid("direction has non-finite entries"));
        }
        if !self.set.contains(x, MEMBERSHIP_TOL) {
            return Err(Error::invalid("prox center lies outside the feasible set"));
        }
        match self.psi {
            ProxFunction::HalfSquaredEuclidean => self.set.project_euclidean(&linalg::axpy(x, -gamma, v)),
            ProxFunction::NegativeEntropy => {
                let logits: Vec<f64> = x.iter().zip(v).map(|(&xi, &vi)| clip(xi).ln() - gamma * vi).collect();
                let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let unnormalized: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
                let total: f64 = unnormalized.iter().sum();
                Ok(unnormalized.into_iter().map(|u| u / total).collect())
            }
        }
    }

    /// `<grad psi(b) - grad psi(a), c - a> - (V(c,a) + V(a,b) - V(c,b))`.
    ///
    /// Identically zero in exact arithmetic; used to test the divergence.
    pub fn three_points_residual(&self, a: &[f64], b: &[f64], c: &[f64]) -> Result<f64> {
        let ga = self.psi_gradient(a)?;
        let gb = self.psi_gradient(b)?;
        let lhs = linalg::dot(&linalg::sub(&gb, &ga), &linalg::sub(c, a));
        let rhs = self.bregman_divergence(c, a)? + self.bregman_divergence(a, b)? - self.bregman_divergence(c, b)?;
        Ok(lhs - rhs)
    }

    fn check_domain(&self, x: &[f64], name: &str) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(dimension_mismatch(self.dimension(), x.len()));
        }
        if !linalg::all_finite(x) {
            return Err(Error::invalid(format!("{name} has non-finite entries")));
        }
        if self.psi == ProxFunction::NegativeEntropy && x.iter().any(|&v| v < 0.0) {
            return Err(Error::invalid(format!(
                "{name} has negative entries outside the entropy domain"
            )));
        }
        Ok(())
    }
}

fn clip(v: f64) -> f64 {
    v.max(ENTROPY_FLOOR)
}

fn xlogx(v: f64) -> f64 {
    v * clip(v).ln()
}

fn set_kind(set: &FeasibleSet) -> &'static str {
    match set {
        FeasibleSet::Ball { .. } => "ball",
        FeasibleSet::Box { .. } => "box",
        FeasibleSet::Simplex { .. } => "simplex",
    }
}

fn dimension_mismatch(expected: usize, got: usize) -> Error {
    Error::invalid(format!("dimension mismatch: expected {expected}, got {got}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_disc() -> ProxGeometry {
        ProxGeometry::euclidean(FeasibleSet::unit_ball(2).unwrap()).unwrap()
    }

    fn square() -> ProxGeometry {
        ProxGeometry::euclidean(FeasibleSet::boxed(vec![-1.0, -0.5], vec![0.5, 1.0]).unwrap()).unwrap()
    }

    // Independent KL evaluation for probability vectors.
    fn kl(x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| a * (a / b).ln()).sum()
    }

    #[test]
    fn divergence_vanishes_on_diagonal() {
        let g = unit_disc();
        assert_eq!(g.bregman_divergence(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn euclidean_divergence_is_half_squared_distance() {
        let g = unit_disc();
        assert_eq!(g.bregman_divergence(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn entropy_divergence_is_kl_on_simplex() {
        let g = ProxGeometry::entropic_simplex(2).unwrap();
        let x = [0.5, 0.5];
        let y = [0.25, 0.75];
        let expected = kl(&x, &y);
        assert!((expected - 0.14384).abs() < 1e-5);
        assert!((g.bregman_divergence(&x, &y).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_negative_entries() {
        let g = ProxGeometry::entropic_simplex(2).unwrap();
        assert!(matches!(
            g.bregman_divergence(&[0.5, 0.5], &[-0.1, 1.1]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn entropy_clips_zero_coordinates() {
        let g = ProxGeometry::entropic_simplex(2).unwrap();
        let v = g.bregman_divergence(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn inadmissible_pairs_are_configuration_errors() {
        let ball = FeasibleSet::unit_ball(2).unwrap();
        assert!(matches!(
            ProxGeometry::new(Norm::L1, ProxFunction::NegativeEntropy, ball.clone()),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ProxGeometry::new(Norm::L1, ProxFunction::HalfSquaredEuclidean, ball),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ProxGeometry::new(
                Norm::Euclidean,
                ProxFunction::HalfSquaredEuclidean,
                FeasibleSet::simplex(3).unwrap()
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn diameters_follow_closed_forms() {
        assert_eq!(FeasibleSet::ball(vec![1.0, 2.0], 0.75).unwrap().diameter(), 1.5);
        let b = FeasibleSet::boxed(vec![0.0, 0.0], vec![3.0, 4.0]).unwrap();
        assert_eq!(b.diameter(), 5.0);
        assert_eq!(FeasibleSet::simplex(7).unwrap().diameter(), 2.0);
    }

    // Dense grid search over the unit disc, the oracle for the ball prox.
    fn grid_argmin_disc(x: &[f64], v: &[f64], gamma: f64, step: f64) -> [f64; 2] {
        let steps = (2.0 / step).round() as i64;
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in 0..=steps {
            let p0 = -1.0 + i as f64 * step;
            for j in 0..=steps {
                let p1 = -1.0 + j as f64 * step;
                if p0 * p0 + p1 * p1 > 1.0 {
                    continue;
                }
                let d0 = p0 - x[0];
                let d1 = p1 - x[1];
                let obj = p0 * v[0] + p1 * v[1] + 0.5 * (d0 * d0 + d1 * d1) / gamma;
                if obj < best.0 {
                    best = (obj, [p0, p1]);
                }
            }
        }
        best.1
    }

    #[test]
    fn ball_prox_projects_radially() {
        let g = unit_disc();
        let p = g.prox_step(&[0.0, 0.0], &[2.0, 0.0], 1.0).unwrap();
        assert_eq!(p, vec![-1.0, 0.0]);
        let oracle = grid_argmin_disc(&[0.0, 0.0], &[2.0, 0.0], 1.0, 1e-2);
        assert!((oracle[0] + 1.0).abs() < 1e-2 && oracle[1].abs() < 1e-2);
    }

    #[test]
    fn zero_direction_leaves_point_unchanged() {
        let x = [0.2, -0.4];
        assert_eq!(unit_disc().prox_step(&x, &[0.0, 0.0], 3.0).unwrap(), x.to_vec());
        assert_eq!(square().prox_step(&x, &[0.0, 0.0], 3.0).unwrap(), x.to_vec());
        let g = ProxGeometry::entropic_simplex(3).unwrap();
        let s = [0.2, 0.3, 0.5];
        let p = g.prox_step(&s, &[0.0; 3], 0.7).unwrap();
        for (a, b) in p.iter().zip(&s) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn entropy_prox_is_multiplicative() {
        let g = ProxGeometry::entropic_simplex(2).unwrap();
        let p = g.prox_step(&[0.5, 0.5], &[2f64.ln(), 0.0], 1.0).unwrap();
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 2.0 / 3.0).abs() < 1e-15);
        // Oracle: grid over the segment {(t, 1 - t)}.
        let obj = |t: f64| t * 2f64.ln() + kl(&[t, 1.0 - t], &[0.5, 0.5]);
        let best = (1..10_000)
            .map(|i| i as f64 / 10_000.0)
            .min_by(|a, b| obj(*a).partial_cmp(&obj(*b)).unwrap())
            .unwrap();
        assert!((best - 1.0 / 3.0).abs() < 2e-4);
    }

    #[test]
    fn prox_rejects_bad_step_and_outside_center() {
        let g = unit_disc();
        assert!(matches!(
            g.prox_step(&[0.0, 0.0], &[1.0, 0.0], 0.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            g.prox_step(&[0.0, 0.0], &[1.0, 0.0], -1.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            g.prox_step(&[2.0, 0.0], &[1.0, 0.0], 1.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn three_points_examples() {
        let g = unit_disc();
        let r = g.three_points_residual(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(r, 0.0);
        let p = [0.1, -0.3];
        assert_eq!(g.three_points_residual(&p, &p, &p).unwrap(), 0.0);
    }

    #[test]
    fn box_prox_clamps_componentwise() {
        let p = square().prox_step(&[0.0, 0.0], &[-2.0, 2.0], 1.0).unwrap();
        assert_eq!(p, vec![0.5, -0.5]);
    }

    #[test]
    fn samples_lie_in_their_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sets = [
            FeasibleSet::ball(vec![1.0, -1.0, 0.5], 0.3).unwrap(),
            FeasibleSet::boxed(vec![-1.0, 0.0], vec![0.0, 2.0]).unwrap(),
            FeasibleSet::simplex(5).unwrap(),
        ];
        for set in &sets {
            for _ in 0..500 {
                assert!(set.contains(&set.sample_uniform(&mut rng), 1e-12));
            }
            for p in set.axis_boundary_points() {
                assert!(set.contains(&p, 1e-12));
            }
        }
    }

    fn simplex_point(raw: Vec<f64>) -> Vec<f64> {
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / total).collect()
    }

    fn disc_point(raw: (f64, f64, f64)) -> Vec<f64> {
        let (a, r0, r1) = raw;
        vec![r0 * a.cos(), r1 * a.sin()]
    }

    proptest! {
        #[test]
        fn divergence_dominates_strong_convexity_euclidean(
            x in proptest::collection::vec(-1.0f64..1.0, 4),
            y in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            let g = ProxGeometry::euclidean(FeasibleSet::boxed(vec![-1.0; 4], vec![1.0; 4]).unwrap()).unwrap();
            let d = linalg::norm2(&linalg::sub(&x, &y));
            prop_assert!(g.bregman_divergence(&x, &y).unwrap() >= 0.5 * g.sigma() * d * d - 1e-12);
        }

        #[test]
        fn divergence_dominates_strong_convexity_entropy(
            x in proptest::collection::vec(1e-3f64..1.0, 5),
            y in proptest::collection::vec(1e-3f64..1.0, 5),
        ) {
            let g = ProxGeometry::entropic_simplex(5).unwrap();
            let (x, y) = (simplex_point(x), simplex_point(y));
            let d = linalg::norm1(&linalg::sub(&x, &y));
            prop_assert!(g.bregman_divergence(&x, &y).unwrap() >= 0.5 * d * d - 1e-12);
        }

        #[test]
        fn three_points_identity_entropy(
            a in proptest::collection::vec(1e-3f64..1.0, 4),
            b in proptest::collection::vec(1e-3f64..1.0, 4),
            c in proptest::collection::vec(1e-3f64..1.0, 4),
        ) {
            let g = ProxGeometry::entropic_simplex(4).unwrap();
            let (a, b, c) = (simplex_point(a), simplex_point(b), simplex_point(c));
            prop_assert!(g.three_points_residual(&a, &b, &c).unwrap().abs() < 1e-10);
        }

        #[test]
        fn prox_output_is_feasible_and_locally_optimal(
            x in (0.0f64..std::f64::consts::TAU, 0.0f64..0.99, 0.0f64..0.99),
            v in proptest::collection::vec(-5.0f64..5.0, 2),
            gamma in 0.01f64..3.0,
            seed in 0u64..1000,
        ) {
            let g = unit_disc();
            let x = disc_point(x);
            let p = g.prox_step(&x, &v, gamma).unwrap();
            prop_assert!(g.set().contains(&p, MEMBERSHIP_TOL));
            let obj = |q: &[f64]| linalg::dot(q, &v) + g.bregman_divergence(q, &x).unwrap() / gamma;
            let base = obj(&p);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tau = 1e-4;
            let mut checked = 0;
            while checked < 10 {
                let d: Vec<f64> = (0..2).map(|_| StandardNormal.sample(&mut rng)).collect();
                let q = linalg::axpy(&p, tau, &d);
                if !g.set().contains(&q, 0.0) {
                    continue;
                }
                prop_assert!(obj(&q) >= base - 1e-9);
                checked += 1;
            }
        }

        #[test]
        fn entropy_prox_is_locally_optimal(
            x in proptest::collection::vec(1e-2f64..1.0, 3),
            v in proptest::collection::vec(-5.0f64..5.0, 3),
            gamma in 0.01f64..3.0,
            seed in 0u64..1000,
        ) {
            let g = ProxGeometry::entropic_simplex(3).unwrap();
            let x = simplex_point(x);
            let p = g.prox_step(&x, &v, gamma).unwrap();
            prop_assert!(g.set().contains(&p, MEMBERSHIP_TOL));
            let obj = |q: &[f64]| linalg::dot(q, &v) + g.bregman_divergence(q, &x).unwrap() / gamma;
            let base = obj(&p);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tau = 1e-4;
            let mut checked = 0;
            while checked < 10 {
                let mut d: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
                let mean = d.iter().sum::<f64>() / 3.0;
                d.iter_mut().for_each(|di| *di -= mean);
                let q = linalg::axpy(&p, tau, &d);
                if q.iter().any(|&qi| qi < 0.0) {
                    continue;
                }
                prop_assert!(obj(&q) >= base - 1e-9);
                checked += 1;
            }
        }
    }
}

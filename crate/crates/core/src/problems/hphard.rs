//! HpHard (Harker-Pang) affine test problem `F(x) = K x + q` on the unit ball,
//! with `K = A A^T + B + C`.
//!
//! Generation is seeded and stream-ordered so that the same `(n, seed)`
//! always yields the same `K` bit for bit:
//!
//! 1. `ChaCha20Rng::seed_from_u64(seed)` (rand_chacha 0.9, stream 0);
//! 2. `A`, row-major, `n^2` draws of `Normal(0, 0.01)` (rand_distr 0.5);
//! 3. `B`, strict upper triangle row-major, `n(n-1)/2` draws of
//!    `Normal(0, 0.01)`, mirrored with a sign flip;
//! 4. `C`, diagonal, `n` draws of `Uniform[0, 1)`.
//!
//! A random affine term uses the same seed on stream 1, so it never
//! perturbs `K`.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::VIInstance;
use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::linalg;

const ENTRY_SCALE: f64 = 0.01;
const POWER_ITERATION_RTOL: f64 = 1e-10;

/// Raw random factors of `K`, kept for invariant checks.
#[derive(Clone, Debug, PartialEq)]
pub struct HpHardFactors {
    pub n: usize,
    /// Row-major `n x n`.
    pub a: Vec<f64>,
    /// Row-major `n x n`, skew-symmetric.
    pub b: Vec<f64>,
    /// Diagonal of `C`.
    pub c: Vec<f64>,
}

impl HpHardFactors {
    pub fn generate(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("HpHard dimension must be positive"));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, ENTRY_SCALE).expect("valid scale");
        let a: Vec<f64> = (0..n * n).map(|_| normal.sample(&mut rng)).collect();
        let mut b = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = normal.sample(&mut rng);
                b[i * n + j] = v;
                b[j * n + i] = -v;
            }
        }
        let c: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        Ok(HpHardFactors { n, a, b, c })
    }

    /// `K = A A^T + B + C`, row-major.
    pub fn assemble(&self) -> Vec<f64> {
        let n = self.n;
        let mut k = self.b.clone();
        for i in 0..n {
            let ai = &self.a[i * n..(i + 1) * n];
            for j in 0..n {
                let aj = &self.a[j * n..(j + 1) * n];
                k[i * n + j] += linalg::dot(ai, aj);
            }
            k[i * n + i] += self.c[i];
        }
        k
    }
}

/// Serializable HpHard problem; the JSON problem-file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HpHardProblem {
    pub n: usize,
    pub seed: u64,
    pub q: Vec<f64>,
    /// Row-major `n x n`.
    #[serde(rename = "K")]
    pub k: Vec<f64>,
    #[serde(rename = "L_F")]
    pub l_f: f64,
}

impl HpHardProblem {
    pub fn generate(n: usize, seed: u64, q: Vec<f64>) -> Result<Self> {
        if q.len() != n {
            return Err(Error::invalid(format!(
                "affine term has length {}, expected {n}",
                q.len()
            )));
        }
        let k = HpHardFactors::generate(n, seed)?.assemble();
        Self::from_matrix(k, q, seed)
    }

    /// Builds a problem from an explicit `K`, computing `L_F = ||K||_2 + ||q||_2`.
    pub fn from_matrix(k: Vec<f64>, q: Vec<f64>, seed: u64) -> Result<Self> {
        let n = q.len();
        if n == 0 || k.len() != n * n {
            return Err(Error::invalid(format!(
                "matrix has {} entries, expected {}",
                k.len(),
                n * n
            )));
        }
        if !linalg::all_finite(&k) || !linalg::all_finite(&q) {
            return Err(Error::invalid("HpHard data must be finite"));
        }
        let l_f = spectral_norm(&k, n) + linalg::norm2(&q);
        let problem = HpHardProblem { n, seed, q, k, l_f };
        problem.validate()?;
        Ok(problem)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k.len() != self.n * self.n || self.q.len() != self.n {
            return Err(Error::invalid("HpHard problem has inconsistent dimensions"));
        }
        if !(self.l_f.is_finite() && self.l_f > 0.0) {
            return Err(Error::invalid("HpHard operator bound must be positive"));
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = linalg::matvec(&self.k, self.n, x);
        for (o, qi) in out.iter_mut().zip(&self.q) {
            *o += qi;
        }
        out
    }

    /// Instance over the unit ball; the origin is the known solution when `q = 0`.
    pub fn to_instance(&self) -> Result<VIInstance> {
        self.validate()?;
        let problem = self.clone();
        let inst = VIInstance::new("hphard", FeasibleSet::unit_ball(self.n)?, self.l_f, move |x| {
            problem.apply(x)
        })?;
        if self.q.iter().all(|&v| v == 0.0) {
            inst.with_known_solution(vec![0.0; self.n])
        } else {
            Ok(inst)
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let problem: HpHardProblem = serde_json::from_str(text)?;
        problem.validate()?;
        Ok(problem)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// HpHard instance with freshly generated `K`.
pub fn hphard_generate(n: usize, seed: u64, q: Vec<f64>) -> Result<VIInstance> {
    HpHardProblem::generate(n, seed, q)?.to_instance()
}

/// Affine term with entries uniform in `[-1, 1)`, drawn from stream 1 of `seed`.
pub fn random_affine_term(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect()
}

/// `||K||_2` by power iteration on `K^T K`, stopping at relative change
/// `1e-10` of the Rayleigh quotient or after `10 n` iterations.
pub fn spectral_norm(k: &[f64], n: usize) -> f64 {
    // Unequal start entries avoid starting orthogonal to symmetric eigenvectors.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
    let len = linalg::norm2(&v);
    v.iter_mut().for_each(|x| *x /= len);
    let mut estimate = 0.0;
    for _ in 0..(10 * n).max(1) {
        let kv = linalg::matvec(k, n, &v);
        let rayleigh = linalg::dot(&kv, &kv);
        let w = linalg::matvec_transposed(k, n, &kv);
        let w_len = linalg::norm2(&w);
        if w_len == 0.0 {
            return rayleigh.sqrt();
        }
        v = linalg::scale(&w, 1.0 / w_len);
        let converged = (rayleigh - estimate).abs() <= POWER_ITERATION_RTOL * rayleigh;
        estimate = rayleigh;
        if converged {
            break;
        }
    }
    let kv = linalg::matvec(k, n, &v);
    linalg::norm2(&kv).max(estimate.sqrt())
}

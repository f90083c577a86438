#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use pawn_meta::sampling::{build_estimator_design, Distribution};
use pawn_meta::variance::{interaction_indices, EvaluatedDesign, SobolEstimates, TotalEstimator};
use pawn_meta::{Model, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};

/// A closure on `[0, 1]^k` wrapped as a model.
pub struct Unit<F>(pub usize, pub F);

impl<F: Fn(&[f64]) -> f64 + Sync> Model for Unit<F> {
    fn name(&self) -> &str {
        "unit"
    }
    fn dimension(&self) -> usize {
        self.0
    }
    fn input_distributions(&self) -> Vec<Distribution> {
        vec![Distribution::ContinuousUniform { lo: 0.0, hi: 1.0 }; self.0]
    }
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        Ok((self.1)(x))
    }
}

/// Counts every model evaluation.
pub struct Counting<'a, M: Model> {
    pub inner: &'a M,
    pub calls: AtomicUsize,
}

impl<'a, M: Model> Counting<'a, M> {
    pub fn new(inner: &'a M) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<M: Model> Model for Counting<'_, M> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn input_distributions(&self) -> Vec<Distribution> {
        self.inner.input_distributions()
    }
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.evaluate(x)
    }
}

pub fn evaluated<M: Model>(model: &M, base: usize, order: usize) -> EvaluatedDesign {
    let design = build_estimator_design(base, model.dimension(), order, 1)
        .unwrap()
        .transformed(&model.input_distributions())
        .unwrap();
    EvaluatedDesign::evaluate(model, &design, true).unwrap()
}

pub fn estimates<M: Model>(model: &M, base: usize, order: usize, estimator: TotalEstimator) -> SobolEstimates {
    interaction_indices(&evaluated(model, base, order), model.dimension(), estimator).unwrap()
}

/// Closed-form Ishigami indices (a = 2, b = 1): first order, then total order.
pub fn ishigami_truth() -> ([f64; 3], [f64; 3]) {
    let (a, b) = (2.0f64, 1.0f64);
    let v1 = 0.5 * (1.0 + b * PI.powi(4) / 5.0).powi(2);
    let v2 = a * a / 8.0;
    let v13 = 8.0 * b * b * PI.powi(8) / 225.0;
    let v = v1 + v2 + v13;
    ([v1 / v, v2 / v, 0.0], [(v1 + v13) / v, v2 / v, v13 / v])
}

/// Closed-form first-order indices of the Sobol' G function.
pub fn sobol_g_truth(a: &[f64]) -> Vec<f64> {
    let vi: Vec<f64> = a.iter().map(|a| 1.0 / (3.0 * (1.0 + a).powi(2))).collect();
    let v = vi.iter().map(|x| 1.0 + x).product::<f64>() - 1.0;
    vi.iter().map(|x| x / v).collect()
}

pub fn normals(n: usize, mean: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            mean + z
        })
        .collect()
}

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Supremum distance between two empirical CDFs by brute force over every
/// sample point.
pub fn ks_brute(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |s: &[f64], t: f64| s.iter().filter(|&&x| x <= t).count() as f64 / s.len() as f64;
    a.iter()
        .chain(b)
        .map(|&t| (ecdf(a, t) - ecdf(b, t)).abs())
        .fold(0.0, f64::max)
}

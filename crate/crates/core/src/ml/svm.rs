use serde::{Deserialize, Serialize};

use super::argmax;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Xoshiro256StarStar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub epochs: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { epochs: 200, lambda: 1e-3, seed: 123 }
    }
}

/// One-vs-rest linear SVM. Each weight row ends with the bias, which is
/// treated as a constant-one feature and regularized with the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub params: SvmParams,
    pub weights: Vec<Vec<f64>>,
}

fn augmented_dot(w: &[f64], x: &[f64]) -> f64 {
    w[..x.len()].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[x.len()]
}

impl LinearSvm {
    /// Minimizes `λ/2·‖w‖² + mean(max(0, 1 − y·w·x))` per class by full-batch
    /// subgradient steps of size `1/(λt)`. The order in which each epoch's
    /// subgradient is summed is a seeded shuffle.
    pub fn fit<R: AsRef<[f64]>>(x: &[R], y: &[usize], n_classes: usize, params: SvmParams) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::param("SVM needs equally many (non-zero) rows and labels"));
        }
        if !(params.lambda.is_finite() && params.lambda > 0.0) {
            return Err(Error::param(format!("lambda {} must be positive", params.lambda)));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(Error::param(format!("label {bad} out of range for {n_classes} classes")));
        }
        let p = x[0].as_ref().len();
        let n = x.len() as f64;
        let weights = (0..n_classes)
            .map(|k| {
                let mut rng = Xoshiro256StarStar::seed_from_u64(derive_seed(params.seed, k as u64));
                let mut order: Vec<usize> = (0..x.len()).collect();
                let mut w = vec![0.0; p + 1];
                for t in 1..=params.epochs {
                    rng.shuffle(&mut order);
                    let mut pull = vec![0.0; p + 1];
                    for &i in &order {
                        let xi = x[i].as_ref();
                        let yi = if y[i] == k { 1.0 } else { -1.0 };
                        if yi * augmented_dot(&w, xi) < 1.0 {
                            for (s, v) in pull.iter_mut().zip(xi) {
                                *s += yi * v;
                            }
                            pull[p] += yi;
                        }
                    }
                    let step = 1.0 / (params.lambda * t as f64);
                    for (wj, s) in w.iter_mut().zip(&pull) {
                        *wj -= step * (params.lambda * *wj - s / n);
                    }
                }
                w
            })
            .collect();
        Ok(Self { params, weights })
    }

    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        self.weights.iter().map(|w| augmented_dot(w, x)).collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.margins(x))
    }
}

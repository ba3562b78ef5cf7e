use serde::{Deserialize, Serialize};

use super::argmax;
use crate::error::{Error, Result};

/// Consecutive loss increases tolerated before training is declared divergent.
const MAX_RISING_STEPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogregParams {
    pub learning_rate: f64,
    pub iterations: usize,
    pub l2: f64,
}

impl Default for LogregParams {
    fn default() -> Self {
        Self { learning_rate: 0.1, iterations: 2000, l2: 1e-3 }
    }
}

/// Multinomial logistic regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub params: LogregParams,
    /// One row per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// Loss before every step and after the last one.
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

/// Gradient of the regularized mean cross-entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

fn softmax(z: &mut [f64]) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        total += *v;
    }
    z.iter_mut().for_each(|v| *v /= total);
}

fn linear(weights: &[Vec<f64>], bias: &[f64], x: &[f64]) -> Vec<f64> {
    weights.iter().zip(bias).map(|(w, b)| b + w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>()).collect()
}

/// Mean softmax cross-entropy plus `l2/2·‖W‖²` (bias unregularized), and
/// its gradient.
pub fn loss_and_gradient<R: AsRef<[f64]>>(
    weights: &[Vec<f64>],
    bias: &[f64],
    x: &[R],
    y: &[usize],
    l2: f64,
) -> (f64, Gradient) {
    let n = x.len() as f64;
    let mut gw: Vec<Vec<f64>> = weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut gb = vec![0.0; bias.len()];
    let mut loss = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let row = row.as_ref();
        let mut p = linear(weights, bias, row);
        softmax(&mut p);
        loss -= p[label].max(f64::MIN_POSITIVE).ln();
        for (k, pk) in p.iter().enumerate() {
            let d = pk - if k == label { 1.0 } else { 0.0 };
            gb[k] += d;
            for (g, v) in gw[k].iter_mut().zip(row) {
                *g += d * v;
            }
        }
    }
    let mut reg = 0.0;
    for (gk, wk) in gw.iter_mut().zip(weights) {
        for (g, w) in gk.iter_mut().zip(wk) {
            *g = *g / n + l2 * w;
            reg += w * w;
        }
    }
    gb.iter_mut().for_each(|g| *g /= n);
    (loss / n + 0.5 * l2 * reg, Gradient { weights: gw, bias: gb })
}

impl LogisticRegression {
    /// Full-batch gradient descent from zero weights.
    pub fn fit<R: AsRef<[f64]>>(x: &[R], y: &[usize], n_classes: usize, params: LogregParams) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::param("logistic regression needs equally many (non-zero) rows and labels"));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(Error::param(format!("label {bad} out of range for {n_classes} classes")));
        }
        if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
            return Err(Error::param(format!("learning rate {} must be positive", params.learning_rate)));
        }
        let p = x[0].as_ref().len();
        let mut weights = vec![vec![0.0; p]; n_classes];
        let mut bias = vec![0.0; n_classes];
        let mut history = Vec::with_capacity(params.iterations + 1);
        let mut rising = 0;
        for _ in 0..params.iterations {
            let (loss, g) = loss_and_gradient(&weights, &bias, x, y, params.l2);
            if !loss.is_finite() {
                return Err(Error::Training(format!("loss became {loss}")));
            }
            if history.last().is_some_and(|&prev| loss > prev) {
                rising += 1;
                if rising > MAX_RISING_STEPS {
                    return Err(Error::Training(format!(
                        "loss rose for {rising} consecutive steps (learning rate {})",
                        params.learning_rate
                    )));
                }
            } else {
                rising = 0;
            }
            history.push(loss);
            for (wk, gk) in weights.iter_mut().zip(&g.weights) {
                for (w, d) in wk.iter_mut().zip(gk) {
                    *w -= params.learning_rate * d;
                }
            }
            for (b, d) in bias.iter_mut().zip(&g.bias) {
                *b -= params.learning_rate * d;
            }
        }
        history.push(loss_and_gradient(&weights, &bias, x, y, params.l2).0);
        Ok(Self { params, weights, bias, loss_history: history })
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        linear(&self.weights, &self.bias, x)
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let mut z = self.logits(x);
        softmax(&mut z);
        z
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.logits(x))
    }
}

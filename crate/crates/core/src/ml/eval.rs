use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, CLASSES};
use super::model::TrainedModel;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Gaussian};

/// Stream tag for the synthetic rating noise.
const RATING_STREAM: u64 = 0x7261_7469_6E67_5F73;
/// Standard deviation of the rank noise, in ranks.
pub const RATING_NOISE_RANKS: f64 = 5.0;

/// Fractional (1-based, tie-averaged) ranks.
pub fn fractional_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of fractional ranks; `None` when either input is
/// constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::param(format!("spearman inputs differ in length ({} vs {})", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::param(format!("spearman needs at least 3 pairs, got {}", x.len())));
    }
    let (rx, ry) = (fractional_ranks(x), fractional_ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some(sxy / (sxx * syy).sqrt()))
}

/// Rank of each `pa` plus seeded Gaussian noise of [`RATING_NOISE_RANKS`].
pub fn synthetic_ratings(pa: &[f64], seed: u64) -> Vec<f64> {
    let mut g = Gaussian::seed_from_u64(derive_seed(seed, RATING_STREAM));
    fractional_ranks(pa).into_iter().map(|r| r + RATING_NOISE_RANKS * g.sample()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub test_rows: usize,
    pub accuracy: f64,
    /// Rows are true classes, columns predicted.
    pub confusion: [[u32; CLASSES]; CLASSES],
    /// `None` when a class is never predicted.
    pub precision: [Option<f64>; CLASSES],
    /// `None` when a class has no test rows.
    pub recall: [Option<f64>; CLASSES],
    /// Correlation of test-row PA with its noisy synthetic rating.
    pub spearman_pa: Option<f64>,
}

impl EvalReport {
    pub fn from_predictions(model: &str, truth: &[usize], predicted: &[usize]) -> Self {
        let mut confusion = [[0u32; CLASSES]; CLASSES];
        for (&t, &p) in truth.iter().zip(predicted) {
            confusion[t][p] += 1;
        }
        let total: u32 = confusion.iter().flatten().sum();
        let trace: u32 = (0..CLASSES).map(|k| confusion[k][k]).sum();
        let ratio = |num: u32, den: u32| (den > 0).then(|| num as f64 / den as f64);
        Self {
            model: model.to_string(),
            test_rows: truth.len(),
            accuracy: ratio(trace, total).unwrap_or(0.0),
            precision: std::array::from_fn(|k| ratio(confusion[k][k], (0..CLASSES).map(|t| confusion[t][k]).sum())),
            recall: std::array::from_fn(|k| ratio(confusion[k][k], confusion[k].iter().sum())),
            confusion,
            spearman_pa: None,
        }
    }
}

/// Scores `model` on the dataset's frozen test split.
pub fn evaluate(model: &TrainedModel, dataset: &Dataset) -> Result<EvalReport> {
    model.check_dataset(dataset)?;
    let (x, truth) = dataset.test_matrix();
    let predicted: Vec<usize> = x.iter().map(|r| model.predict(r)).collect();
    let mut report = EvalReport::from_predictions(model.kind_name(), &truth, &predicted);
    let pa: Vec<f64> = dataset.split.test.iter().map(|&i| dataset.rows[i].pa).collect();
    let ratings = synthetic_ratings(&pa, dataset.config.base_seed);
    report.spearman_pa = spearman(&pa, &ratings)?;
    Ok(report)
}

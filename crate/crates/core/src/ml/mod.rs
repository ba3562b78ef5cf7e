//! Dataset assembly, PCA, three classifiers and their evaluation, all
//! bit-reproducible under fixed seeds.

pub mod dataset;
pub mod eval;
pub mod forest;
pub mod logreg;
pub mod model;
pub mod pca;
pub mod svm;

pub use dataset::{build_dataset, stratified_split, Dataset, DatasetConfig, DatasetSidecar, Split, Standardization};
pub use eval::{evaluate, fractional_ranks, spearman, synthetic_ratings, EvalReport};
pub use forest::{ForestParams, RandomForest};
pub use logreg::{LogisticRegression, LogregParams};
pub use model::{train, Classifier, ModelKind, ModelSpec, TrainedModel};
pub use pca::Pca;
pub use svm::{LinearSvm, SvmParams};

/// Index of the largest value, first on ties.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn argmax_counts(v: &[usize]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax_counts(&[2, 2, 1]), 0);
    }
}

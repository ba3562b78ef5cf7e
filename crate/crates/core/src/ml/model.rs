use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, CLASSES};
use super::forest::{ForestParams, RandomForest};
use super::logreg::{LogisticRegression, LogregParams};
use super::svm::{LinearSvm, SvmParams};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "soundq-model/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Logreg,
    RandomForest,
    Svm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Logreg, ModelKind::RandomForest, ModelKind::Svm];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::RandomForest => "random-forest",
            ModelKind::Svm => "svm",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logreg" | "logistic" => Ok(ModelKind::Logreg),
            "rf" | "random-forest" | "forest" => Ok(ModelKind::RandomForest),
            "svm" => Ok(ModelKind::Svm),
            other => Err(Error::param(format!("unknown model kind '{other}' (expected logreg, rf or svm)"))),
        }
    }
}

/// Hyperparameters of one training run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Logreg(LogregParams),
    RandomForest(ForestParams),
    Svm(SvmParams),
}

impl ModelSpec {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Logreg => ModelSpec::Logreg(LogregParams::default()),
            ModelKind::RandomForest => ModelSpec::RandomForest(ForestParams::default()),
            ModelKind::Svm => ModelSpec::Svm(SvmParams::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Logreg(_) => ModelKind::Logreg,
            ModelSpec::RandomForest(_) => ModelKind::RandomForest,
            ModelSpec::Svm(_) => ModelKind::Svm,
        }
    }

    /// `None` for deterministic-by-construction training.
    pub fn training_seed(&self) -> Option<u64> {
        match self {
            ModelSpec::Logreg(_) => None,
            ModelSpec::RandomForest(p) => Some(p.seed),
            ModelSpec::Svm(p) => Some(p.seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Classifier {
    Logreg(LogisticRegression),
    RandomForest(RandomForest),
    Svm(LinearSvm),
}

/// A fitted classifier bound to the dataset it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub dataset_fingerprint: String,
    pub training_seed: Option<u64>,
    pub classifier: Classifier,
}

/// Fits `spec` on the standardized train split.
pub fn train(dataset: &Dataset, spec: &ModelSpec) -> Result<TrainedModel> {
    let (x, y) = dataset.train_matrix();
    let classifier = match *spec {
        ModelSpec::Logreg(p) => Classifier::Logreg(LogisticRegression::fit(&x, &y, CLASSES, p)?),
        ModelSpec::RandomForest(p) => Classifier::RandomForest(RandomForest::fit(&x, &y, CLASSES, p)?),
        ModelSpec::Svm(p) => Classifier::Svm(LinearSvm::fit(&x, &y, CLASSES, p)?),
    };
    Ok(TrainedModel {
        format: MODEL_FORMAT.to_string(),
        dataset_fingerprint: dataset.fingerprint(),
        training_seed: spec.training_seed(),
        classifier,
    })
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self.classifier {
            Classifier::Logreg(_) => ModelKind::Logreg,
            Classifier::RandomForest(_) => ModelKind::RandomForest,
            Classifier::Svm(_) => ModelKind::Svm,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        self.kind().name()
    }

    /// Predicted class index for a standardized feature row.
    pub fn predict(&self, x: &[f64]) -> usize {
        match &self.classifier {
            Classifier::Logreg(m) => m.predict(x),
            Classifier::RandomForest(m) => m.predict(x),
            Classifier::Svm(m) => m.predict(x),
        }
    }

    pub fn check_dataset(&self, dataset: &Dataset) -> Result<()> {
        let fp = dataset.fingerprint();
        if fp != self.dataset_fingerprint {
            return Err(Error::Mismatch(format!(
                "model was trained on dataset {} but was given {fp}",
                self.dataset_fingerprint
            )));
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let m: Self = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        if m.format != MODEL_FORMAT {
            return Err(Error::Format(format!("unsupported model format '{}'", m.format)));
        }
        Ok(m)
    }
}

//! Labeled feature datasets with a frozen, stratified train/test split.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::{analyze_all, annoyance, AnalysisConfig, FeatureVector, FEATURE_VARIANTS};
use crate::rng::{derive_seed, Xoshiro256StarStar};
use crate::stimuli::{jittered_spec, synth, StimulusClass};

pub const FEATURES: usize = 6;
pub const CLASSES: usize = 3;

/// Stream tag separating the split generator from stimulus seeds.
const SPLIT_STREAM: u64 = 0x7370_6C69_745F_7374;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub n_per_class: usize,
    pub base_seed: u64,
    pub train_fraction: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { n_per_class: 100, base_seed: 123, train_fraction: 0.7 }
    }
}

/// Sorted, disjoint row indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class shuffle with one generator, first `round(fraction·n_c)` rows of
/// each class to train.
pub fn stratified_split(labels: &[StimulusClass], train_fraction: f64, seed: u64) -> Split {
    let mut rng = Xoshiro256StarStar::seed_from_u64(derive_seed(seed, SPLIT_STREAM));
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in StimulusClass::ALL {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        rng.shuffle(&mut idx);
        let n_train = (idx.len() as f64 * train_fraction).round() as usize;
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Split { train, test }
}

/// Train-set z-score statistics. Features with zero train variance are
/// centered but not scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: [f64; FEATURES],
    pub std: [f64; FEATURES],
    pub centered_only: [bool; FEATURES],
}

impl Standardization {
    /// Population mean and standard deviation of `rows`; returns a warning
    /// per constant feature.
    pub fn fit(rows: &[[f64; FEATURES]]) -> Result<(Self, Vec<String>)> {
        if rows.is_empty() {
            return Err(Error::precondition("cannot standardize an empty train split"));
        }
        let n = rows.len() as f64;
        let mut mean = [0.0; FEATURES];
        let mut std = [0.0; FEATURES];
        let mut centered_only = [false; FEATURES];
        let mut warnings = Vec::new();
        for j in 0..FEATURES {
            mean[j] = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            std[j] = (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
            if std[j] <= f64::EPSILON * mean[j].abs() {
                centered_only[j] = true;
                warnings.push(format!(
                    "feature '{}' is constant on the train split; centered only",
                    FeatureVector::NAMES[j]
                ));
            }
        }
        Ok((Self { mean, std, centered_only }, warnings))
    }

    pub fn transform(&self, x: &[f64; FEATURES]) -> [f64; FEATURES] {
        std::array::from_fn(|j| {
            let c = x[j] - self.mean[j];
            if self.centered_only[j] {
                c
            } else {
                c / self.std[j]
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Every row carries its label.
    pub rows: Vec<FeatureVector>,
    pub split: Split,
    pub config: DatasetConfig,
    pub analysis: AnalysisConfig,
    pub standardization: Standardization,
    pub warnings: Vec<String>,
}

/// Synthesizes and analyzes `n_per_class` jittered stimuli per class.
///
/// Rows are class-major; row `i` is generated from `jittered_spec(class,
/// base_seed, i)`, so every row is independent of every other and of the
/// thread schedule.
pub fn build_dataset(config: &DatasetConfig, analysis: &AnalysisConfig) -> Result<Dataset> {
    if config.n_per_class < 10 {
        return Err(Error::param(format!("n_per_class must be at least 10, got {}", config.n_per_class)));
    }
    if !(config.train_fraction > 0.0 && config.train_fraction < 1.0) {
        return Err(Error::param(format!("train_fraction {} must lie in (0, 1)", config.train_fraction)));
    }
    let n = config.n_per_class;
    let rows = (0..CLASSES * n)
        .into_par_iter()
        .map(|i| {
            let class = StimulusClass::ALL[i / n];
            let spec = jittered_spec(class, config.base_seed, i as u64);
            synth(&spec)
                .and_then(|s| analyze_all(&s, analysis))
                .map(|fv| fv.with_label(class))
                .map_err(|e| Error::Stimulus { spec: format!("{spec:?}"), source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::from_rows(rows, *config, analysis.clone())
}

impl Dataset {
    /// Draws the split and fits standardization on the train rows.
    pub fn from_rows(rows: Vec<FeatureVector>, config: DatasetConfig, analysis: AnalysisConfig) -> Result<Self> {
        let labels = labels_of(&rows)?;
        let split = stratified_split(&labels, config.train_fraction, config.base_seed);
        Self::with_split(rows, split, config, analysis)
    }

    fn with_split(rows: Vec<FeatureVector>, split: Split, config: DatasetConfig, analysis: AnalysisConfig) -> Result<Self> {
        let train: Vec<_> = split.train.iter().map(|&i| rows[i].to_array()).collect();
        let (standardization, warnings) = Standardization::fit(&train)?;
        Ok(Self { rows, split, config, analysis, standardization, warnings })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn label(&self, i: usize) -> StimulusClass {
        self.rows[i].label.expect("dataset rows are labeled")
    }

    pub fn standardized(&self, i: usize) -> [f64; FEATURES] {
        self.standardization.transform(&self.rows[i].to_array())
    }

    /// Standardized features and class indices of the given rows.
    pub fn matrix(&self, indices: &[usize]) -> (Vec<[f64; FEATURES]>, Vec<usize>) {
        indices.iter().map(|&i| (self.standardized(i), self.label(i).index())).unzip()
    }

    pub fn train_matrix(&self) -> (Vec<[f64; FEATURES]>, Vec<usize>) {
        self.matrix(&self.split.train)
    }

    pub fn test_matrix(&self) -> (Vec<[f64; FEATURES]>, Vec<usize>) {
        self.matrix(&self.split.test)
    }

    /// SHA-256 over the row values (bit patterns), labels, split and seed.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.config.base_seed.to_le_bytes());
        h.update((self.rows.len() as u64).to_le_bytes());
        for row in &self.rows {
            for v in row.to_array() {
                h.update(v.to_bits().to_le_bytes());
            }
            h.update([row.label.map_or(u8::MAX, |c| c.index() as u8)]);
        }
        for part in [&self.split.train, &self.split.test] {
            h.update((part.len() as u64).to_le_bytes());
            for &i in part {
                h.update((i as u64).to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    /// The JSON sidecar that accompanies a dataset CSV.
    pub fn sidecar_path(csv_path: &Path) -> PathBuf {
        csv_path.with_extension("json")
    }

    pub fn write_csv_to<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(["n", "s", "r", "f", "t", "pa", "label"])?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut rec: Vec<String> = row.to_array().iter().map(|v| v.to_string()).collect();
            rec.push(self.label(i).name().to_string());
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn sidecar(&self) -> DatasetSidecar {
        DatasetSidecar {
            config: self.config,
            analysis: self.analysis.clone(),
            feature_variants: FEATURE_VARIANTS.iter().map(|v| v.to_string()).collect(),
            split: self.split.clone(),
            standardization: self.standardization,
            warnings: self.warnings.clone(),
            fingerprint: self.fingerprint(),
        }
    }

    /// Writes `path` (CSV) and its JSON sidecar; returns the sidecar path.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        self.write_csv_to(BufWriter::new(File::create(path)?))?;
        let side = Self::sidecar_path(path);
        let mut w = BufWriter::new(File::create(&side)?);
        serde_json::to_writer_pretty(&mut w, &self.sidecar())?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(side)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let side = Self::sidecar_path(path);
        let sidecar: DatasetSidecar = serde_json::from_reader(BufReader::new(File::open(&side)?))?;
        Self::from_parts(BufReader::new(File::open(path)?), sidecar)
    }

    /// Rebuilds a dataset from CSV rows and a sidecar, checking the
    /// fingerprint and the annoyance consistency of every row.
    pub fn from_parts<R: Read>(csv_reader: R, sidecar: DatasetSidecar) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(csv_reader);
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["n", "s", "r", "f", "t", "pa", "label"] {
            return Err(Error::Format(format!("unexpected dataset header {:?}", header)));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |j: usize| -> Result<f64> {
                rec[j].parse::<f64>().map_err(|e| Error::Format(format!("row {line}, column {j}: {e}")))
            };
            let label: StimulusClass = rec[6].parse().map_err(|e: Error| Error::Format(format!("row {line}: {e}")))?;
            let fv = FeatureVector { n: num(0)?, s: num(1)?, r: num(2)?, f: num(3)?, t: num(4)?, pa: num(5)?, label: Some(label) };
            let pa = annoyance(fv.n, fv.s, fv.r, fv.f, &sidecar.analysis.thresholds)
                .map_err(|e| Error::Format(format!("row {line}: {e}")))?
                .value;
            if (pa - fv.pa).abs() > 1e-9 * pa.abs().max(1.0) {
                return Err(Error::Format(format!("row {line}: pa {} disagrees with recomputed {pa}", fv.pa)));
            }
            rows.push(fv);
        }
        check_split(&sidecar.split, rows.len())?;
        let ds = Self {
            rows,
            split: sidecar.split,
            config: sidecar.config,
            analysis: sidecar.analysis,
            standardization: sidecar.standardization,
            warnings: sidecar.warnings,
        };
        let fp = ds.fingerprint();
        if fp != sidecar.fingerprint {
            return Err(Error::Mismatch(format!(
                "dataset rows do not match their sidecar (fingerprint {fp} vs {})",
                sidecar.fingerprint
            )));
        }
        Ok(ds)
    }
}

fn labels_of(rows: &[FeatureVector]) -> Result<Vec<StimulusClass>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| r.label.ok_or_else(|| Error::param(format!("row {i} has no label"))))
        .collect()
}

fn check_split(split: &Split, n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in split.train.iter().chain(&split.test) {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Format(format!("split index {i} is out of range or repeated")));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Format("split does not cover every row".into()));
    }
    Ok(())
}

/// JSON companion of a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub config: DatasetConfig,
    pub analysis: AnalysisConfig,
    pub feature_variants: Vec<String>,
    pub split: Split,
    pub standardization: Standardization,
    pub warnings: Vec<String>,
    pub fingerprint: String,
}

//! Psychoacoustic metric proxies and BS.1770 program loudness.
//!
//! Every result carries its unit and a variant tag naming the recipe that
//! produced it, so proxy values are never mistaken for standard-conformant
//! ones.

mod annoyance;
mod loudness;
mod lufs;
mod modulation;
mod sharpness;
mod tonality;

pub use annoyance::{annoyance, AnnoyanceThresholds};
pub use loudness::{loudness_rms, loudness_zwicker_proxy, specific_loudness, reference_band_energy};
pub use lufs::{k_weighting, lufs_integrated, ProgramLoudness};
pub use modulation::{fluctuation_proxy, roughness_proxy};
pub use sharpness::{sharpness_centroid, sharpness_weighted, sharpness_weight};
pub use tonality::{smoothed_psd_db, tonality_from_psd, tonality_proxy, TonalPeak, Tonality};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::signal::{hilbert_envelope, welch_psd, Signal, WelchParams};
use crate::stimuli::StimulusClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "sone-proxy")]
    SoneProxy,
    #[serde(rename = "acum-proxy")]
    AcumProxy,
    #[serde(rename = "asper-proxy")]
    AsperProxy,
    #[serde(rename = "vacil-proxy")]
    VacilProxy,
    #[serde(rename = "tonality-units")]
    Tonality,
    #[serde(rename = "pa-units")]
    Annoyance,
    #[serde(rename = "LUFS")]
    Lufs,
    #[serde(rename = "rms")]
    Rms,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricValue {
    pub value: f64,
    pub unit: Unit,
    pub variant: &'static str,
}

impl MetricValue {
    pub(crate) fn new(value: f64, unit: Unit, variant: &'static str) -> Self {
        debug_assert!(value.is_finite(), "{variant} produced {value}");
        Self { value, unit, variant }
    }
}

/// Every tunable of the analysis chain. Defaults reproduce the reference
/// configuration; the full record is hashed into each serialized result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub welch_segment: usize,
    pub welch_overlap: f64,
    pub loudness_exponent: f64,
    /// Level of the 1-Bark reference noise band that reads 1 sone-proxy.
    pub loudness_ref_dbfs: f64,
    pub roughness_band_hz: (f64, f64),
    pub fluctuation_cutoff_hz: f64,
    /// Fraction discarded at each end before envelope statistics.
    pub edge_trim: f64,
    pub tonality_smoothing_bark: f64,
    pub tonality_threshold_db: f64,
    pub tonality_ref_db: f64,
    /// Dynamic range below the PSD maximum that tonality analysis resolves.
    pub tonality_floor_db: f64,
    pub thresholds: AnnoyanceThresholds,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            welch_segment: 8192,
            welch_overlap: 0.5,
            loudness_exponent: 0.23,
            loudness_ref_dbfs: -34.0,
            roughness_band_hz: (15.0, 300.0),
            fluctuation_cutoff_hz: 20.0,
            edge_trim: 0.05,
            tonality_smoothing_bark: 2.0,
            tonality_threshold_db: 6.0,
            tonality_ref_db: 1.0,
            tonality_floor_db: 120.0,
            thresholds: AnnoyanceThresholds::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn welch(&self) -> WelchParams {
        WelchParams { segment: self.welch_segment, overlap: self.welch_overlap }
    }

    /// Short content hash of the configuration.
    pub fn params_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }
}

/// The six-metric feature vector `[N, S, R, F, T, PA]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub n: f64,
    pub s: f64,
    pub r: f64,
    pub f: f64,
    pub t: f64,
    pub pa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<StimulusClass>,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 6] = ["n", "s", "r", "f", "t", "pa"];

    pub fn to_array(&self) -> [f64; 6] {
        [self.n, self.s, self.r, self.f, self.t, self.pa]
    }

    pub fn with_label(mut self, label: StimulusClass) -> Self {
        self.label = Some(label);
        self
    }
}

pub const FEATURE_VARIANTS: [&str; 6] = [
    loudness::ZWICKER_VARIANT,
    sharpness::WEIGHTED_VARIANT,
    modulation::ROUGHNESS_VARIANT,
    modulation::FLUCTUATION_VARIANT,
    tonality::VARIANT,
    annoyance::VARIANT,
];

/// Computes N, S, R, F, T and then PA from the first four.
///
/// The Welch PSD and the Hilbert envelope are computed once and shared;
/// results are bit-identical to calling each metric on its own.
pub fn analyze_all(signal: &Signal, config: &AnalysisConfig) -> Result<FeatureVector> {
    signal.require_duration(1.0, "analyze_all")?;
    let psd = welch_psd(signal, config.welch()).map_err(|e| e.in_metric("loudness_zwicker_proxy"))?;
    let specific = loudness::specific_loudness_from_psd(&psd, config);
    let n = loudness::total_loudness(&specific);
    let s = sharpness::weighted_from_specific(&specific)?;
    let env = hilbert_envelope(signal).map_err(|e| e.in_metric("roughness_proxy"))?;
    let r = modulation::roughness_from_envelope(&env, config)?;
    let f = modulation::fluctuation_from_envelope(&env, config)?;
    let t = tonality_from_psd(&psd, config).value;
    let pa = annoyance(n.value, s.value, r.value, f.value, &config.thresholds)?;
    Ok(FeatureVector { n: n.value, s: s.value, r: r.value, f: f.value, t: t.value, pa: pa.value, label: None })
}

/// One serialized metric result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub metric: String,
    /// `None` only for program loudness below the absolute gate.
    pub value: Option<f64>,
    pub unit: Unit,
    pub variant: String,
    pub params_hash: String,
}

/// Outcome of one entry of [`analyze_records`].
#[derive(Debug)]
pub struct RecordOutcome {
    pub metric: &'static str,
    pub result: Result<MetricRecord>,
}

/// The six features plus program loudness and RMS level, each as a record.
pub fn analyze_records(signal: &Signal, config: &AnalysisConfig) -> Vec<RecordOutcome> {
    let hash = config.params_hash();
    let record = |metric: &'static str, v: MetricValue| MetricRecord {
        metric: metric.to_string(),
        value: Some(v.value),
        unit: v.unit,
        variant: v.variant.to_string(),
        params_hash: hash.clone(),
    };
    let mut out = Vec::with_capacity(8);
    let mut push = |metric: &'static str, result: Result<MetricRecord>| {
        out.push(RecordOutcome { metric, result })
    };

    push("loudness_rms", loudness_rms(signal).map(|v| record("loudness_rms", v)));
    let lufs = lufs_integrated(signal).and_then(|l| match l {
        ProgramLoudness::Lufs(v) => Ok(record("lufs_integrated", MetricValue::new(v, Unit::Lufs, lufs::VARIANT))),
        ProgramLoudness::Undefined => Err(Error::degenerate(
            "lufs_integrated",
            "all blocks fall below the -70 LUFS absolute gate; loudness undefined",
        )),
    });
    push("lufs_integrated", lufs);

    let names = [
        "loudness_zwicker_proxy",
        "sharpness_weighted",
        "roughness_proxy",
        "fluctuation_proxy",
        "tonality_proxy",
    ];
    let n = loudness_zwicker_proxy(signal, config);
    let s = sharpness_weighted(signal, config);
    let r = roughness_proxy(signal, config);
    let f = fluctuation_proxy(signal, config);
    let t = tonality_proxy(signal, config).map(|t| t.value);
    let pa = match (&n, &s, &r, &f) {
        (Ok(n), Ok(s), Ok(r), Ok(f)) => annoyance(n.value, s.value, r.value, f.value, &config.thresholds),
        _ => Err(Error::degenerate("annoyance", "a component metric failed")),
    };
    for (name, v) in names.into_iter().zip([n, s, r, f, t]) {
        push(name, v.map(|v| record(name, v)).map_err(|e| e.in_metric(name)));
    }
    push("annoyance", pa.map(|v| record("annoyance", v)));
    out
}

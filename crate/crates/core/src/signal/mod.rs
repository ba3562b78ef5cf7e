//! Signal representation and the DSP primitives every metric consumes.

mod bark;
mod filter;
mod spectrum;
mod wav;

pub use bark::{bark_band_energies, bark_band_energies_from_psd, bark_to_hz, hz_to_bark, BARK_BANDS};
pub use filter::{bandpass, lowpass, Biquad, ZeroPhaseFilter, ORDER as FILTER_ORDER};
pub use spectrum::{
    fft_magnitude, hann_window, hilbert_envelope, welch_psd, PowerSpectralDensity, Spectrum,
    WelchParams,
};
pub use wav::{read_wav, read_wav_from, write_wav, write_wav_to};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CANONICAL_SAMPLE_RATE: u32 = 48_000;
pub const MIN_SAMPLE_RATE: u32 = 8_000;
/// SPL, in dB, that a 0 dBFS sine maps to unless calibrated otherwise.
pub const DEFAULT_CALIBRATION_DB: f64 = 94.0;

/// Mono audio, full scale = ±1.0.
///
/// Levels in dBFS follow the sine convention: a full-scale sine reads 0 dBFS,
/// so a signal with mean square `p` sits at `10·log10(2p)` dBFS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: u32,
    calibration_offset_db: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate < MIN_SAMPLE_RATE {
            return Err(Error::param(format!(
                "sample rate {sample_rate} Hz is below {MIN_SAMPLE_RATE} Hz"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::param(format!("sample {i} is not finite")));
        }
        Ok(Self { samples, sample_rate, calibration_offset_db: DEFAULT_CALIBRATION_DB })
    }

    pub fn with_calibration(mut self, offset_db: f64) -> Self {
        self.calibration_offset_db = offset_db;
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn calibration_offset_db(&self) -> f64 {
        self.calibration_offset_db
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate as f64 / 2.0
    }

    pub fn mean_square(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64
    }

    pub fn level_dbfs(&self) -> f64 {
        10.0 * (2.0 * self.mean_square()).log10()
    }

    pub fn level_spl(&self) -> f64 {
        self.level_dbfs() + self.calibration_offset_db
    }

    /// Copy with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| x * gain).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn require_len(&self, min: usize, what: &str) -> Result<()> {
        if self.samples.len() < min {
            return Err(Error::precondition(format!(
                "{what} needs at least {min} samples, got {}",
                self.samples.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn require_duration(&self, min_s: f64, what: &str) -> Result<()> {
        if self.duration_s() + 1e-12 < min_s {
            return Err(Error::precondition(format!(
                "{what} needs at least {min_s} s of audio, got {:.3} s",
                self.duration_s()
            )));
        }
        Ok(())
    }
}

/// Instantaneous amplitude of a signal, same length and rate as its source.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Envelope {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.samples)
    }
}

/// Envelope after band-limiting; unlike [`Envelope`] it may go negative.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredEnvelope {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

/// Sampled sequences the filters can run over.
pub trait Waveform {
    type Filtered;
    fn samples(&self) -> &[f64];
    fn sample_rate(&self) -> u32;
    fn filtered(&self, samples: Vec<f64>) -> Self::Filtered;
}

impl Waveform for Signal {
    type Filtered = Signal;
    fn samples(&self) -> &[f64] {
        &self.samples
    }
    fn sample_rate(&self) -> u32 {
        self.sample_rate
    }
    fn filtered(&self, samples: Vec<f64>) -> Signal {
        Signal { samples, ..self.clone() }
    }
}

impl Waveform for Envelope {
    type Filtered = FilteredEnvelope;
    fn samples(&self) -> &[f64] {
        &self.samples
    }
    fn sample_rate(&self) -> u32 {
        self.sample_rate
    }
    fn filtered(&self, samples: Vec<f64>) -> FilteredEnvelope {
        FilteredEnvelope { samples, sample_rate: self.sample_rate }
    }
}

impl Waveform for FilteredEnvelope {
    type Filtered = FilteredEnvelope;
    fn samples(&self) -> &[f64] {
        &self.samples
    }
    fn sample_rate(&self) -> u32 {
        self.sample_rate
    }
    fn filtered(&self, samples: Vec<f64>) -> FilteredEnvelope {
        FilteredEnvelope { samples, sample_rate: self.sample_rate }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn rms(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
    }
}

/// Index range that drops `fraction` of the samples at each end.
pub fn interior(len: usize, fraction: f64) -> std::ops::Range<usize> {
    let cut = (len as f64 * fraction).floor() as usize;
    cut..len.saturating_sub(cut).max(cut)
}

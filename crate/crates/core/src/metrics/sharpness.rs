use super::loudness::specific_loudness_from_psd;
use super::{AnalysisConfig, MetricValue, Unit};
use crate::error::{Error, Result};
use crate::signal::{fft_magnitude, hann_window, welch_psd, Signal, BARK_BANDS};

pub(crate) const CENTROID_VARIANT: &str = "fft-centroid-hann";
pub(crate) const WEIGHTED_VARIANT: &str = "bark-weighted-centroid";

/// Magnitude-weighted mean frequency in kHz.
///
/// The whole signal is Hann-windowed and zero-padded to a power of two; the
/// taper keeps rectangular-window leakage from dragging a pure tone's
/// centroid toward Nyquist.
pub fn sharpness_centroid(signal: &Signal) -> Result<MetricValue> {
    signal.require_len(1, "sharpness_centroid")?;
    let n = signal.len().next_power_of_two().max(16);
    let window = hann_window(signal.len());
    let tapered: Vec<f64> = signal.samples().iter().zip(&window).map(|(x, w)| x * w).collect();
    let tapered = Signal::new(tapered, signal.sample_rate())?;
    let spec = fft_magnitude(&tapered, n)?;
    let mass: f64 = spec.magnitudes.iter().sum();
    if mass <= 0.0 {
        return Err(Error::degenerate("sharpness_centroid", "silent input has no spectral mass"));
    }
    let moment: f64 = spec.bin_freqs.iter().zip(&spec.magnitudes).map(|(f, m)| f * m).sum();
    Ok(MetricValue::new(moment / mass / 1000.0, Unit::AcumProxy, CENTROID_VARIANT))
}

/// High-frequency weighting over band-center rate `z`: unity up to
/// 15.8 Bark, `0.066·exp(0.171·z)` above.
pub fn sharpness_weight(z: f64) -> f64 {
    if z <= 15.8 {
        1.0
    } else {
        0.066 * (0.171 * z).exp()
    }
}

pub(crate) fn weighted_from_specific(specific: &[f64; BARK_BANDS]) -> Result<MetricValue> {
    let total: f64 = specific.iter().sum();
    if total <= 0.0 {
        return Err(Error::degenerate("sharpness_weighted", "silent input has zero loudness"));
    }
    let moment: f64 = specific
        .iter()
        .enumerate()
        .map(|(band, n)| {
            let z = band as f64 + 0.5;
            sharpness_weight(z) * n * z
        })
        .sum();
    Ok(MetricValue::new(moment / total, Unit::AcumProxy, WEIGHTED_VARIANT))
}

/// Loudness-weighted band-center rate with high-frequency emphasis.
pub fn sharpness_weighted(signal: &Signal, config: &AnalysisConfig) -> Result<MetricValue> {
    let psd = welch_psd(signal, config.welch())?;
    weighted_from_specific(&specific_loudness_from_psd(&psd, config))
}

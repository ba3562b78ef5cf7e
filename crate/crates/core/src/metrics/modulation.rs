//! Envelope-modulation proxies: roughness (15–300 Hz) and fluctuation
//! strength (below 20 Hz). Both are normalized by the mean envelope, which
//! makes them gain-invariant measures of modulation depth.

use super::{AnalysisConfig, MetricValue, Unit};
use crate::error::{Error, Result};
use crate::signal::{hilbert_envelope, interior, mean, rms, Envelope, Signal, ZeroPhaseFilter};

pub(crate) const ROUGHNESS_VARIANT: &str = "hilbert-bandpass-rms";
pub(crate) const FLUCTUATION_VARIANT: &str = "hilbert-lowpass-variance";

/// Mean envelope below this counts as silence.
const SILENT_ENVELOPE: f64 = 1e-12;

fn mean_envelope(env: &Envelope, metric: &'static str) -> Result<f64> {
    let m = env.mean();
    if m <= SILENT_ENVELOPE {
        return Err(Error::degenerate(metric, "mean envelope is zero (silent input)"));
    }
    Ok(m)
}

pub(crate) fn roughness_from_envelope(env: &Envelope, config: &AnalysisConfig) -> Result<MetricValue> {
    let m = mean_envelope(env, "roughness_proxy")?;
    let (lo, hi) = config.roughness_band_hz;
    let band = ZeroPhaseFilter::bandpass(lo, hi, env.sample_rate())?.apply(env.samples());
    let keep = interior(band.len(), config.edge_trim);
    Ok(MetricValue::new(rms(&band[keep]) / m, Unit::AsperProxy, ROUGHNESS_VARIANT))
}

pub(crate) fn fluctuation_from_envelope(env: &Envelope, config: &AnalysisConfig) -> Result<MetricValue> {
    let m = mean_envelope(env, "fluctuation_proxy")?;
    let centered: Vec<f64> = env.samples().iter().map(|v| v - m).collect();
    let slow = ZeroPhaseFilter::lowpass(config.fluctuation_cutoff_hz, env.sample_rate())?.apply(&centered);
    let kept = &slow[interior(slow.len(), config.edge_trim)];
    let mu = mean(kept);
    let var = kept.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / kept.len() as f64;
    Ok(MetricValue::new(var / (m * m), Unit::VacilProxy, FLUCTUATION_VARIANT))
}

/// RMS of the 15–300 Hz band of the Hilbert envelope over its mean.
pub fn roughness_proxy(signal: &Signal, config: &AnalysisConfig) -> Result<MetricValue> {
    signal.require_duration(0.5, "roughness_proxy")?;
    roughness_from_envelope(&hilbert_envelope(signal)?, config)
}

/// Variance of the sub-20 Hz envelope over the squared mean envelope.
pub fn fluctuation_proxy(signal: &Signal, config: &AnalysisConfig) -> Result<MetricValue> {
    signal.require_duration(1.0, "fluctuation_proxy")?;
    fluctuation_from_envelope(&hilbert_envelope(signal)?, config)
}

use super::{AnalysisConfig, MetricValue, Unit};
use crate::error::Result;
use crate::signal::{bark_band_energies_from_psd, rms, welch_psd, PowerSpectralDensity, Signal, BARK_BANDS};

pub(crate) const RMS_VARIANT: &str = "rms";
pub(crate) const ZWICKER_VARIANT: &str = "bark-power-law";

pub fn loudness_rms(signal: &Signal) -> Result<MetricValue> {
    signal.require_len(1, "loudness_rms")?;
    Ok(MetricValue::new(rms(signal.samples()), Unit::Rms, RMS_VARIANT))
}

/// Band energy (mean square) of the reference noise band: a level of
/// `ref_dbfs` on the sine scale, i.e. `10^(ref_dbfs/10) / 2`.
pub fn reference_band_energy(ref_dbfs: f64) -> f64 {
    0.5 * 10f64.powf(ref_dbfs / 10.0)
}

/// Specific loudness per unit-Bark band: `(E_z / E_ref)^exponent`.
pub fn specific_loudness(energies: &[f64; BARK_BANDS], config: &AnalysisConfig) -> [f64; BARK_BANDS] {
    let e_ref = reference_band_energy(config.loudness_ref_dbfs);
    energies.map(|e| (e / e_ref).powf(config.loudness_exponent))
}

pub(crate) fn specific_loudness_from_psd(psd: &PowerSpectralDensity, config: &AnalysisConfig) -> [f64; BARK_BANDS] {
    specific_loudness(&bark_band_energies_from_psd(psd), config)
}

pub(crate) fn total_loudness(specific: &[f64; BARK_BANDS]) -> MetricValue {
    MetricValue::new(specific.iter().sum(), Unit::SoneProxy, ZWICKER_VARIANT)
}

/// Sum of per-band power-law loudness over the 24 critical bands.
pub fn loudness_zwicker_proxy(signal: &Signal, config: &AnalysisConfig) -> Result<MetricValue> {
    let psd = welch_psd(signal, config.welch())?;
    Ok(total_loudness(&specific_loudness_from_psd(&psd, config)))
}

use serde::Serialize;

use super::{AnalysisConfig, MetricValue, Unit};
use crate::error::Result;
use crate::signal::{hz_to_bark, welch_psd, PowerSpectralDensity, Signal};

pub(crate) const VARIANT: &str = "psd-prominence";

/// A spectral line standing out from the smoothed PSD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TonalPeak {
    pub freq: f64,
    pub level_db: f64,
    pub baseline_db: f64,
    pub prominence_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tonality {
    pub value: MetricValue,
    /// Peaks at or above the detection threshold, strongest first.
    pub peaks: Vec<TonalPeak>,
}

/// PSD in dB and its centered moving average over `±width/2` Bark.
///
/// The DC and Nyquist bins are excluded; index `i` of both outputs maps to
/// PSD bin `i + 1`. Levels are clamped at `floor_db` below the PSD maximum,
/// which keeps the result invariant to gain. Returns empty vectors for an
/// all-zero PSD.
pub fn smoothed_psd_db(psd: &PowerSpectralDensity, width_bark: f64, floor_db: f64) -> (Vec<f64>, Vec<f64>) {
    let n = psd.psd.len();
    if n < 3 {
        return (Vec::new(), Vec::new());
    }
    let inner = 1..n - 1;
    let peak = psd.psd[inner.clone()].iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return (Vec::new(), Vec::new());
    }
    let floor = peak * 10f64.powf(-floor_db / 10.0);
    let level: Vec<f64> = psd.psd[inner.clone()].iter().map(|p| 10.0 * p.max(floor).log10()).collect();
    let bark: Vec<f64> = psd.bin_freqs[inner].iter().map(|&f| hz_to_bark(f)).collect();

    let mut prefix = vec![0.0; level.len() + 1];
    for (i, v) in level.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    let half = width_bark / 2.0;
    let (mut lo, mut hi) = (0usize, 0usize);
    let baseline = bark
        .iter()
        .map(|&z| {
            while bark[lo] < z - half {
                lo += 1;
            }
            while hi < bark.len() && bark[hi] <= z + half {
                hi += 1;
            }
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect();
    (level, baseline)
}

/// Tonal prominence from a precomputed PSD.
pub fn tonality_from_psd(psd: &PowerSpectralDensity, config: &AnalysisConfig) -> Tonality {
    let (level, baseline) = smoothed_psd_db(psd, config.tonality_smoothing_bark, config.tonality_floor_db);
    let mut peaks = Vec::new();
    for k in 1..level.len().saturating_sub(1) {
        if level[k] > level[k - 1] && level[k] >= level[k + 1] {
            let prominence_db = level[k] - baseline[k];
            if prominence_db >= config.tonality_threshold_db {
                peaks.push(TonalPeak {
                    freq: psd.bin_freqs[k + 1],
                    level_db: level[k],
                    baseline_db: baseline[k],
                    prominence_db,
                });
            }
        }
    }
    peaks.sort_by(|a, b| b.prominence_db.total_cmp(&a.prominence_db).then(a.freq.total_cmp(&b.freq)));
    let t = peaks.first().map_or(0.0, |p| p.prominence_db / config.tonality_ref_db);
    Tonality { value: MetricValue::new(t, Unit::Tonality, VARIANT), peaks }
}

/// Maximum prominence (in units of the reference level step) of any PSD
/// line over its 2-Bark moving-average baseline; zero when nothing clears
/// the detection threshold.
pub fn tonality_proxy(signal: &Signal, config: &AnalysisConfig) -> Result<Tonality> {
    let psd = welch_psd(signal, config.welch())?;
    Ok(tonality_from_psd(&psd, config))
}

use super::{welch_psd, PowerSpectralDensity, Signal, WelchParams};
use crate::error::Result;

pub const BARK_BANDS: usize = 24;

/// Critical-band rate (Zwicker's arctangent approximation).
pub fn hz_to_bark(f: f64) -> f64 {
    13.0 * (0.00076 * f).atan() + 3.5 * (f / 7500.0).powi(2).atan()
}

/// Inverse of [`hz_to_bark`] by bisection; `z` must be below the
/// asymptote of 13·π/2 + 3.5·π/2 Bark.
pub fn bark_to_hz(z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0e6_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hz_to_bark(mid) < z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Energy per unit-Bark band `[z, z+1)`, `z = 0..23`, from a Welch PSD.
/// Bins at or above 24 Bark are dropped.
pub fn bark_band_energies_from_psd(psd: &PowerSpectralDensity) -> [f64; BARK_BANDS] {
    let df = psd.bin_width();
    let mut bands = [0.0; BARK_BANDS];
    for (&f, &p) in psd.bin_freqs.iter().zip(&psd.psd) {
        let z = hz_to_bark(f);
        if z < BARK_BANDS as f64 {
            bands[z.floor() as usize] += p * df;
        }
    }
    bands
}

pub fn bark_band_energies(signal: &Signal, params: WelchParams) -> Result<[f64; BARK_BANDS]> {
    Ok(bark_band_energies_from_psd(&welch_psd(signal, params)?))
}

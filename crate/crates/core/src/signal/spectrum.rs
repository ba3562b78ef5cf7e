use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{Envelope, Signal};
use crate::error::{Error, Result};

/// One-sided magnitude spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bin_freqs: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl Spectrum {
    /// Total power implied by the one-sided amplitudes: DC and Nyquist count
    /// in full, every other bin as a sinusoid of that amplitude.
    pub fn total_power(&self) -> f64 {
        let last = self.magnitudes.len() - 1;
        self.magnitudes
            .iter()
            .enumerate()
            .map(|(k, m)| if k == 0 || k == last { m * m } else { m * m / 2.0 })
            .sum()
    }
}

/// Magnitude spectrum of `n` points of `signal`, zero-padded or truncated,
/// rectangular window. Amplitudes are scaled so a unit sine on an exact bin
/// reads 1.0: `2/n` for interior bins, `1/n` for DC and Nyquist.
pub fn fft_magnitude(signal: &Signal, n: usize) -> Result<Spectrum> {
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::param(format!("transform size {n} must be a power of two >= 16")));
    }
    signal.require_len(1, "fft_magnitude")?;
    let mut buf: Vec<Complex<f64>> = signal
        .samples()
        .iter()
        .take(n)
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n)
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let fs = signal.sample_rate() as f64;
    let bin_freqs = (0..=half).map(|k| k as f64 * fs / n as f64).collect();
    let magnitudes = (0..=half)
        .map(|k| {
            let scale = if k == 0 || k == half { 1.0 } else { 2.0 };
            buf[k].norm() * scale / n as f64
        })
        .collect();
    Ok(Spectrum { bin_freqs, magnitudes })
}

/// Periodic Hann window (the DFT-even form).
pub fn hann_window(len: usize) -> Vec<f64> {
    (0..len).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchParams {
    pub segment: usize,
    pub overlap: f64,
}

impl Default for WelchParams {
    fn default() -> Self {
        Self { segment: 8192, overlap: 0.5 }
    }
}

/// Welch estimate, one-sided, in power per Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectralDensity {
    pub bin_freqs: Vec<f64>,
    pub psd: Vec<f64>,
    pub segment: usize,
    pub overlap: f64,
    pub window: &'static str,
    pub sample_rate: u32,
}

impl PowerSpectralDensity {
    pub fn bin_width(&self) -> f64 {
        self.sample_rate as f64 / self.segment as f64
    }

    /// Rectangle-rule integral of the PSD over all bins.
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.bin_width()
    }
}

/// Averaged periodogram over Hann-windowed segments of the mean-removed signal.
///
/// Density scaling makes the integral over frequency equal the signal
/// variance, so a sine of amplitude `A` integrates to `A²/2`. The mean is
/// removed once for the whole signal: per-segment detrending of a tone would
/// leak a spurious line into the lowest bins.
pub fn welch_psd(signal: &Signal, params: WelchParams) -> Result<PowerSpectralDensity> {
    let WelchParams { segment, overlap } = params;
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::param(format!("overlap {overlap} must lie in [0, 1)")));
    }
    if segment < 2 {
        return Err(Error::param(format!("segment length {segment} is too short")));
    }
    if segment > signal.len() {
        return Err(Error::param(format!(
            "segment length {segment} exceeds signal length {}",
            signal.len()
        )));
    }
    let step = segment - (segment as f64 * overlap).floor() as usize;
    let window = hann_window(segment);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let fs = signal.sample_rate() as f64;
    let half = segment / 2;

    let fft = FftPlanner::new().plan_fft_forward(segment);
    let mut acc = vec![0.0; half + 1];
    let mut buf = vec![Complex::new(0.0, 0.0); segment];
    let mut count = 0usize;
    let x = signal.samples();
    let mean = super::mean(x);
    let mut start = 0;
    while start + segment <= x.len() {
        let seg = &x[start..start + segment];
        for ((b, &s), &w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex::new((s - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += step;
    }

    let norm = 1.0 / (fs * window_power * count as f64);
    let psd = acc
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let one_sided = if k == 0 || (segment % 2 == 0 && k == half) { 1.0 } else { 2.0 };
            p * norm * one_sided
        })
        .collect();
    let bin_freqs = (0..=half).map(|k| k as f64 * fs / segment as f64).collect();
    Ok(PowerSpectralDensity {
        bin_freqs,
        psd,
        segment,
        overlap,
        window: "hann",
        sample_rate: signal.sample_rate(),
    })
}

/// Magnitude of the analytic signal, built in the frequency domain by
/// doubling positive frequencies and zeroing negative ones.
pub fn hilbert_envelope(signal: &Signal) -> Result<Envelope> {
    signal.require_len(16, "hilbert_envelope")?;
    let n = signal.len();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<f64>> =
        signal.samples().iter().map(|&x| Complex::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);

    let positive_end = n.div_ceil(2);
    for b in &mut buf[1..positive_end] {
        *b *= 2.0;
    }
    // Even n keeps the Nyquist bin at unit weight.
    let negative_start = if n % 2 == 0 { n / 2 + 1 } else { positive_end };
    for b in &mut buf[negative_start..] {
        *b = Complex::new(0.0, 0.0);
    }
    planner.plan_fft_inverse(n).process(&mut buf);

    let scale = 1.0 / n as f64;
    Ok(Envelope {
        samples: buf.iter().map(|c| c.norm() * scale).collect(),
        sample_rate: signal.sample_rate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Gaussian;

    fn sine(freq: f64, amp: f64, n: usize, fs: u32) -> Signal {
        let x = (0..n).map(|i| amp * (2.0 * PI * freq * i as f64 / fs as f64).sin()).collect();
        Signal::new(x, fs).unwrap()
    }

    /// Direct O(n²) DFT, one-sided amplitudes with the same scaling.
    fn dft_oracle(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, &v) in x.iter().enumerate() {
                    let ph = -2.0 * PI * (k * t) as f64 / n as f64;
                    re += v * ph.cos();
                    im += v * ph.sin();
                }
                let scale = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
                (re * re + im * im).sqrt() * scale / n as f64
            })
            .collect()
    }

    #[test]
    fn unit_sine_on_bin_reads_one() {
        let fs = 48_000;
        let n = 1024;
        let freq = 32.0 * fs as f64 / n as f64;
        let spec = fft_magnitude(&sine(freq, 1.0, n, fs), n).unwrap();
        for (k, m) in spec.magnitudes.iter().enumerate() {
            if k == 32 {
                assert!((m - 1.0).abs() < 1e-6);
            } else {
                assert!(*m <= 1e-6, "bin {k}: {m}");
            }
        }
    }

    #[test]
    fn dc_reads_its_value() {
        let sig = Signal::new(vec![0.3; 256], 48_000).unwrap();
        let spec = fft_magnitude(&sig, 256).unwrap();
        assert!((spec.magnitudes[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn two_sines_match_direct_dft() {
        let fs = 8_000;
        let n = 64;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs as f64;
                0.5 * (2.0 * PI * 5.0 * 125.0 * t).sin() + 0.5 * (2.0 * PI * 12.0 * 125.0 * t).cos()
            })
            .collect();
        let oracle = dft_oracle(&x);
        let spec = fft_magnitude(&Signal::new(x, fs).unwrap(), n).unwrap();
        for (a, b) in spec.magnitudes.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((spec.magnitudes[5] - 0.5).abs() < 1e-12);
        assert!((spec.magnitudes[12] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_transform_size() {
        let sig = Signal::new(vec![0.0; 100], 48_000).unwrap();
        assert!(matches!(fft_magnitude(&sig, 100), Err(Error::Parameter(_))));
        assert!(matches!(fft_magnitude(&sig, 8), Err(Error::Parameter(_))));
    }

    #[test]
    fn parseval_on_full_length_transform() {
        let mut g = Gaussian::seed_from_u64(3);
        let x: Vec<f64> = (0..4096).map(|_| g.sample()).collect();
        let energy = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        let spec = fft_magnitude(&Signal::new(x, 48_000).unwrap(), 4096).unwrap();
        assert!((spec.total_power() / energy - 1.0).abs() < 1e-6);
    }

    #[test]
    fn welch_white_noise_integrates_to_variance() {
        let mut g = Gaussian::seed_from_u64(11);
        let x: Vec<f64> = (0..480_000).map(|_| g.sample()).collect();
        let var = {
            let m = super::super::mean(&x);
            x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
        };
        let psd = welch_psd(&Signal::new(x, 48_000).unwrap(), WelchParams::default()).unwrap();
        assert!((psd.total_power() - 1.0).abs() < 0.05);
        assert!((psd.total_power() / var - 1.0).abs() < 0.01);
    }

    #[test]
    fn welch_sine_power() {
        let amp = 0.3;
        let psd = welch_psd(&sine(1234.5, amp, 96_000, 48_000), WelchParams::default()).unwrap();
        assert!((psd.total_power() / (amp * amp / 2.0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn welch_silence_and_errors() {
        let sig = Signal::new(vec![0.0; 20_000], 48_000).unwrap();
        let psd = welch_psd(&sig, WelchParams::default()).unwrap();
        assert!(psd.psd.iter().all(|&p| p == 0.0));
        assert_eq!(psd.psd.len(), 4097);
        let short = Signal::new(vec![0.0; 100], 48_000).unwrap();
        assert!(matches!(welch_psd(&short, WelchParams::default()), Err(Error::Parameter(_))));
    }

    #[test]
    fn envelope_of_pure_sine_is_flat() {
        let env = hilbert_envelope(&sine(1000.0, 1.0, 48_000, 48_000)).unwrap();
        let r = super::super::interior(env.len(), 0.05);
        for v in &env.samples()[r] {
            assert!((v - 1.0).abs() <= 1e-3, "{v}");
        }
    }

    #[test]
    fn envelope_tracks_am() {
        let fs = 48_000;
        let (fc, fm, m) = (1000.0, 70.0, 1.0);
        let x: Vec<f64> = (0..fs)
            .map(|i| {
                let t = i as f64 / fs as f64;
                (1.0 + m * (2.0 * PI * fm * t).cos()) * (2.0 * PI * fc * t).sin()
            })
            .collect();
        let env = hilbert_envelope(&Signal::new(x, fs as u32).unwrap()).unwrap();
        let r = super::super::interior(env.len(), 0.05);
        let err: Vec<f64> = r
            .clone()
            .map(|i| {
                let t = i as f64 / fs as f64;
                env.samples()[i] - (1.0 + m * (2.0 * PI * fm * t).cos())
            })
            .collect();
        assert!(super::super::rms(&err) < 0.02);
        let inner = &env.samples()[r];
        let max = inner.iter().cloned().fold(f64::MIN, f64::max);
        let min = inner.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - 2.0).abs() < 0.02 && min < 0.02, "max {max} min {min}");
    }

    #[test]
    fn envelope_of_silence_is_zero() {
        let env = hilbert_envelope(&Signal::new(vec![0.0; 1000], 48_000).unwrap()).unwrap();
        assert!(env.samples().iter().all(|&v| v == 0.0));
        assert_eq!(env.len(), 1000);
    }

    #[test]
    fn envelope_odd_length() {
        let env = hilbert_envelope(&sine(1000.0, 0.5, 4801, 48_000)).unwrap();
        assert_eq!(env.len(), 4801);
        let r = super::super::interior(env.len(), 0.05);
        assert!(env.samples()[r].iter().all(|v| (v - 0.5).abs() < 1e-3));
    }
}

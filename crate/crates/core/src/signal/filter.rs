//! Zero-phase Butterworth filtering.
//!
//! Sections are 4th-order Butterworth (two biquads per edge) from the
//! bilinear transform with pre-warping, run forward then backward. The
//! design edge is shifted so the *two-pass* magnitude is −3 dB at the
//! requested cutoff. Edges are handled like `filtfilt`: odd extension plus
//! steady-state initial conditions, so a DC input passes through unchanged.

use std::f64::consts::PI;

use super::Waveform;
use crate::error::{Error, Result};

/// Butterworth order of each band edge.
pub const ORDER: usize = 4;

/// Single-pass edge factor: `(√2 − 1)^(1/(2·ORDER))`, so that the squared
/// (forward-backward) response crosses −3 dB at the nominal edge.
fn two_pass_edge_factor() -> f64 {
    (std::f64::consts::SQRT_2 - 1.0).powf(1.0 / (2.0 * ORDER as f64))
}

/// Second-order section, `a0` normalized to 1, transposed direct form II.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (self.a[0] + self.a[1] + self.a[2])
    }

    /// State that makes a constant input of 1.0 produce its steady-state output.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        [g - self.b[0], self.b[2] - self.a[2] * g]
    }

    /// Complex gain at normalized angular frequency `w` (radians/sample).
    pub fn response(&self, w: f64) -> (f64, f64) {
        let (c1, s1) = (w.cos(), -w.sin());
        let (c2, s2) = ((2.0 * w).cos(), -(2.0 * w).sin());
        let num = (self.b[0] + self.b[1] * c1 + self.b[2] * c2, self.b[1] * s1 + self.b[2] * s2);
        let den = (self.a[0] + self.a[1] * c1 + self.a[2] * c2, self.a[1] * s1 + self.a[2] * s2);
        let d = den.0 * den.0 + den.1 * den.1;
        ((num.0 * den.0 + num.1 * den.1) / d, (num.1 * den.0 - num.0 * den.1) / d)
    }

    pub fn run(&self, x: &mut [f64], state: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        let [mut s1, mut s2] = state;
        for v in x.iter_mut() {
            let input = *v;
            let y = b0 * input + s1;
            s1 = b1 * input - a1 * y + s2;
            s2 = b2 * input - a2 * y;
            *v = y;
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Lowpass,
    Highpass,
}

/// Butterworth pair of sections at design edge `fc` Hz.
fn butterworth_sections(kind: Kind, fc: f64, fs: f64) -> [Biquad; 2] {
    let k = (PI * fc / fs).tan();
    let k2 = k * k;
    let mut out = [Biquad { b: [0.0; 3], a: [1.0, 0.0, 0.0] }; 2];
    for (i, section) in out.iter_mut().enumerate() {
        // Damping 2·sin((2i+1)π/2N) of the i-th conjugate pole pair.
        let damping = 2.0 * ((2 * i + 1) as f64 * PI / (2 * ORDER) as f64).sin();
        let norm = 1.0 / (1.0 + damping * k + k2);
        let a = [1.0, 2.0 * (k2 - 1.0) * norm, (1.0 - damping * k + k2) * norm];
        let b = match kind {
            Kind::Lowpass => [k2 * norm, 2.0 * k2 * norm, k2 * norm],
            Kind::Highpass => [norm, -2.0 * norm, norm],
        };
        *section = Biquad { b, a };
    }
    out
}

/// Cascade of sections applied forward and backward.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroPhaseFilter {
    sections: Vec<Biquad>,
    /// Lowest band edge in Hz, sets how much odd-extension padding is used.
    slowest_edge: f64,
    sample_rate: f64,
}

impl ZeroPhaseFilter {
    pub fn lowpass(cutoff: f64, sample_rate: u32) -> Result<Self> {
        let fs = sample_rate as f64;
        if !(cutoff > 0.0 && cutoff < fs / 2.0) {
            return Err(Error::param(format!(
                "low-pass cutoff {cutoff} Hz must lie in (0, {} Hz)",
                fs / 2.0
            )));
        }
        let design = (cutoff / two_pass_edge_factor()).min(0.4999 * fs);
        Ok(Self {
            sections: butterworth_sections(Kind::Lowpass, design, fs).to_vec(),
            slowest_edge: cutoff,
            sample_rate: fs,
        })
    }

    pub fn bandpass(lo: f64, hi: f64, sample_rate: u32) -> Result<Self> {
        let fs = sample_rate as f64;
        if !(lo > 0.0 && lo < hi && hi < fs / 2.0) {
            return Err(Error::param(format!(
                "band [{lo}, {hi}] Hz must satisfy 0 < lo < hi < {} Hz",
                fs / 2.0
            )));
        }
        let factor = two_pass_edge_factor();
        let mut sections = butterworth_sections(Kind::Highpass, lo * factor, fs).to_vec();
        sections.extend(butterworth_sections(Kind::Lowpass, (hi / factor).min(0.4999 * fs), fs));
        Ok(Self { sections, slowest_edge: lo, sample_rate: fs })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Magnitude of the forward-backward response at `freq` Hz.
    pub fn zero_phase_gain(&self, freq: f64) -> f64 {
        let w = 2.0 * PI * freq / self.sample_rate;
        self.sections
            .iter()
            .map(|s| {
                let (re, im) = s.response(w);
                re * re + im * im
            })
            .product()
    }

    fn padlen(&self, n: usize) -> usize {
        let settle = (3.0 * self.sample_rate / self.slowest_edge).ceil() as usize;
        let minimum = 3 * (2 * self.sections.len() + 1);
        settle.max(minimum).min(n.saturating_sub(1))
    }

    fn run_once(&self, x: &mut [f64]) {
        let mut level = x[0];
        for s in &self.sections {
            let [z1, z2] = s.step_state();
            s.run(x, [z1 * level, z2 * level]);
            level *= s.dc_gain();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n < 2 {
            return x.to_vec();
        }
        let pad = self.padlen(n);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        self.run_once(&mut ext);
        ext.reverse();
        self.run_once(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Zero-phase band-pass between `lo` and `hi` Hz.
pub fn bandpass<W: Waveform>(input: &W, lo: f64, hi: f64) -> Result<W::Filtered> {
    let filter = ZeroPhaseFilter::bandpass(lo, hi, input.sample_rate())?;
    Ok(input.filtered(filter.apply(input.samples())))
}

/// Zero-phase low-pass at `cutoff` Hz.
pub fn lowpass<W: Waveform>(input: &W, cutoff: f64) -> Result<W::Filtered> {
    let filter = ZeroPhaseFilter::lowpass(cutoff, input.sample_rate())?;
    Ok(input.filtered(filter.apply(input.samples())))
}

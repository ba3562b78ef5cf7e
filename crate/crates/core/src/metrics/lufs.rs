//! Integrated program loudness after ITU-R BS.1770-4 (mono).

use std::f64::consts::PI;

use crate::error::Result;
use crate::signal::{Biquad, Signal};

pub(crate) const VARIANT: &str = "bs1770-4";

const ABSOLUTE_GATE_LUFS: f64 = -70.0;
const RELATIVE_GATE_LU: f64 = -10.0;
const BLOCK_S: f64 = 0.4;
const STEP_S: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProgramLoudness {
    Lufs(f64),
    /// Every gating block fell below the absolute gate.
    Undefined,
}

impl ProgramLoudness {
    pub fn value(self) -> Option<f64> {
        match self {
            ProgramLoudness::Lufs(v) => Some(v),
            ProgramLoudness::Undefined => None,
        }
    }
}

/// The two K-weighting stages (high shelf, then high pass).
///
/// At 48 kHz these are the published coefficients; at other rates the
/// stages are redesigned from the analog prototype parameters.
pub fn k_weighting(sample_rate: u32) -> [Biquad; 2] {
    if sample_rate == 48_000 {
        return [
            Biquad {
                b: [1.535_124_859_586_97, -2.691_696_189_406_38, 1.198_392_810_852_85],
                a: [1.0, -1.690_659_293_182_41, 0.732_480_774_215_85],
            },
            Biquad { b: [1.0, -2.0, 1.0], a: [1.0, -1.990_047_454_833_98, 0.990_072_250_366_21] },
        ];
    }
    let fs = sample_rate as f64;

    let (gain_db, q, fc) = (3.999_843_853_973_347, 0.707_175_236_955_419_6, 1_681.974_450_955_533);
    let k = (PI * fc / fs).tan();
    let vh = 10f64.powf(gain_db / 20.0);
    let vb = vh.powf(0.499_666_774_154_541_6);
    let a0 = 1.0 + k / q + k * k;
    let shelf = Biquad {
        b: [(vh + vb * k / q + k * k) / a0, 2.0 * (k * k - vh) / a0, (vh - vb * k / q + k * k) / a0],
        a: [1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0],
    };

    let (q, fc) = (0.500_327_037_323_877_3, 38.135_470_876_024_44);
    let k = (PI * fc / fs).tan();
    let a0 = 1.0 + k / q + k * k;
    let highpass = Biquad {
        b: [1.0, -2.0, 1.0],
        a: [1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0],
    };
    [shelf, highpass]
}

fn block_loudness(mean_square: f64) -> f64 {
    -0.691 + 10.0 * mean_square.log10()
}

/// Gated integrated loudness: 400 ms blocks every 100 ms, −70 LUFS absolute
/// gate, then a relative gate 10 LU under the absolute-gated mean.
pub fn lufs_integrated(signal: &Signal) -> Result<ProgramLoudness> {
    signal.require_duration(BLOCK_S, "lufs_integrated")?;
    let fs = signal.sample_rate() as f64;
    let mut y = signal.samples().to_vec();
    for stage in k_weighting(signal.sample_rate()) {
        stage.run(&mut y, [0.0, 0.0]);
    }
    let block = (BLOCK_S * fs).round() as usize;
    let step = (STEP_S * fs).round() as usize;

    let mut powers = Vec::new();
    let mut start = 0;
    while start + block <= y.len() {
        let ms = y[start..start + block].iter().map(|v| v * v).sum::<f64>() / block as f64;
        powers.push(ms);
        start += step;
    }

    let absolute: Vec<f64> =
        powers.into_iter().filter(|&p| p > 0.0 && block_loudness(p) > ABSOLUTE_GATE_LUFS).collect();
    if absolute.is_empty() {
        return Ok(ProgramLoudness::Undefined);
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let relative_gate = block_loudness(mean(&absolute)) + RELATIVE_GATE_LU;
    let gated: Vec<f64> = absolute.into_iter().filter(|&p| block_loudness(p) > relative_gate).collect();
    if gated.is_empty() {
        return Ok(ProgramLoudness::Undefined);
    }
    Ok(ProgramLoudness::Lufs(block_loudness(mean(&gated))))
}

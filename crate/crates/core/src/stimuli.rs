//! Seeded synthesis of the three NVH case studies and of calibration tones.
//!
//! Every waveform is a pure function of its [`StimulusSpec`]. Transcendental
//! functions come from `libm` so the samples are bit-identical across
//! platforms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, Gaussian, Xoshiro256StarStar};
use crate::signal::{Signal, ZeroPhaseFilter, CANONICAL_SAMPLE_RATE};

pub const PEAK_LIMIT: f64 = 0.99;
pub const DEFAULT_DURATION_S: f64 = 2.0;

/// Noise streams are keyed off the item seed so they never alias the
/// parameter draws of [`jittered_spec`].
const NOISE_STREAM: u64 = 0x6E6F_6973_655F_7374;

/// Amplitude of the fundamental before modulation and peak limiting.
const BOOM_FUNDAMENTAL_AMPLITUDE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StimulusClass {
    EngineBoom,
    WindWhistle,
    RoadNoise,
}

impl StimulusClass {
    pub const ALL: [StimulusClass; 3] =
        [StimulusClass::EngineBoom, StimulusClass::WindWhistle, StimulusClass::RoadNoise];

    pub fn index(self) -> usize {
        match self {
            StimulusClass::EngineBoom => 0,
            StimulusClass::WindWhistle => 1,
            StimulusClass::RoadNoise => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            StimulusClass::EngineBoom => "engine-boom",
            StimulusClass::WindWhistle => "wind-whistle",
            StimulusClass::RoadNoise => "road-noise",
        }
    }
}

impl fmt::Display for StimulusClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StimulusClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::param(format!("unknown stimulus class '{s}'")))
    }
}

/// Declared jitter ranges.
pub mod ranges {
    pub const BOOM_F0: (f64, f64) = (100.0, 200.0);
    pub const BOOM_MOD_FREQ: (f64, f64) = (30.0, 70.0);
    pub const BOOM_MOD_DEPTH: (f64, f64) = (0.5, 1.0);
    pub const WHISTLE_TONE_FREQ: (f64, f64) = (2000.0, 5000.0);
    pub const WHISTLE_TONE_LEVEL: (f64, f64) = (-20.0, -10.0);
    pub const WHISTLE_NOISE_LEVEL: (f64, f64) = (-35.0, -25.0);
    pub const ROAD_CUTOFF: (f64, f64) = (300.0, 600.0);
    pub const ROAD_LEVEL: (f64, f64) = (-20.0, -10.0);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineBoomParams {
    pub f0: f64,
    pub n_harmonics: u32,
    pub harmonic_rolloff_db: f64,
    pub mod_freq: f64,
    pub mod_depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindWhistleParams {
    pub tone_freq: f64,
    pub tone_level_dbfs: f64,
    pub noise_level_dbfs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadNoiseParams {
    pub cutoff: f64,
    pub level_dbfs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum StimulusParams {
    EngineBoom(EngineBoomParams),
    WindWhistle(WindWhistleParams),
    RoadNoise(RoadNoiseParams),
}

impl StimulusParams {
    pub fn class(&self) -> StimulusClass {
        match self {
            StimulusParams::EngineBoom(_) => StimulusClass::EngineBoom,
            StimulusParams::WindWhistle(_) => StimulusClass::WindWhistle,
            StimulusParams::RoadNoise(_) => StimulusClass::RoadNoise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StimulusSpec {
    pub seed: u64,
    pub duration_s: f64,
    pub sample_rate: u32,
    pub params: StimulusParams,
}

fn check_range(name: &str, value: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::param(format!("{name} = {value} outside [{lo}, {hi}]")))
    }
}

fn check_nyquist(name: &str, freq: f64, sample_rate: u32) -> Result<()> {
    let nyquist = sample_rate as f64 / 2.0;
    if freq < nyquist {
        Ok(())
    } else {
        Err(Error::param(format!("{name} = {freq} Hz is not below Nyquist ({nyquist} Hz)")))
    }
}

impl StimulusSpec {
    pub fn class(&self) -> StimulusClass {
        self.params.class()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::param(format!("duration {} s must be positive", self.duration_s)));
        }
        if self.sample_rate < crate::signal::MIN_SAMPLE_RATE {
            return Err(Error::param(format!("sample rate {} Hz too low", self.sample_rate)));
        }
        match &self.params {
            StimulusParams::EngineBoom(p) => {
                check_nyquist("f0", p.f0, self.sample_rate)?;
                check_range("f0", p.f0, ranges::BOOM_F0)?;
                if p.n_harmonics == 0 {
                    return Err(Error::param("n_harmonics must be at least 1"));
                }
                check_nyquist("highest harmonic", p.f0 * p.n_harmonics as f64, self.sample_rate)?;
                if !(p.harmonic_rolloff_db.is_finite() && p.harmonic_rolloff_db >= 0.0) {
                    return Err(Error::param("harmonic_rolloff_db must be >= 0"));
                }
                check_range("mod_freq", p.mod_freq, ranges::BOOM_MOD_FREQ)?;
                // Depth 0 is accepted so an unmodulated boom can be built
                // explicitly; jitter draws from BOOM_MOD_DEPTH only.
                check_range("mod_depth", p.mod_depth, (0.0, ranges::BOOM_MOD_DEPTH.1))?;
            }
            StimulusParams::WindWhistle(p) => {
                check_nyquist("tone_freq", p.tone_freq, self.sample_rate)?;
                check_range("tone_freq", p.tone_freq, ranges::WHISTLE_TONE_FREQ)?;
                check_range("tone_level_dbfs", p.tone_level_dbfs, ranges::WHISTLE_TONE_LEVEL)?;
                check_range("noise_level_dbfs", p.noise_level_dbfs, ranges::WHISTLE_NOISE_LEVEL)?;
                if p.tone_level_dbfs - p.noise_level_dbfs < 5.0 {
                    return Err(Error::param("tone level must exceed noise level by at least 5 dB"));
                }
            }
            StimulusParams::RoadNoise(p) => {
                check_nyquist("cutoff", p.cutoff, self.sample_rate)?;
                check_range("cutoff", p.cutoff, ranges::ROAD_CUTOFF)?;
                check_range("level_dbfs", p.level_dbfs, ranges::ROAD_LEVEL)?;
            }
        }
        Ok(())
    }
}

/// Parameters for item `index` of `class`, drawn uniformly from the declared
/// ranges with a stream seeded by `SplitMix64(base_seed ^ index)`.
pub fn jittered_spec(class: StimulusClass, base_seed: u64, index: u64) -> StimulusSpec {
    let seed = derive_seed(base_seed, index);
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut draw = |(lo, hi): (f64, f64)| rng.uniform(lo, hi);
    let params = match class {
        StimulusClass::EngineBoom => StimulusParams::EngineBoom(EngineBoomParams {
            f0: draw(ranges::BOOM_F0),
            n_harmonics: 5,
            harmonic_rolloff_db: 4.0,
            mod_freq: draw(ranges::BOOM_MOD_FREQ),
            mod_depth: draw(ranges::BOOM_MOD_DEPTH),
        }),
        StimulusClass::WindWhistle => StimulusParams::WindWhistle(WindWhistleParams {
            tone_freq: draw(ranges::WHISTLE_TONE_FREQ),
            tone_level_dbfs: draw(ranges::WHISTLE_TONE_LEVEL),
            noise_level_dbfs: draw(ranges::WHISTLE_NOISE_LEVEL),
        }),
        StimulusClass::RoadNoise => StimulusParams::RoadNoise(RoadNoiseParams {
            cutoff: draw(ranges::ROAD_CUTOFF),
            level_dbfs: draw(ranges::ROAD_LEVEL),
        }),
    };
    StimulusSpec { seed, duration_s: DEFAULT_DURATION_S, sample_rate: CANONICAL_SAMPLE_RATE, params }
}

fn sample_count(duration_s: f64, sample_rate: u32) -> usize {
    (duration_s * sample_rate as f64).round() as usize
}

/// Sine amplitude whose level is `dbfs` (0 dBFS = full-scale sine).
fn sine_amplitude(dbfs: f64) -> f64 {
    libm::pow(10.0, dbfs / 20.0)
}

/// Noise standard deviation whose level is `dbfs` on the same scale.
fn noise_std(dbfs: f64) -> f64 {
    sine_amplitude(dbfs) / std::f64::consts::SQRT_2
}

fn peak_limit(samples: &mut [f64]) {
    let peak = samples.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if peak > PEAK_LIMIT {
        let g = PEAK_LIMIT / peak;
        for x in samples.iter_mut() {
            *x *= g;
        }
    }
}

pub fn synth(spec: &StimulusSpec) -> Result<Signal> {
    spec.validate()?;
    let n = sample_count(spec.duration_s, spec.sample_rate);
    if n == 0 {
        return Err(Error::param("duration shorter than one sample"));
    }
    let fs = spec.sample_rate as f64;
    let mut samples = match &spec.params {
        StimulusParams::EngineBoom(p) => {
            let amps: Vec<f64> = (0..p.n_harmonics)
                .map(|k| BOOM_FUNDAMENTAL_AMPLITUDE * libm::pow(10.0, -p.harmonic_rolloff_db * k as f64 / 20.0))
                .collect();
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    let carrier: f64 = amps
                        .iter()
                        .enumerate()
                        .map(|(k, a)| a * libm::sin(2.0 * PI * (k + 1) as f64 * p.f0 * t))
                        .sum();
                    let am = (1.0 + p.mod_depth * libm::cos(2.0 * PI * p.mod_freq * t)) / (1.0 + p.mod_depth);
                    carrier * am
                })
                .collect::<Vec<_>>()
        }
        StimulusParams::WindWhistle(p) => {
            let mut g = Gaussian::seed_from_u64(spec.seed ^ NOISE_STREAM);
            let a = sine_amplitude(p.tone_level_dbfs);
            let sigma = noise_std(p.noise_level_dbfs);
            (0..n)
                .map(|i| a * libm::sin(2.0 * PI * p.tone_freq * i as f64 / fs) + sigma * g.sample())
                .collect()
        }
        StimulusParams::RoadNoise(p) => {
            let mut g = Gaussian::seed_from_u64(spec.seed ^ NOISE_STREAM);
            let white: Vec<f64> = (0..n).map(|_| g.sample()).collect();
            let mut x = ZeroPhaseFilter::lowpass(p.cutoff, spec.sample_rate)?.apply(&white);
            let ms = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
            if ms > 0.0 {
                let g = noise_std(p.level_dbfs) / ms.sqrt();
                x.iter_mut().for_each(|v| *v *= g);
            }
            x
        }
    };
    peak_limit(&mut samples);
    Signal::new(samples, spec.sample_rate)
}

/// Calibration and test signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestTone {
    Sine { freq: f64, amplitude: f64 },
    /// `(1 + m·cos(2π·f_m·t))·sin(2π·f_c·t)/(1 + m)`, so the peak never exceeds 1.
    AmTone { carrier: f64, mod_freq: f64, depth: f64 },
    ToneInNoise { freq: f64, amplitude: f64, noise_std: f64, seed: u64 },
    Silence,
}

pub fn test_tone(tone: TestTone, duration_s: f64, sample_rate: u32) -> Result<Signal> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::param(format!("duration {duration_s} s must be positive")));
    }
    let n = sample_count(duration_s, sample_rate);
    let fs = sample_rate as f64;
    let samples = match tone {
        TestTone::Sine { freq, amplitude } => {
            check_nyquist("freq", freq, sample_rate)?;
            (0..n).map(|i| amplitude * libm::sin(2.0 * PI * freq * i as f64 / fs)).collect()
        }
        TestTone::AmTone { carrier, mod_freq, depth } => {
            check_nyquist("carrier", carrier, sample_rate)?;
            check_nyquist("mod_freq", mod_freq, sample_rate)?;
            if !(depth >= 0.0 && depth.is_finite()) {
                return Err(Error::param(format!("modulation depth {depth} must be >= 0")));
            }
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    (1.0 + depth * libm::cos(2.0 * PI * mod_freq * t)) * libm::sin(2.0 * PI * carrier * t)
                        / (1.0 + depth)
                })
                .collect()
        }
        TestTone::ToneInNoise { freq, amplitude, noise_std, seed } => {
            check_nyquist("freq", freq, sample_rate)?;
            let mut g = Gaussian::seed_from_u64(seed);
            (0..n)
                .map(|i| amplitude * libm::sin(2.0 * PI * freq * i as f64 / fs) + noise_std * g.sample())
                .collect()
        }
        TestTone::Silence => vec![0.0; n],
    };
    Signal::new(samples, sample_rate)
}

/// Unit-variance white Gaussian noise.
pub fn white_noise(seed: u64, duration_s: f64, sample_rate: u32) -> Result<Signal> {
    let mut g = Gaussian::seed_from_u64(seed);
    let n = sample_count(duration_s, sample_rate);
    Signal::new((0..n).map(|_| g.sample()).collect(), sample_rate)
}

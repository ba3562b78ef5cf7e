//! RIFF/WAVE input and output.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::Signal;
use crate::error::{Error, Result};

fn map_hound(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::Io(io),
        hound::Error::FormatError(msg) => Error::Format(msg.to_string()),
        hound::Error::Unsupported => Error::Unsupported("WAV codec or layout".into()),
        hound::Error::TooWide => Error::Unsupported("sample width".into()),
        other => Error::Format(other.to_string()),
    }
}

/// Reads PCM 16/24/32-bit integer or 32-bit float WAV, downmixing to mono by
/// the per-frame mean. Integers are scaled by `2^(bits-1)`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Signal> {
    let file = File::open(path.as_ref())?;
    read_wav_from(BufReader::new(file))
}

pub fn read_wav_from<R: Read>(reader: R) -> Result<Signal> {
    let reader = WavReader::new(reader).map_err(map_hound)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Format("zero channels".into()));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(map_hound)?
        }
        (format, bits) => {
            return Err(Error::Unsupported(format!("{bits}-bit {format:?} samples")));
        }
    };
    let samples = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect()
    };
    Signal::new(samples, spec.sample_rate)
}

/// Writes mono 32-bit float WAV.
pub fn write_wav(signal: &Signal, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_wav_to(signal, BufWriter::new(file))
}

pub fn write_wav_to<W: Write + Seek>(signal: &Signal, writer: W) -> Result<()> {
    if signal.is_empty() {
        return Err(Error::precondition("cannot write an empty signal"));
    }
    let spec = WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut w = WavWriter::new(writer, spec).map_err(map_hound)?;
    for &x in signal.samples() {
        w.write_sample(x as f32).map_err(map_hound)?;
    }
    w.finalize().map_err(map_hound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn int_wav(bits: u16, channels: u16, frames: &[Vec<i32>]) -> Vec<u8> {
        let spec = WavSpec { channels, sample_rate: 48_000, bits_per_sample: bits, sample_format: SampleFormat::Int };
        let mut buf = Cursor::new(Vec::new());
        {
            let mut w = WavWriter::new(&mut buf, spec).unwrap();
            for frame in frames {
                for &s in frame {
                    w.write_sample(s).unwrap();
                }
            }
            w.finalize().unwrap();
        }
        buf.into_inner()
    }

    #[test]
    fn pcm16_constant_scales_to_half() {
        let bytes = int_wav(16, 1, &vec![vec![16384]; 100]);
        let sig = read_wav_from(Cursor::new(bytes)).unwrap();
        assert!(sig.samples().iter().all(|&x| x == 0.5));
    }

    #[test]
    fn pcm24_and_32_scale() {
        let sig = read_wav_from(Cursor::new(int_wav(24, 1, &[vec![1 << 22]]))).unwrap();
        assert_eq!(sig.samples(), &[0.5]);
        let sig = read_wav_from(Cursor::new(int_wav(32, 1, &[vec![i32::MIN]]))).unwrap();
        assert_eq!(sig.samples(), &[-1.0]);
    }

    #[test]
    fn stereo_opposites_downmix_to_zero() {
        let bytes = int_wav(16, 2, &vec![vec![16384, -16384]; 64]);
        let sig = read_wav_from(Cursor::new(bytes)).unwrap();
        assert_eq!(sig.len(), 64);
        assert!(sig.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn float_round_trip_is_bit_exact() {
        let samples: Vec<f64> = (0..48_000)
            .map(|i| ((i as f64 * 0.1309).sin() * 0.8) as f32 as f64)
            .collect();
        let sig = Signal::new(samples.clone(), 44_100).unwrap();
        let mut buf = Cursor::new(Vec::new());
        write_wav_to(&sig, &mut buf).unwrap();
        let back = read_wav_from(Cursor::new(buf.into_inner())).unwrap();
        assert_eq!(back.sample_rate(), 44_100);
        assert_eq!(back.samples(), &samples[..]);
    }

    #[test]
    fn empty_signal_is_rejected() {
        let sig = Signal::new(vec![], 48_000).unwrap();
        let err = write_wav_to(&sig, Cursor::new(Vec::new())).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn garbage_header_is_format_error() {
        let err = read_wav_from(Cursor::new(b"RIFX\0\0\0\0WAVEjunk".to_vec())).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err:?}");
    }

    #[test]
    fn unsupported_width() {
        let bytes = int_wav(8, 1, &[vec![3]]);
        assert!(matches!(read_wav_from(Cursor::new(bytes)), Err(Error::Unsupported(_))));
    }
}

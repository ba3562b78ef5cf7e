//! Psychoacoustic sound-quality proxies (loudness, sharpness, roughness,
//! fluctuation strength, tonality, annoyance) with BS.1770 program loudness,
//! seeded synthetic NVH stimuli, and a reproducible feature/classifier
//! workflow driven by the `soundq` command-line tool.

pub mod cli;
pub mod error;
pub mod metrics;
pub mod ml;
pub mod rng;
pub mod signal;
pub mod stimuli;

pub use error::{Error, Result};
pub use signal::{Envelope, Signal};

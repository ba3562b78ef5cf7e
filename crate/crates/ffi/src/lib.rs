//! C ABI for soundq.
//!
//! Every fallible function returns an [`SqStatus`]; on failure a message is
//! available from [`sq_last_error_message`] on the same thread. Objects are
//! opaque handles created by `sq_*_new`-style functions and released with
//! the matching `sq_*_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use soundq::metrics::{analyze_all, annoyance, lufs_integrated, AnalysisConfig, AnnoyanceThresholds, ProgramLoudness};
use soundq::ml::{build_dataset, evaluate, train, Dataset, DatasetConfig, ForestParams, ModelSpec, TrainedModel};
use soundq::signal::{read_wav, write_wav};
use soundq::stimuli::{jittered_spec, synth, StimulusClass};
use soundq::{Error, Signal};

pub const SQ_CLASS_ENGINE_BOOM: i32 = 0;
pub const SQ_CLASS_WIND_WHISTLE: i32 = 1;
pub const SQ_CLASS_ROAD_NOISE: i32 = 2;

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    Parameter = 2,
    Io = 3,
    Mismatch = 4,
    /// Well-formed input on which a metric is undefined (e.g. silence).
    Degenerate = 5,
    Format = 6,
    Training = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> SqStatus {
    match e {
        Error::Parameter(_) | Error::Precondition(_) | Error::Unsupported(_) => SqStatus::Parameter,
        Error::Degenerate { .. } => SqStatus::Degenerate,
        Error::InMetric { source, .. } | Error::Stimulus { source, .. } => status_of(source),
        Error::Format(_) | Error::Serde(_) => SqStatus::Format,
        Error::Training(_) => SqStatus::Training,
        Error::Mismatch(_) => SqStatus::Mismatch,
        Error::Io(_) => SqStatus::Io,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), SqStatusError>) -> SqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SqStatus::Ok,
        Ok(Err(SqStatusError(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SqStatus::Panic
        }
    }
}

struct SqStatusError(SqStatus, String);

impl From<Error> for SqStatusError {
    fn from(e: Error) -> Self {
        SqStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> SqStatusError {
    SqStatusError(SqStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, SqStatusError> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| SqStatusError(SqStatus::Parameter, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, SqStatusError> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, SqStatusError> {
    p.as_ref().ok_or_else(|| null(what))
}

fn class_arg(class: i32) -> Result<StimulusClass, SqStatusError> {
    usize::try_from(class)
        .ok()
        .and_then(StimulusClass::from_index)
        .ok_or_else(|| SqStatusError(SqStatus::Parameter, format!("unknown stimulus class {class}")))
}

/// Mono audio buffer.
pub struct SqSignal(Signal);

/// Labeled feature dataset with its frozen split.
pub struct SqDataset(Dataset);

/// Trained classifier.
pub struct SqModel(TrainedModel);

/// The feature vector `[N, S, R, F, T, PA]`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SqFeatures {
    pub loudness: f64,
    pub sharpness: f64,
    pub roughness: f64,
    pub fluctuation: f64,
    pub tonality: f64,
    pub annoyance: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SqEvalReport {
    pub accuracy: f64,
    /// Row-major, rows are true classes.
    pub confusion: [[u32; 3]; 3],
    pub spearman_pa: f64,
    /// `false` when the rank correlation is undefined; `spearman_pa` is then 0.
    pub spearman_defined: bool,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Copies `len` samples into a new signal.
///
/// # Safety
/// `samples` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_signal_from_samples(
    samples: *const f64,
    len: usize,
    sample_rate: u32,
    out: *mut *mut SqSignal,
) -> SqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if samples.is_null() && len > 0 {
            return Err(null("samples"));
        }
        let data = if len == 0 { Vec::new() } else { slice::from_raw_parts(samples, len).to_vec() };
        *out = Box::into_raw(Box::new(SqSignal(Signal::new(data, sample_rate)?)));
        Ok(())
    })
}

/// Reads a mono or multichannel (downmixed) WAV file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_signal_read_wav(path: *const c_char, out: *mut *mut SqSignal) -> SqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        *out = Box::into_raw(Box::new(SqSignal(read_wav(path)?)));
        Ok(())
    })
}

/// Writes a 32-bit float mono WAV file.
///
/// # Safety
/// `signal` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sq_signal_write_wav(signal: *const SqSignal, path: *const c_char) -> SqStatus {
    guard(|| {
        let signal = in_arg(signal, "signal")?;
        write_wav(&signal.0, str_arg(path, "path")?)?;
        Ok(())
    })
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `signal` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sq_signal_len(signal: *const SqSignal) -> usize {
    signal.as_ref().map_or(0, |s| s.0.len())
}

/// Sample rate in Hz; 0 for a null handle.
///
/// # Safety
/// `signal` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sq_signal_sample_rate(signal: *const SqSignal) -> u32 {
    signal.as_ref().map_or(0, |s| s.0.sample_rate())
}

/// Copies up to `capacity` samples into `buffer` and stores the number
/// copied in `written`.
///
/// # Safety
/// `buffer` must hold `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sq_signal_copy_samples(
    signal: *const SqSignal,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> SqStatus {
    guard(|| {
        let signal = in_arg(signal, "signal")?;
        let written = out_arg(written, "written")?;
        let n = capacity.min(signal.0.len());
        if n > 0 {
            if buffer.is_null() {
                return Err(null("buffer"));
            }
            slice::from_raw_parts_mut(buffer, n).copy_from_slice(&signal.0.samples()[..n]);
        }
        *written = n;
        Ok(())
    })
}

/// # Safety
/// `signal` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sq_signal_free(signal: *mut SqSignal) {
    if !signal.is_null() {
        drop(Box::from_raw(signal));
    }
}

/// Synthesizes item `index` of a seeded stimulus family
/// (`SQ_CLASS_*` constants).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_synth(class: i32, base_seed: u64, index: u64, out: *mut *mut SqSignal) -> SqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = jittered_spec(class_arg(class)?, base_seed, index);
        *out = Box::into_raw(Box::new(SqSignal(synth(&spec)?)));
        Ok(())
    })
}

/// Computes the six-feature vector with default analysis settings.
///
/// # Safety
/// `signal` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_analyze(signal: *const SqSignal, out: *mut SqFeatures) -> SqStatus {
    guard(|| {
        let signal = in_arg(signal, "signal")?;
        let out = out_arg(out, "out")?;
        let fv = analyze_all(&signal.0, &AnalysisConfig::default())?;
        *out = SqFeatures {
            loudness: fv.n,
            sharpness: fv.s,
            roughness: fv.r,
            fluctuation: fv.f,
            tonality: fv.t,
            annoyance: fv.pa,
        };
        Ok(())
    })
}

/// Integrated program loudness in LUFS. `defined` is false (and `lufs` 0)
/// when every block falls below the absolute gate.
///
/// # Safety
/// `signal` must be a live handle; `lufs` and `defined` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_lufs_integrated(signal: *const SqSignal, lufs: *mut f64, defined: *mut bool) -> SqStatus {
    guard(|| {
        let signal = in_arg(signal, "signal")?;
        let lufs = out_arg(lufs, "lufs")?;
        let defined = out_arg(defined, "defined")?;
        match lufs_integrated(&signal.0)? {
            ProgramLoudness::Lufs(v) => (*lufs, *defined) = (v, true),
            ProgramLoudness::Undefined => (*lufs, *defined) = (0.0, false),
        }
        Ok(())
    })
}

/// Psychoacoustic annoyance from loudness, sharpness, roughness and
/// fluctuation relative to the given thresholds.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sq_annoyance(
    n: f64,
    s: f64,
    r: f64,
    f: f64,
    s0: f64,
    r0: f64,
    f0: f64,
    out: *mut f64,
) -> SqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = annoyance(n, s, r, f, &AnnoyanceThresholds { s0, r0, f0 })?.value;
        Ok(())
    })
}

/// Spearman rank correlation. `defined` is false when either input is
/// constant.
///
/// # Safety
/// `x` and `y` must each point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn sq_spearman(
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
    defined: *mut bool,
) -> SqStatus {
    guard(|| {
        if x.is_null() || y.is_null() {
            return Err(null("x or y"));
        }
        let out = out_arg(out, "out")?;
        let defined = out_arg(defined, "defined")?;
        let (x, y) = (slice::from_raw_parts(x, len), slice::from_raw_parts(y, len));
        match soundq::ml::spearman(x, y)? {
            Some(rho) => (*out, *defined) = (rho, true),
            None => (*out, *defined) = (0.0, false),
        }
        Ok(())
    })
}

/// Builds the labeled dataset (70/30 stratified split, default analysis).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_dataset_build(n_per_class: usize, base_seed: u64, out: *mut *mut SqDataset) -> SqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = DatasetConfig { n_per_class, base_seed, ..DatasetConfig::default() };
        *out = Box::into_raw(Box::new(SqDataset(build_dataset(&cfg, &AnalysisConfig::default())?)));
        Ok(())
    })
}

/// Number of rows; 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sq_dataset_len(dataset: *const SqDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sq_dataset_free(dataset: *mut SqDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Trains a random forest (two features per split, bootstrap) on the
/// dataset's train split.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_model_train_forest(
    dataset: *const SqDataset,
    n_trees: usize,
    seed: u64,
    out: *mut *mut SqModel,
) -> SqStatus {
    guard(|| {
        let dataset = in_arg(dataset, "dataset")?;
        let out = out_arg(out, "out")?;
        let spec = ModelSpec::RandomForest(ForestParams { n_trees, seed, ..ForestParams::default() });
        *out = Box::into_raw(Box::new(SqModel(train(&dataset.0, &spec)?)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sq_model_free(model: *mut SqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Scores `model` on the test split of the dataset it was trained on.
///
/// # Safety
/// `model` and `dataset` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_evaluate(model: *const SqModel, dataset: *const SqDataset, out: *mut SqEvalReport) -> SqStatus {
    guard(|| {
        let model = in_arg(model, "model")?;
        let dataset = in_arg(dataset, "dataset")?;
        let out = out_arg(out, "out")?;
        let r = evaluate(&model.0, &dataset.0)?;
        *out = SqEvalReport {
            accuracy: r.accuracy,
            confusion: r.confusion,
            spearman_pa: r.spearman_pa.unwrap_or(0.0),
            spearman_defined: r.spearman_pa.is_some(),
        };
        Ok(())
    })
}

//! C ABI over `fpeval`.
//!
//! Objects cross the boundary as opaque handles created by `*_load` or
//! `*_new` style functions and released with the matching `*_free`. Every
//! fallible call returns an [`FpStatus`]; on failure a description is
//! available from [`fp_last_error_message`] on the same thread until the
//! next failing call. Panics are caught and reported as
//! `FP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use fpeval::fpmodel::{
    dedupe_by_cookie, load_dataset, sanitize, save_dataset, split_by_browser, Dataset, DatasetFormat,
};
use fpeval::hybrid::{evaluate_pet, InconclusivePolicy};
use fpeval::maskinfer::{infer_model, MaskModel, ObservationLog, StatParams};
use fpeval::metrics::{entropy_of_sizes, Metric, TrackabilityReport};
use fpeval::popsample::popularity_evaluate;
use fpeval::resolution::{score_strategy, strategy_sets, tor_handcrafted_model, SpoofStrategy};
use fpeval::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Format = 4,
    Domain = 5,
    NotObserved = 6,
    InsufficientData = 7,
    Config = 8,
    SampleTooLarge = 9,
    Spec = 10,
    MissingResolution = 11,
    Panic = 12,
}

impl From<&Error> for FpStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => FpStatus::Io,
            Error::Format { .. } => FpStatus::Format,
            Error::Domain(_) => FpStatus::Domain,
            Error::NotObserved(_) => FpStatus::NotObserved,
            Error::InsufficientData(_) => FpStatus::InsufficientData,
            Error::Config(_) => FpStatus::Config,
            Error::SampleTooLarge { .. } => FpStatus::SampleTooLarge,
            Error::Spec(_) => FpStatus::Spec,
            Error::MissingResolution { .. } => FpStatus::MissingResolution,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpFormat {
    /// Guess from the file extension.
    Auto = 0,
    Csv = 1,
    Jsonl = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpPolicy {
    InconclusiveAsMasked = 0,
    InconclusiveAsUnmasked = 1,
}

/// Opaque fingerprint dataset.
pub struct FpDataset(Dataset);

/// Opaque mask model.
pub struct FpMaskModel(MaskModel);

/// Opaque observation log.
pub struct FpObservationLog(ObservationLog);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FpTrackability {
    pub n: usize,
    pub entropy_bits: f64,
    pub pct_le_1: f64,
    pub pct_le_10: f64,
}

impl From<TrackabilityReport> for FpTrackability {
    fn from(t: TrackabilityReport) -> Self {
        FpTrackability {
            n: t.n,
            entropy_bits: t.entropy_bits,
            pct_le_1: t.pct_le_1,
            pct_le_10: t.pct_le_10,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FpHybridReport {
    pub before: FpTrackability,
    pub after: FpTrackability,
    pub eff_entropy: f64,
    pub eff_pct_le_1: f64,
    pub eff_pct_le_10: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FpEstimate {
    pub entropy_mean: f64,
    pub entropy_sem: f64,
    pub pct_le_1_mean: f64,
    pub pct_le_1_sem: f64,
    pub pct_le_10_mean: f64,
    pub pct_le_10_sem: f64,
    pub samples: usize,
    pub sample_size: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FpSpoofStrategy {
    pub cap_w: u32,
    pub cap_h: u32,
    pub quant_w: u32,
    pub quant_h: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FpStrategyScore {
    pub entropy_bits: f64,
    pub pct_le_1: f64,
    pub pct_le_10: f64,
    pub abs_loss: f64,
    pub pct_loss: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(FpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(FpStatus::from(&e), e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Outcome) -> FpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FpStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_owned())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_owned());
            set_last_error(&format!("panic: {msg}"));
            FpStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(FpStatus::NullArgument, format!("`{what}` is NULL"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(FpStatus::InvalidUtf8, format!("`{what}` is not UTF-8: {e}")))
}

fn format_for(path: &Path, f: FpFormat) -> DatasetFormat {
    match f {
        FpFormat::Auto => DatasetFormat::from_path(path),
        FpFormat::Csv => DatasetFormat::Csv,
        FpFormat::Jsonl => DatasetFormat::Jsonl,
    }
}

fn policy(p: FpPolicy) -> InconclusivePolicy {
    match p {
        FpPolicy::InconclusiveAsMasked => InconclusivePolicy::AsMasked,
        FpPolicy::InconclusiveAsUnmasked => InconclusivePolicy::AsUnmasked,
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_dataset_load(path: *const c_char, format: FpFormat, out: *mut *mut FpDataset) -> FpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = Path::new(text(path, "path")?);
        let d = load_dataset(path, format_for(path, format))?;
        *out = boxed(FpDataset(d));
        Ok(())
    })
}

/// # Safety
/// `d` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn fp_dataset_free(d: *mut FpDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of records, or 0 for NULL.
///
/// # Safety
/// `d` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn fp_dataset_len(d: *const FpDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `d` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fp_dataset_save(d: *const FpDataset, path: *const c_char, format: FpFormat) -> FpStatus {
    guard(|| {
        let d = borrow(d, "dataset")?;
        let path = Path::new(text(path, "path")?);
        save_dataset(&d.0, path, format_for(path, format))?;
        Ok(())
    })
}

/// Deduplicates by cookie and drops records tripping a sanitization rule.
///
/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_dataset_prepare(d: *const FpDataset, out: *mut *mut FpDataset) -> FpStatus {
    guard(|| {
        let d = borrow(d, "dataset")?;
        let out = out_ptr(out, "out")?;
        let (clean, _) = sanitize(&dedupe_by_cookie(&d.0));
        *out = boxed(FpDataset(clean));
        Ok(())
    })
}

/// # Safety
/// `d` must be a live handle; `chrome` and `firefox` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fp_dataset_split(
    d: *const FpDataset,
    chrome: *mut *mut FpDataset,
    firefox: *mut *mut FpDataset,
) -> FpStatus {
    guard(|| {
        let d = borrow(d, "dataset")?;
        let chrome = out_ptr(chrome, "chrome")?;
        let firefox = out_ptr(firefox, "firefox")?;
        let (c, f) = split_by_browser(&d.0);
        *chrome = boxed(FpDataset(c));
        *firefox = boxed(FpDataset(f));
        Ok(())
    })
}

/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_trackability(d: *const FpDataset, out: *mut FpTrackability) -> FpStatus {
    guard(|| {
        let d = borrow(d, "dataset")?;
        let out = out_ptr(out, "out")?;
        *out = TrackabilityReport::of(d.0.records.iter().map(|r| &r.fingerprint))?.into();
        Ok(())
    })
}

/// Entropy in bits of the distribution given by anonymity-set sizes.
///
/// # Safety
/// `counts` must point to `len` readable values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fp_entropy_from_counts(counts: *const usize, len: usize, out: *mut f64) -> FpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let counts: &[usize] = if len == 0 {
            &[]
        } else if counts.is_null() {
            return Err(null("counts"));
        } else {
            std::slice::from_raw_parts(counts, len)
        };
        let mut sorted = counts.to_vec();
        sorted.sort_unstable();
        *out = entropy_of_sizes(&sorted)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_log_load(path: *const c_char, out: *mut *mut FpObservationLog) -> FpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let log = ObservationLog::load(Path::new(text(path, "path")?))?;
        *out = boxed(FpObservationLog(log));
        Ok(())
    })
}

/// # Safety
/// `log` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn fp_log_free(log: *mut FpObservationLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}

/// # Safety
/// `log` must be a live handle, `pet` a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fp_infer_model(
    log: *const FpObservationLog,
    pet: *const c_char,
    f: f64,
    alpha: f64,
    out: *mut *mut FpMaskModel,
) -> FpStatus {
    guard(|| {
        let log = borrow(log, "log")?;
        let pet = text(pet, "pet")?;
        let out = out_ptr(out, "out")?;
        let params = StatParams::new(f, alpha)?;
        *out = boxed(FpMaskModel(infer_model(&log.0, pet, &params)?));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_model_load(path: *const c_char, out: *mut *mut FpMaskModel) -> FpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(FpMaskModel(MaskModel::load(Path::new(text(path, "path")?))?));
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fp_model_save(m: *const FpMaskModel, path: *const c_char) -> FpStatus {
    guard(|| {
        let m = borrow(m, "model")?;
        m.0.save(Path::new(text(path, "path")?))?;
        Ok(())
    })
}

/// The bundled handcrafted Tor Browser model.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_model_tor_handcrafted(out: *mut *mut FpMaskModel) -> FpStatus {
    guard(|| {
        *out_ptr(out, "out")? = boxed(FpMaskModel(tor_handcrafted_model()));
        Ok(())
    })
}

/// Number of attributes with a masked verdict, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn fp_model_masked_count(m: *const FpMaskModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.masked_attributes().count())
}

/// # Safety
/// `m` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn fp_model_free(m: *mut FpMaskModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `d` and `m` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_evaluate_pet(
    d: *const FpDataset,
    m: *const FpMaskModel,
    p: FpPolicy,
    out: *mut FpHybridReport,
) -> FpStatus {
    guard(|| {
        let d = borrow(d, "dataset")?;
        let m = borrow(m, "model")?;
        let out = out_ptr(out, "out")?;
        let r = evaluate_pet(&d.0, &m.0, policy(p))?;
        *out = FpHybridReport {
            before: r.before.into(),
            after: r.after.into(),
            eff_entropy: r.eff[&Metric::Entropy],
            eff_pct_le_1: r.eff[&Metric::PctLe1],
            eff_pct_le_10: r.eff[&Metric::PctLe10],
        };
        Ok(())
    })
}

/// # Safety
/// `d` and `m` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_popularity_evaluate(
    d: *const FpDataset,
    m: *const FpMaskModel,
    p: FpPolicy,
    users: usize,
    samples: usize,
    seed: u64,
    out: *mut FpEstimate,
) -> FpStatus {
    guard(|| {
        let d = borrow(d, "dataset")?;
        let m = borrow(m, "model")?;
        let out = out_ptr(out, "out")?;
        let e = popularity_evaluate(&d.0, &m.0, policy(p), users, samples, seed)?;
        *out = FpEstimate {
            entropy_mean: e.mean(Metric::Entropy),
            entropy_sem: e.sem(Metric::Entropy),
            pct_le_1_mean: e.mean(Metric::PctLe1),
            pct_le_1_sem: e.sem(Metric::PctLe1),
            pct_le_10_mean: e.mean(Metric::PctLe10),
            pct_le_10_sem: e.sem(Metric::PctLe10),
            samples: e.samples,
            sample_size: e.sample_size,
            seed: e.seed,
        };
        Ok(())
    })
}

fn strategy(s: &FpSpoofStrategy) -> Result<SpoofStrategy, Failure> {
    Ok(SpoofStrategy::new(s.cap_w, s.cap_h, s.quant_w, s.quant_h)?)
}

/// The Tor Browser default strategy.
#[no_mangle]
pub extern "C" fn fp_strategy_tor_default() -> FpSpoofStrategy {
    let s = SpoofStrategy::TOR_DEFAULT;
    FpSpoofStrategy {
        cap_w: s.cap_w,
        cap_h: s.cap_h,
        quant_w: s.quant_w,
        quant_h: s.quant_h,
    }
}

/// # Safety
/// `s`, `out_w` and `out_h` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fp_spoof(
    s: *const FpSpoofStrategy,
    w: u32,
    h: u32,
    out_w: *mut u32,
    out_h: *mut u32,
) -> FpStatus {
    guard(|| {
        let s = strategy(borrow(s, "strategy")?)?;
        let out_w = out_ptr(out_w, "out_w")?;
        let out_h = out_ptr(out_h, "out_h")?;
        if w == 0 || h == 0 {
            return Err(Failure(FpStatus::Domain, "window dimensions must be positive".into()));
        }
        (*out_w, *out_h) = s.spoof(w, h);
        Ok(())
    })
}

/// # Safety
/// `s` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fp_strategy_sets(s: *const FpSpoofStrategy, out: *mut u64) -> FpStatus {
    guard(|| {
        let s = strategy(borrow(s, "strategy")?)?;
        *out_ptr(out, "out")? = strategy_sets(&s);
        Ok(())
    })
}

/// # Safety
/// `d` and `m` must be live handles; `s` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fp_score_strategy(
    d: *const FpDataset,
    m: *const FpMaskModel,
    s: *const FpSpoofStrategy,
    out: *mut FpStrategyScore,
) -> FpStatus {
    guard(|| {
        let d = borrow(d, "dataset")?;
        let m = borrow(m, "model")?;
        let s = strategy(borrow(s, "strategy")?)?;
        let out = out_ptr(out, "out")?;
        let r = score_strategy(&d.0, &m.0, &s)?;
        *out = FpStrategyScore {
            entropy_bits: r.entropy_bits,
            pct_le_1: r.pct_le_1,
            pct_le_10: r.pct_le_10,
            abs_loss: r.abs_loss,
            pct_loss: r.pct_loss,
        };
        Ok(())
    })
}

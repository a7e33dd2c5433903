//! C ABI over `oce`.
//!
//! Every entry point returns an [`OceStatus`]; on failure the message is available
//! from [`oce_last_error_message`] on the same thread. Handles are opaque and must be
//! released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use oce::cost::CostSpec;
use oce::data::{Dataset, Label, LabeledInstance};
use oce::ensemble::{Algorithm, Ensemble, EnsembleConfig};
use oce::error::Error;
use oce::eval::auc_from_scores;
use oce::learners::LearnerKind;
use oce::online::OnlineEnsemble;
use oce::rng::{tag, RngStream};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OceStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    /// Data problems such as a dataset without one of the classes.
    Data = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OceLearner {
    NaiveBayes = 0,
    Lda = 1,
    Qda = 2,
}

/// Ensemble parameters; start from [`oce_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OceConfig {
    pub members: usize,
    pub learner: OceLearner,
    pub c_pos: f64,
    pub c_neg: f64,
    pub c_rate: f64,
    pub k_smote: usize,
    pub beta: f64,
}

/// Opaque online ensemble.
pub struct OceOnline(OnlineEnsemble);

/// Opaque trained batch ensemble.
pub struct OceBatch {
    ensemble: Ensemble,
    dim: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> OceStatus {
    match err {
        Error::DimensionMismatch { .. } => OceStatus::DimensionMismatch,
        Error::InvalidArgument(_) | Error::Config(_) => OceStatus::InvalidArgument,
        _ => OceStatus::Data,
    }
}

struct Fail(OceStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(OceStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OceStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            OceStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            OceStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn algorithm(name: *const c_char) -> Result<Algorithm, Fail> {
    if name.is_null() {
        return Err(null("algorithm"));
    }
    let s = CStr::from_ptr(name)
        .to_str()
        .map_err(|_| Fail(OceStatus::InvalidArgument, "algorithm is not UTF-8".into()))?;
    Ok(s.parse()?)
}

unsafe fn config(cfg: *const OceConfig) -> Result<EnsembleConfig, Fail> {
    let c = if cfg.is_null() { oce_config_default() } else { *cfg };
    let learner = match c.learner {
        OceLearner::NaiveBayes => LearnerKind::NaiveBayes,
        OceLearner::Lda => LearnerKind::Lda,
        OceLearner::Qda => LearnerKind::Qda,
    };
    let out = EnsembleConfig {
        members: c.members,
        learner,
        cost: CostSpec::new(c.c_pos, c.c_neg, c.c_rate)?,
        k_smote: c.k_smote,
        beta: c.beta,
    };
    out.validate()?;
    Ok(out)
}

fn label(bit: u8) -> Result<Label, Fail> {
    Label::from_bit(bit).ok_or_else(|| Fail(OceStatus::InvalidArgument, format!("label must be 0 or 1 (got {bit})")))
}

fn check_dim(expected: usize, actual: usize) -> Result<(), Fail> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual }.into());
    }
    Ok(())
}

/// Defaults: 10 members, naive Bayes, unit costs and rate, k = 5, no forgetting.
#[no_mangle]
pub extern "C" fn oce_config_default() -> OceConfig {
    let d = EnsembleConfig::default();
    OceConfig {
        members: d.members,
        learner: OceLearner::NaiveBayes,
        c_pos: d.cost.c_pos,
        c_neg: d.cost.c_neg,
        c_rate: d.cost.c_rate,
        k_smote: d.k_smote,
        beta: d.beta,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn oce_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn oce_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Creates an online ensemble. `algorithm` is an id such as `"uob"` or `"adac2"`;
/// a null `cfg` means the defaults.
///
/// # Safety
/// `algorithm` must be a NUL-terminated string, `cfg` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oce_online_new(
    algorithm_id: *const c_char,
    cfg: *const OceConfig,
    dim: usize,
    seed: u64,
    out: *mut *mut OceOnline,
) -> OceStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let alg = algorithm(algorithm_id)?;
        let cfg = config(cfg)?;
        let ens = OnlineEnsemble::new(alg, cfg, dim, &RngStream::new(seed, tag::MEMBER))?;
        *out = Box::into_raw(Box::new(OceOnline(ens)));
        Ok(())
    })
}

/// Learns one instance with label 0 (negative) or 1 (positive).
///
/// # Safety
/// `handle` must come from [`oce_online_new`]; `x` must hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn oce_online_update(handle: *mut OceOnline, x: *const f64, dim: usize, y: u8) -> OceStatus {
    guard(|| {
        let h = handle.as_mut().ok_or_else(|| null("handle"))?;
        let x = slice(x, dim, "x")?;
        check_dim(h.0.dim(), dim)?;
        let inst = LabeledInstance::new(x.to_vec(), label(y)?)?;
        h.0.update(&inst)?;
        Ok(())
    })
}

/// Writes the ensemble's positive-vote score in `[0, 1]`.
///
/// # Safety
/// `handle` must be live; `x` must hold `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oce_online_score(handle: *const OceOnline, x: *const f64, dim: usize, out: *mut f64) -> OceStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let x = slice(x, dim, "x")?;
        check_dim(h.0.dim(), dim)?;
        *out = h.0.score(x);
        Ok(())
    })
}

/// Writes the predicted label (0 or 1).
///
/// # Safety
/// As for [`oce_online_score`].
#[no_mangle]
pub unsafe extern "C" fn oce_online_predict(handle: *const OceOnline, x: *const f64, dim: usize, out: *mut u8) -> OceStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let x = slice(x, dim, "x")?;
        check_dim(h.0.dim(), dim)?;
        *out = h.0.predict(x).bit();
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or come from [`oce_online_new`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn oce_online_free(handle: *mut OceOnline) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Trains a batch ensemble on `n` row-major instances of `dim` features.
///
/// # Safety
/// `rows` must hold `n * dim` doubles, `labels` `n` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oce_batch_train(
    algorithm_id: *const c_char,
    cfg: *const OceConfig,
    rows: *const f64,
    labels: *const u8,
    n: usize,
    dim: usize,
    seed: u64,
    out: *mut *mut OceBatch,
) -> OceStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let alg = algorithm(algorithm_id)?;
        let cfg = config(cfg)?;
        if dim == 0 {
            return Err(Fail(OceStatus::InvalidArgument, "dim must be at least 1".into()));
        }
        let total = n.checked_mul(dim).ok_or_else(|| Fail(OceStatus::InvalidArgument, "n * dim overflows".into()))?;
        let rows = slice(rows, total, "rows")?;
        let labels = slice(labels, n, "labels")?;
        let instances = rows
            .chunks_exact(dim)
            .zip(labels)
            .map(|(x, &y)| Ok(LabeledInstance::new(x.to_vec(), label(y)?)?))
            .collect::<Result<Vec<_>, Fail>>()?;
        let data = Dataset::new(instances)?;
        let ensemble = oce::batch::train(alg, &data, &cfg, &RngStream::new(seed, tag::MEMBER))?;
        *out = Box::into_raw(Box::new(OceBatch { ensemble, dim }));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`oce_batch_train`]; `x` must hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn oce_batch_score(handle: *const OceBatch, x: *const f64, dim: usize, out: *mut f64) -> OceStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let x = slice(x, dim, "x")?;
        check_dim(h.dim, dim)?;
        *out = h.ensemble.score(x);
        Ok(())
    })
}

/// # Safety
/// As for [`oce_batch_score`].
#[no_mangle]
pub unsafe extern "C" fn oce_batch_predict(handle: *const OceBatch, x: *const f64, dim: usize, out: *mut u8) -> OceStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let x = slice(x, dim, "x")?;
        check_dim(h.dim, dim)?;
        *out = h.ensemble.predict(x).bit();
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or come from [`oce_batch_train`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn oce_batch_free(handle: *mut OceBatch) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Rank-based AUC of `n` scores against 0/1 labels.
///
/// # Safety
/// `scores` and `labels` must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oce_auc(scores: *const f64, labels: *const u8, n: usize, out: *mut f64) -> OceStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let scores = slice(scores, n, "scores")?;
        let labels = slice(labels, n, "labels")?.iter().map(|&b| label(b)).collect::<Result<Vec<_>, _>>()?;
        *out = auc_from_scores(scores, &labels)?;
        Ok(())
    })
}

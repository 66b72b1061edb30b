//! C ABI over `ergm-exact`.
//!
//! Every fallible function returns an [`ErgmStatus`]; on failure the message
//! is available from [`ergm_last_error_message`] on the same thread. Sets are
//! opaque handles released with [`ergm_realizable_set_free`]; strings handed
//! out are released with [`ergm_string_free`]. Exact targets are passed as
//! parallel numerator/denominator arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ergm_exact::cli::{parse_config, run};
use ergm_exact::geometry::{affine_geometry, rint_membership, Verdict};
use ergm_exact::graphspace::{realizable_set, RealizableSet, StatisticKind, StatisticSpec};
use ergm_exact::likelihood::{fit_mle, log_likelihood, FitConfig, Theta};
use ergm_exact::rational::{Rational, RationalVector};
use ergm_exact::Error;
use num_bigint::BigInt;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErgmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    CapacityExceeded = 3,
    NoMle = 4,
    NonConvergence = 5,
    NotSeparable = 6,
    ViolatedBound = 7,
    Certificate = 8,
    Config = 9,
    Cache = 10,
    Io = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErgmStatistic {
    Edges = 0,
    Triangles = 1,
    TwoStars = 2,
    MeanDegree = 3,
    Isolates = 4,
    MaxDegree = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErgmVerdict {
    RelativeInterior = 0,
    RelativeBoundary = 1,
    OutsideHull = 2,
    OutsideAffineHull = 3,
}

/// Opaque realizable set.
pub struct ErgmRealizableSet {
    inner: RealizableSet,
}

impl From<ErgmStatistic> for StatisticKind {
    fn from(s: ErgmStatistic) -> Self {
        match s {
            ErgmStatistic::Edges => StatisticKind::Edges,
            ErgmStatistic::Triangles => StatisticKind::Triangles,
            ErgmStatistic::TwoStars => StatisticKind::TwoStars,
            ErgmStatistic::MeanDegree => StatisticKind::MeanDegree,
            ErgmStatistic::Isolates => StatisticKind::Isolates,
            ErgmStatistic::MaxDegree => StatisticKind::MaxDegree,
        }
    }
}

impl From<Verdict> for ErgmVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::RelativeInterior => ErgmVerdict::RelativeInterior,
            Verdict::RelativeBoundary => ErgmVerdict::RelativeBoundary,
            Verdict::OutsideHull => ErgmVerdict::OutsideHull,
            Verdict::OutsideAffineHull => ErgmVerdict::OutsideAffineHull,
        }
    }
}

fn status_of(err: &Error) -> ErgmStatus {
    match err {
        Error::InvalidInput(_) => ErgmStatus::InvalidInput,
        Error::CapacityExceeded { .. } => ErgmStatus::CapacityExceeded,
        Error::NoMle { .. } => ErgmStatus::NoMle,
        Error::NonConvergence { .. } => ErgmStatus::NonConvergence,
        Error::NotSeparable { .. } => ErgmStatus::NotSeparable,
        Error::ViolatedBound { .. } => ErgmStatus::ViolatedBound,
        Error::Certificate(_) => ErgmStatus::Certificate,
        Error::Config { .. } => ErgmStatus::Config,
        Error::Cache(_) => ErgmStatus::Cache,
        Error::Io(_) => ErgmStatus::Io,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> ErgmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ErgmStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is NULL"));
            ErgmStatus::NullPointer
        }
        Ok(Err(Failure::Lib(err))) => {
            set_last_error(err.to_string());
            status_of(&err)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            ErgmStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn target(num: *const i64, den: *const i64, len: usize) -> Result<RationalVector, Failure> {
    let num = slice(num, len, "numerators")?;
    let den = slice(den, len, "denominators")?;
    let mut coords = Vec::with_capacity(len);
    for (&n, &d) in num.iter().zip(den) {
        if d == 0 {
            return Err(Error::InvalidInput("zero denominator".into()).into());
        }
        coords.push(Rational::new(BigInt::from(n), BigInt::from(d)));
    }
    Ok(RationalVector(coords))
}

/// Enumerates every graph on `k` vertices and tallies the statistics.
///
/// # Safety
/// `stats` points to `n_stats` values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ergm_realizable_set_new(
    k: u32,
    stats: *const ErgmStatistic,
    n_stats: usize,
    out: *mut *mut ErgmRealizableSet,
) -> ErgmStatus {
    guard(|| {
        let kinds: Vec<StatisticKind> = slice(stats, n_stats, "stats")?
            .iter()
            .map(|&s| s.into())
            .collect();
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let specs: Vec<StatisticSpec> = StatisticSpec::list(&kinds);
        let set = realizable_set(k as usize, &specs)?;
        write(
            out,
            Box::into_raw(Box::new(ErgmRealizableSet { inner: set })),
            "out",
        )
    })
}

/// # Safety
/// `set` is NULL or a handle from [`ergm_realizable_set_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ergm_realizable_set_free(set: *mut ErgmRealizableSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of distinct realizable points; 0 for NULL.
///
/// # Safety
/// `set` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ergm_realizable_set_len(set: *const ErgmRealizableSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.len())
}

/// Number of statistics per point; 0 for NULL.
///
/// # Safety
/// `set` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ergm_realizable_set_dim(set: *const ErgmRealizableSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.dim())
}

/// Total number of graphs, `2^(k(k−1)/2)`; 0 for NULL.
///
/// # Safety
/// `set` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ergm_realizable_set_total(set: *const ErgmRealizableSet) -> u64 {
    set.as_ref().map_or(0, |s| s.inner.total)
}

/// Writes point `index` (rounded to double) into `out[0..dim]` and its
/// multiplicity into `multiplicity` (which may be NULL).
///
/// # Safety
/// `set` is a live handle; `out` has room for `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn ergm_realizable_set_point(
    set: *const ErgmRealizableSet,
    index: usize,
    out: *mut f64,
    multiplicity: *mut u64,
) -> ErgmStatus {
    guard(|| {
        let set = &as_ref(set, "set")?.inner;
        if index >= set.len() {
            return Err(Error::InvalidInput(format!("index {index} out of range")).into());
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        for (i, c) in set.points[index].to_f64().into_iter().enumerate() {
            out.add(i).write(c);
        }
        if !multiplicity.is_null() {
            multiplicity.write(set.multiplicities[index]);
        }
        Ok(())
    })
}

/// Dimension of the hull of realizable points.
///
/// # Safety
/// `set` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ergm_affine_dim(
    set: *const ErgmRealizableSet,
    out: *mut usize,
) -> ErgmStatus {
    guard(|| {
        let geometry = affine_geometry(&as_ref(set, "set")?.inner)?;
        write(out, geometry.dim, "out")
    })
}

/// Classifies the exact target `num[i]/den[i]` against the hull.
///
/// # Safety
/// `num` and `den` hold `len` values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ergm_check_membership(
    set: *const ErgmRealizableSet,
    num: *const i64,
    den: *const i64,
    len: usize,
    out: *mut ErgmVerdict,
) -> ErgmStatus {
    guard(|| {
        let set = &as_ref(set, "set")?.inner;
        let t = target(num, den, len)?;
        let certificate = rint_membership(&t, set)?;
        write(out, certificate.verdict.into(), "out")
    })
}

/// Fits the MLE with default settings, writing `θ̂` into `theta_out[0..len]`.
/// Returns `NoMle` when the target is not in the relative interior.
///
/// # Safety
/// `num`, `den` and `theta_out` hold `len` values; `iterations` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ergm_fit_mle(
    set: *const ErgmRealizableSet,
    num: *const i64,
    den: *const i64,
    len: usize,
    theta_out: *mut f64,
    iterations: *mut usize,
) -> ErgmStatus {
    guard(|| {
        let set = &as_ref(set, "set")?.inner;
        let t = target(num, den, len)?;
        if theta_out.is_null() {
            return Err(Failure::Null("theta_out"));
        }
        let fit = fit_mle(&t, set, &FitConfig::default())?;
        for (i, x) in fit.theta_hat.iter().enumerate() {
            theta_out.add(i).write(*x);
        }
        if !iterations.is_null() {
            iterations.write(fit.iterations);
        }
        Ok(())
    })
}

/// `ℓ(θ) = θ·t − κ(θ)`.
///
/// # Safety
/// `theta`, `num` and `den` hold `len` values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ergm_log_likelihood(
    set: *const ErgmRealizableSet,
    theta: *const f64,
    num: *const i64,
    den: *const i64,
    len: usize,
    out: *mut f64,
) -> ErgmStatus {
    guard(|| {
        let set = &as_ref(set, "set")?.inner;
        let theta = Theta(slice(theta, len, "theta")?.to_vec());
        let t = target(num, den, len)?;
        write(out, log_likelihood(&theta, &t, set)?, "out")
    })
}

/// Runs the full pipeline on a TOML configuration. On `Ok`, `*json_out`
/// receives the report (free with [`ergm_string_free`]) and `*exit_code`
/// the command-line exit code it corresponds to.
///
/// # Safety
/// `config_toml` is a NUL-terminated string; outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn ergm_run_report(
    config_toml: *const c_char,
    json_out: *mut *mut c_char,
    exit_code: *mut i32,
) -> ErgmStatus {
    guard(|| {
        if config_toml.is_null() {
            return Err(Failure::Null("config_toml"));
        }
        if json_out.is_null() {
            return Err(Failure::Null("json_out"));
        }
        let text = CStr::from_ptr(config_toml)
            .to_str()
            .map_err(|_| Error::InvalidInput("config is not UTF-8".into()))?;
        let report = run(&parse_config(text)?)?;
        let json = CString::new(report.to_json()).expect("JSON has no NUL bytes");
        if !exit_code.is_null() {
            exit_code.write(report.exit_code());
        }
        json_out.write(json.into_raw());
        Ok(())
    })
}

/// # Safety
/// `s` is NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ergm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ergm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

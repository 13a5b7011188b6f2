//! C ABI for robann.
//!
//! Every function returns a [`RobannStatus`]; results travel through out
//! pointers. Objects are opaque handles created by `*_new`/`*_build` and
//! released with the matching `*_free`. On failure a message is kept per
//! thread and can be read with [`robann_last_error`].
//!
//! Points cross the boundary as `dim` bytes, each 0 or 1.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use robann::budget::WorkBudget;
use robann::constants::Constants;
use robann::dp;
use robann::error::Error;
use robann::fair::FairIndex;
use robann::forall::hamming::DEFAULT_RHO;
use robann::forall::{rho_prime, ForAllHammingIndex};
use robann::metric::{Dataset, Metric, Point, PointId};
use robann::params::{ProblemParams, RhoFn};
use robann::rng::{StreamId, StreamRng};
use robann::robust::exponent_optimize;
use robann::search::Answer;

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RobannStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    ModeMismatch = 4,
    DeadPoint = 5,
    QueryBudgetExceeded = 6,
    SizingViolation = 7,
    Parse = 8,
    Io = 9,
    /// A Rust panic was caught at the boundary.
    Internal = 10,
}

/// Exponent function for the annulus optimizer.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RobannRho {
    /// `1/(2c-1)`
    HammingOpt = 0,
    /// `1/(2c^2-1)`
    L2Opt = 1,
    /// `1/c`
    BitSampling = 2,
}

/// What a query returned.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RobannAnswerKind {
    Point = 0,
    Bottom = 1,
    Timeout = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RobannExponent {
    pub k_star: u64,
    pub beta: f64,
    pub k_crossover: f64,
}

/// Problem instance shared by the index constructors.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobannProblem {
    /// Approximation factor, > 1.
    pub c: f64,
    /// Near radius, > 0.
    pub r: f64,
    /// Number of queries the index must survive.
    pub queries: u64,
    /// Failure probability.
    pub delta: f64,
}

/// A growable set of Hamming points.
pub struct RobannDataset(Dataset);

/// Fair near-neighbor sampler.
pub struct RobannFairIndex(FairIndex);

/// Index that answers every query in the cube correctly with high probability.
pub struct RobannForAllIndex(ForAllHammingIndex);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RobannStatus {
    match e {
        Error::DimensionMismatch { .. } => RobannStatus::DimensionMismatch,
        Error::ModeMismatch(_) => RobannStatus::ModeMismatch,
        Error::DeadPoint(_) => RobannStatus::DeadPoint,
        Error::QueryBudgetExceeded(_) => RobannStatus::QueryBudgetExceeded,
        Error::SizingViolation(_) => RobannStatus::SizingViolation,
        Error::Parse { .. } | Error::CorruptBlob(_) => RobannStatus::Parse,
        Error::Io(_) => RobannStatus::Io,
        _ => RobannStatus::InvalidArgument,
    }
}

struct Fail(RobannStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RobannStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RobannStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RobannStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            RobannStatus::Internal
        }
    }
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn mutable<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn point(bits: *const u8, dim: usize) -> Result<Point, Fail> {
    if bits.is_null() {
        return Err(null("bits"));
    }
    Ok(Point::bits(std::slice::from_raw_parts(bits, dim))?)
}

fn params(p: &RobannProblem) -> Result<ProblemParams, Fail> {
    Ok(ProblemParams::hamming(p.c, p.r, p.queries, p.delta)?)
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn robann_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn robann_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates an empty Hamming dataset of dimension `dim`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn robann_dataset_new(dim: usize, out: *mut *mut RobannDataset) -> RobannStatus {
    guard(|| {
        let ds = Dataset::new(Metric::Hamming, dim)?;
        write(out, Box::into_raw(Box::new(RobannDataset(ds))), "out")
    })
}

/// Appends a point given as `dim` bytes; its id is written to `out_id`.
///
/// # Safety
/// `ds` must come from [`robann_dataset_new`]; `bits` must point to `dim` bytes.
#[no_mangle]
pub unsafe extern "C" fn robann_dataset_push(
    ds: *mut RobannDataset,
    bits: *const u8,
    dim: usize,
    out_id: *mut u32,
) -> RobannStatus {
    guard(|| {
        let ds = mutable(ds, "dataset")?;
        let id = ds.0.push(point(bits, dim)?)?;
        if !out_id.is_null() {
            out_id.write(id.0);
        }
        Ok(())
    })
}

/// Removes point `id`.
///
/// # Safety
/// `ds` must come from [`robann_dataset_new`].
#[no_mangle]
pub unsafe extern "C" fn robann_dataset_remove(ds: *mut RobannDataset, id: u32) -> RobannStatus {
    guard(|| {
        mutable(ds, "dataset")?.0.remove(PointId(id))?;
        Ok(())
    })
}

/// Number of live points.
///
/// # Safety
/// `ds` must come from [`robann_dataset_new`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn robann_dataset_len(ds: *const RobannDataset, out: *mut usize) -> RobannStatus {
    guard(|| write(out, reference(ds, "dataset")?.0.len(), "out"))
}

/// # Safety
/// `ds` must come from [`robann_dataset_new`] or be null, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn robann_dataset_free(ds: *mut RobannDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Builds a fair sampler over a snapshot of `ds` with default constants.
///
/// # Safety
/// `ds` and `problem` must be valid; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn robann_fair_build(
    ds: *const RobannDataset,
    problem: *const RobannProblem,
    seed: u64,
    out: *mut *mut RobannFairIndex,
) -> RobannStatus {
    guard(|| {
        let ds = reference(ds, "dataset")?;
        let p = params(reference(problem, "problem")?)?;
        let fi = FairIndex::build(ds.0.clone(), p, seed, &Constants::default())?;
        write(out, Box::into_raw(Box::new(RobannFairIndex(fi))), "out")
    })
}

/// Samples a near neighbor of the query. The query randomness is the stream
/// `round` under `query_seed`, so equal arguments give equal answers.
/// `out_id` is written only when the answer is a point.
///
/// # Safety
/// `idx` must come from [`robann_fair_build`]; `bits` must point to `dim` bytes.
#[no_mangle]
pub unsafe extern "C" fn robann_fair_query(
    idx: *const RobannFairIndex,
    bits: *const u8,
    dim: usize,
    query_seed: u64,
    round: u64,
    out_kind: *mut RobannAnswerKind,
    out_id: *mut u32,
) -> RobannStatus {
    guard(|| {
        let idx = reference(idx, "index")?;
        let q = point(bits, dim)?;
        let mut rng = StreamRng::new(query_seed, StreamId::derive("query", &[round]));
        let ans = idx.0.query(&q, &mut rng, &mut WorkBudget::unlimited())?;
        let kind = match ans {
            Answer::Point(id) => {
                if !out_id.is_null() {
                    out_id.write(id.0);
                }
                RobannAnswerKind::Point
            }
            Answer::Timeout => RobannAnswerKind::Timeout,
            _ => RobannAnswerKind::Bottom,
        };
        write(out_kind, kind, "out_kind")
    })
}

/// Inserts a point; the new id is written to `out_id`.
///
/// # Safety
/// `idx` must come from [`robann_fair_build`]; `bits` must point to `dim` bytes.
#[no_mangle]
pub unsafe extern "C" fn robann_fair_insert(
    idx: *mut RobannFairIndex,
    bits: *const u8,
    dim: usize,
    out_id: *mut u32,
) -> RobannStatus {
    guard(|| {
        let id = mutable(idx, "index")?.0.insert(point(bits, dim)?)?;
        if !out_id.is_null() {
            out_id.write(id.0);
        }
        Ok(())
    })
}

/// # Safety
/// `idx` must come from [`robann_fair_build`].
#[no_mangle]
pub unsafe extern "C" fn robann_fair_delete(idx: *mut RobannFairIndex, id: u32) -> RobannStatus {
    guard(|| {
        mutable(idx, "index")?.0.delete(PointId(id))?;
        Ok(())
    })
}

/// # Safety
/// `idx` must come from [`robann_fair_build`] or be null, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn robann_fair_free(idx: *mut RobannFairIndex) {
    if !idx.is_null() {
        drop(Box::from_raw(idx));
    }
}

/// Builds the for-all index over a snapshot of `ds`. Fails with
/// `SizingViolation` when the table count cannot cover the whole cube.
///
/// # Safety
/// `ds` and `problem` must be valid; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn robann_forall_build(
    ds: *const RobannDataset,
    problem: *const RobannProblem,
    seed: u64,
    out: *mut *mut RobannForAllIndex,
) -> RobannStatus {
    guard(|| {
        let ds = reference(ds, "dataset")?;
        let p = params(reference(problem, "problem")?)?;
        let idx = ForAllHammingIndex::build(ds.0.clone(), p, DEFAULT_RHO, seed, &Constants::default())?;
        write(out, Box::into_raw(Box::new(RobannForAllIndex(idx))), "out")
    })
}

/// Deterministic query. `out_found` is set to 1 and `out_id` written when a
/// point within `cr` is returned, else `out_found` is 0.
///
/// # Safety
/// `idx` must come from [`robann_forall_build`]; `bits` must point to `dim` bytes.
#[no_mangle]
pub unsafe extern "C" fn robann_forall_query(
    idx: *const RobannForAllIndex,
    bits: *const u8,
    dim: usize,
    out_found: *mut u8,
    out_id: *mut u32,
) -> RobannStatus {
    guard(|| {
        let ans = reference(idx, "index")?.0.query(&point(bits, dim)?)?;
        if let (Some(id), false) = (ans, out_id.is_null()) {
            out_id.write(id.0);
        }
        write(out_found, u8::from(ans.is_some()), "out_found")
    })
}

/// # Safety
/// `idx` must come from [`robann_forall_build`] or be null, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn robann_forall_free(idx: *mut RobannForAllIndex) {
    if !idx.is_null() {
        drop(Box::from_raw(idx));
    }
}

/// Best annulus count and exponent for approximation factor `c`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn robann_exponent_optimize(c: f64, rho: RobannRho, out: *mut RobannExponent) -> RobannStatus {
    guard(|| {
        if !(c > 1.0 && c.is_finite()) {
            return Err(Fail(
                RobannStatus::InvalidArgument,
                format!("c must be finite and > 1, got {c}"),
            ));
        }
        let rho = match rho {
            RobannRho::HammingOpt => RhoFn::HammingOpt,
            RobannRho::L2Opt => RhoFn::L2Opt,
            RobannRho::BitSampling => RhoFn::BitSampling,
        };
        let r = exponent_optimize(c, rho);
        write(
            out,
            RobannExponent {
                k_star: r.k_star,
                beta: r.beta,
                k_crossover: r.k_crossover,
            },
            "out",
        )
    })
}

/// Privacy of `k` adaptively composed `(eps, delta)` mechanisms with slack `delta_prime`.
///
/// # Safety
/// The out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn robann_advanced_composition(
    eps: f64,
    delta: f64,
    k: u64,
    delta_prime: f64,
    out_eps: *mut f64,
    out_delta: *mut f64,
) -> RobannStatus {
    guard(|| {
        let (e, d) = dp::advanced_composition(eps, delta, k, delta_prime)?;
        write(out_eps, e, "out_eps")?;
        write(out_delta, d, "out_delta")
    })
}

/// Privacy after subsampling `m` of `n` rows with replacement.
///
/// # Safety
/// The out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn robann_subsampling_amplification(
    eps: f64,
    delta: f64,
    m: u64,
    n: u64,
    out_eps: *mut f64,
    out_delta: *mut f64,
) -> RobannStatus {
    guard(|| {
        let (e, d) = dp::subsampling_amplification(eps, delta, m, n)?;
        write(out_eps, e, "out_eps")?;
        write(out_delta, d, "out_delta")
    })
}

/// Copy count and subsample size of the robust decider at default coefficients.
///
/// # Safety
/// The out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn robann_decider_constants(
    queries: u64,
    delta: f64,
    eps: f64,
    out_copies: *mut u64,
    out_k_sub: *mut u64,
) -> RobannStatus {
    guard(|| {
        if queries == 0 || !(delta > 0.0 && delta < 1.0) || !(eps > 0.0) {
            return Err(Fail(
                RobannStatus::InvalidArgument,
                "need queries >= 1, 0 < delta < 1, eps > 0".into(),
            ));
        }
        let k = Constants::default();
        let dc = dp::decider_constants_formula(queries, delta, eps, k.decider_l_coeff, k.decider_ksub_coeff);
        write(out_copies, dc.copies, "out_copies")?;
        write(out_k_sub, dc.k_sub, "out_k_sub")
    })
}

/// Exponent of the discretized index at covering radius `cr/10`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn robann_rho_prime(c: f64, out: *mut f64) -> RobannStatus {
    guard(|| {
        let v = rho_prime(c);
        if !(v.is_finite() && v > 0.0) {
            return Err(Fail(
                RobannStatus::InvalidArgument,
                format!("rho' undefined at c = {c}"),
            ));
        }
        write(out, v, "out")
    })
}

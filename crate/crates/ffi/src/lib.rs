//! C ABI over the core library.
//!
//! Handles are opaque pointers created and released by paired `_new`/`_free`
//! calls; every fallible entry point returns an [`NmepStatus`] code and
//! writes results through out-pointers. The most recent failure message on
//! the calling thread is available from [`nmep_last_error_message`]. The
//! matching C header is maintained by hand at `include/nmep.h`; the
//! `header_covers_every_export` test keeps it in sync with this file.
//!
//! Thread safety: handles are immutable after construction and may be shared
//! across threads; the error message is thread-local.
//!
//! # Safety
//!
//! Every function taking pointers is `unsafe` with the usual C contract:
//! out-pointers must be writable, array pointers must cover the stated
//! length, and handles must originate from the matching constructor and not
//! be used after their `_free`. Null pointers are detected and reported as
//! `NMEP_STATUS_NULL_POINTER`; dangling or mistyped pointers cannot be.

#![warn(unsafe_op_in_unsafe_fn)]
// The pointer contract is uniform and documented once in the module docs
// above rather than repeated on every export.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::ops::RangeInclusive;
use std::panic::{catch_unwind, AssertUnwindSafe};

use nmep::dynamics::{integrate, pseudomode_two_pole, series_amplitude, TimeSeries};
use nmep::ep::{
    collective_critical_distance, design_ep_n, ep_residuals, find_ep2_single_delay,
    find_ep3_symmetric, hankel_invert, EpOutcome, EpReport,
};
use nmep::models::{CollectiveModel, DelaySystem, GiantAtomModel};
use nmep::special::lambert_w;
use nmep::spectral::{
    argument_principle_count, char_function, poles_closed_form, poles_search, PoleSet, Rect,
};
use nmep::{Complex64, Error};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmepStatus {
    Ok = 0,
    InvalidInput = 1,
    Domain = 2,
    NoConvergence = 3,
    Infeasible = 4,
    /// Structured "no exceptional point" outcome (not an error).
    NoEp = 5,
    GridMisaligned = 6,
    SeriesOverflow = 7,
    IncompleteSpectrum = 8,
    ContourNearZero = 9,
    MultiplePole = 10,
    NoPhysicalCouplings = 11,
    Io = 12,
    NullPointer = 13,
    Panic = 14,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap_or_default());
}

fn status_of(err: &Error) -> NmepStatus {
    match err {
        Error::InvalidInput(_) => NmepStatus::InvalidInput,
        Error::Domain(_) => NmepStatus::Domain,
        Error::NoConvergence { .. } => NmepStatus::NoConvergence,
        Error::GridMisaligned { .. } => NmepStatus::GridMisaligned,
        Error::SeriesOverflow { .. } => NmepStatus::SeriesOverflow,
        Error::Infeasible(_) => NmepStatus::Infeasible,
        Error::IncompleteSpectrum { .. } => NmepStatus::IncompleteSpectrum,
        Error::ContourNearZero { .. } => NmepStatus::ContourNearZero,
        Error::MultiplePole { .. } => NmepStatus::MultiplePole,
        Error::NoPhysicalCouplings { .. } => NmepStatus::NoPhysicalCouplings,
        Error::Io(_) => NmepStatus::Io,
    }
}

fn fail(err: Error) -> NmepStatus {
    let code = status_of(&err);
    set_error(&err.to_string());
    code
}

/// Run `f`, mapping panics to a status instead of unwinding across the ABI.
fn guarded(f: impl FnOnce() -> NmepStatus) -> NmepStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            NmepStatus::Panic
        }
    }
}

macro_rules! check_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            set_error("null pointer argument");
            return NmepStatus::NullPointer;
        })+
    };
}

/// Most recent error message on this thread, valid until the next failing
/// call from the same thread.
#[no_mangle]
pub extern "C" fn nmep_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must have been returned by an `nmep_*` call that documents this
/// deallocator, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nmep_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Branch `n` of the Lambert W function at `z = re + i im`.
#[no_mangle]
pub unsafe extern "C" fn nmep_lambert_w(
    branch: i32,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> NmepStatus {
    guarded(|| {
        check_null!(out_re, out_im);
        match lambert_w(branch, Complex64::new(re, im)) {
            Ok(w) => {
                unsafe {
                    *out_re = w.re;
                    *out_im = w.im;
                }
                NmepStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---------------------------------------------------------------------------
// Delay systems
// ---------------------------------------------------------------------------

pub struct NmepDelaySystem(DelaySystem);
pub struct NmepTimeSeries(TimeSeries);
pub struct NmepPoleSet(PoleSet);
pub struct NmepEpReport(EpReport);

fn emit_handle<T>(out: *mut *mut T, value: T) -> NmepStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    NmepStatus::Ok
}

/// Build a delay system from complex coefficients `c_m` (index = delay
/// multiplier) and base delay `tau`.
#[no_mangle]
pub unsafe extern "C" fn nmep_delay_system_new(
    tau: f64,
    coeffs_re: *const f64,
    coeffs_im: *const f64,
    len: usize,
    out: *mut *mut NmepDelaySystem,
) -> NmepStatus {
    guarded(|| {
        check_null!(coeffs_re, coeffs_im, out);
        let re = unsafe { std::slice::from_raw_parts(coeffs_re, len) };
        let im = unsafe { std::slice::from_raw_parts(coeffs_im, len) };
        let coeffs = re
            .iter()
            .zip(im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        match DelaySystem::new(tau, coeffs) {
            Ok(sys) => emit_handle(out, NmepDelaySystem(sys)),
            Err(e) => fail(e),
        }
    })
}

/// Single-delay system of the two-point atom with equal couplings.
#[no_mangle]
pub unsafe extern "C" fn nmep_delay_system_single(
    gamma: f64,
    phi: f64,
    tau: f64,
    out: *mut *mut NmepDelaySystem,
) -> NmepStatus {
    guarded(|| {
        check_null!(out);
        match DelaySystem::single_delay(gamma, phi, tau) {
            Ok(sys) => emit_handle(out, NmepDelaySystem(sys)),
            Err(e) => fail(e),
        }
    })
}

/// Reduce an N-point giant atom to its canonical delay system.
#[no_mangle]
pub unsafe extern "C" fn nmep_giant_atom_delay_system(
    couplings: *const f64,
    n: usize,
    group_velocity: f64,
    tau: f64,
    phi: f64,
    out: *mut *mut NmepDelaySystem,
) -> NmepStatus {
    guarded(|| {
        check_null!(couplings, out);
        let g = unsafe { std::slice::from_raw_parts(couplings, n) }.to_vec();
        match GiantAtomModel::new(g, group_velocity, tau, phi) {
            Ok(model) => emit_handle(out, NmepDelaySystem(model.delay_system())),
            Err(e) => fail(e),
        }
    })
}

/// Symmetric-sector reduction of the collectively emitting pair.
#[no_mangle]
pub unsafe extern "C" fn nmep_collective_delay_system(
    gamma: f64,
    beta: f64,
    phase: f64,
    tau: f64,
    out: *mut *mut NmepDelaySystem,
) -> NmepStatus {
    guarded(|| {
        check_null!(out);
        let system = CollectiveModel::new(gamma, beta, phase, tau)
            .and_then(|m| m.delay_system(true));
        match system {
            Ok(sys) => emit_handle(out, NmepDelaySystem(sys)),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `sys` must come from an `nmep_*_delay_system*` constructor and not be
/// freed twice.
#[no_mangle]
pub unsafe extern "C" fn nmep_delay_system_free(sys: *mut NmepDelaySystem) {
    if !sys.is_null() {
        drop(unsafe { Box::from_raw(sys) });
    }
}

/// `D^(order)(s)` of the characteristic function (order <= 6).
#[no_mangle]
pub unsafe extern "C" fn nmep_char_function(
    sys: *const NmepDelaySystem,
    s_re: f64,
    s_im: f64,
    order: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> NmepStatus {
    guarded(|| {
        check_null!(sys, out_re, out_im);
        if order > 6 {
            set_error("derivative order capped at 6");
            return NmepStatus::InvalidInput;
        }
        let system = unsafe { &(*sys).0 };
        let d = char_function(system, Complex64::new(s_re, s_im), order);
        unsafe {
            *out_re = d.re;
            *out_im = d.im;
        }
        NmepStatus::Ok
    })
}

// ---------------------------------------------------------------------------
// Time domain
// ---------------------------------------------------------------------------

/// Integrate from `a(0) = a0` with zero history, sampling every `dt`.
#[no_mangle]
pub unsafe extern "C" fn nmep_integrate(
    sys: *const NmepDelaySystem,
    a0_re: f64,
    a0_im: f64,
    t_max: f64,
    dt: f64,
    out: *mut *mut NmepTimeSeries,
) -> NmepStatus {
    guarded(|| {
        check_null!(sys, out);
        let system = unsafe { &(*sys).0 };
        match integrate(system, Complex64::new(a0_re, a0_im), t_max, dt) {
            Ok(ts) => emit_handle(out, NmepTimeSeries(ts)),
            Err(e) => fail(e),
        }
    })
}

/// Exact series amplitude of the single-delay system at time `t`.
#[no_mangle]
pub unsafe extern "C" fn nmep_series_amplitude(
    gamma: f64,
    phi: f64,
    tau: f64,
    t: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> NmepStatus {
    guarded(|| {
        check_null!(out_re, out_im);
        match series_amplitude(gamma, phi, tau, t) {
            Ok(a) => {
                unsafe {
                    *out_re = a.re;
                    *out_im = a.im;
                }
                NmepStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Two-pole pseudomode solution from `x(0)` and `x'(0)`.
#[no_mangle]
pub unsafe extern "C" fn nmep_pseudomode_two_pole(
    s1_re: f64,
    s1_im: f64,
    s2_re: f64,
    s2_im: f64,
    a0_re: f64,
    a0_im: f64,
    slope0_re: f64,
    slope0_im: f64,
    t_max: f64,
    dt: f64,
    out: *mut *mut NmepTimeSeries,
) -> NmepStatus {
    guarded(|| {
        check_null!(out);
        match pseudomode_two_pole(
            Complex64::new(s1_re, s1_im),
            Complex64::new(s2_re, s2_im),
            Complex64::new(a0_re, a0_im),
            Complex64::new(slope0_re, slope0_im),
            t_max,
            dt,
        ) {
            Ok(ts) => emit_handle(out, NmepTimeSeries(ts)),
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn nmep_time_series_len(ts: *const NmepTimeSeries) -> usize {
    if ts.is_null() {
        return 0;
    }
    unsafe { &(*ts).0 }.len()
}

#[no_mangle]
pub unsafe extern "C" fn nmep_time_series_dt(ts: *const NmepTimeSeries) -> f64 {
    if ts.is_null() {
        return f64::NAN;
    }
    unsafe { &(*ts).0 }.dt()
}

#[no_mangle]
pub unsafe extern "C" fn nmep_time_series_sample(
    ts: *const NmepTimeSeries,
    index: usize,
    out_t: *mut f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> NmepStatus {
    guarded(|| {
        check_null!(ts, out_t, out_re, out_im);
        let series = unsafe { &(*ts).0 };
        if index >= series.len() {
            set_error("sample index out of range");
            return NmepStatus::InvalidInput;
        }
        let s = series.sample(index);
        unsafe {
            *out_t = series.time(index);
            *out_re = s.re;
            *out_im = s.im;
        }
        NmepStatus::Ok
    })
}

/// # Safety
/// `ts` must come from an `nmep_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nmep_time_series_free(ts: *mut NmepTimeSeries) {
    if !ts.is_null() {
        drop(unsafe { Box::from_raw(ts) });
    }
}

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

/// One pole row as plain data.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NmepPole {
    pub has_branch: i32,
    pub branch: i32,
    pub s_re: f64,
    pub s_im: f64,
    pub residue_re: f64,
    pub residue_im: f64,
    pub multiplicity: usize,
}

/// Closed-form pole set over Lambert branches `n_min..=n_max`
/// (single-delay systems only).
#[no_mangle]
pub unsafe extern "C" fn nmep_poles_closed_form(
    sys: *const NmepDelaySystem,
    n_min: i32,
    n_max: i32,
    out: *mut *mut NmepPoleSet,
) -> NmepStatus {
    guarded(|| {
        check_null!(sys, out);
        if n_min > n_max {
            set_error("branch window is empty");
            return NmepStatus::InvalidInput;
        }
        let system = unsafe { &(*sys).0 };
        let range: RangeInclusive<i32> = n_min..=n_max;
        match poles_closed_form(system, range) {
            Ok(set) => emit_handle(out, NmepPoleSet(set)),
            Err(e) => fail(e),
        }
    })
}

/// Newton pole search over a rectangle, certified by the argument principle.
#[no_mangle]
pub unsafe extern "C" fn nmep_poles_search(
    sys: *const NmepDelaySystem,
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    max_poles: usize,
    out: *mut *mut NmepPoleSet,
) -> NmepStatus {
    guarded(|| {
        check_null!(sys, out);
        let system = unsafe { &(*sys).0 };
        let result =
            Rect::new(re_min, re_max, im_min, im_max).and_then(|r| poles_search(system, r, max_poles));
        match result {
            Ok(set) => emit_handle(out, NmepPoleSet(set)),
            Err(e) => fail(e),
        }
    })
}

/// Zero count (with multiplicity) of the characteristic function inside a
/// rectangle.
#[no_mangle]
pub unsafe extern "C" fn nmep_argument_principle_count(
    sys: *const NmepDelaySystem,
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    out_count: *mut usize,
) -> NmepStatus {
    guarded(|| {
        check_null!(sys, out_count);
        let system = unsafe { &(*sys).0 };
        let result =
            Rect::new(re_min, re_max, im_min, im_max).and_then(|r| argument_principle_count(system, r));
        match result {
            Ok(n) => {
                unsafe { *out_count = n };
                NmepStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn nmep_pole_set_len(ps: *const NmepPoleSet) -> usize {
    if ps.is_null() {
        return 0;
    }
    unsafe { &(*ps).0 }.len()
}

#[no_mangle]
pub unsafe extern "C" fn nmep_pole_set_get(
    ps: *const NmepPoleSet,
    index: usize,
    out: *mut NmepPole,
) -> NmepStatus {
    guarded(|| {
        check_null!(ps, out);
        let set = unsafe { &(*ps).0 };
        if index >= set.len() {
            set_error("pole index out of range");
            return NmepStatus::InvalidInput;
        }
        let p = &set.poles()[index];
        unsafe {
            *out = NmepPole {
                has_branch: i32::from(p.branch.is_some()),
                branch: p.branch.unwrap_or(0),
                s_re: p.s.re,
                s_im: p.s.im,
                residue_re: p.residue_weight.re,
                residue_im: p.residue_weight.im,
                multiplicity: p.multiplicity,
            };
        }
        NmepStatus::Ok
    })
}

/// # Safety
/// `ps` must come from a pole-set constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nmep_pole_set_free(ps: *mut NmepPoleSet) {
    if !ps.is_null() {
        drop(unsafe { Box::from_raw(ps) });
    }
}

/// Residue-sum reconstruction at time `t` for unit initial amplitude.
#[no_mangle]
pub unsafe extern "C" fn nmep_residue_sum(
    sys: *const NmepDelaySystem,
    ps: *const NmepPoleSet,
    t: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> NmepStatus {
    guarded(|| {
        check_null!(sys, ps, out_re, out_im);
        let system = unsafe { &(*sys).0 };
        let set = unsafe { &(*ps).0 };
        match nmep::spectral::residue_sum(system, set, t) {
            Ok(a) => {
                unsafe {
                    *out_re = a.re;
                    *out_im = a.im;
                }
                NmepStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---------------------------------------------------------------------------
// Exceptional points
// ---------------------------------------------------------------------------

fn emit_ep(out: *mut *mut NmepEpReport, outcome: nmep::Result<EpOutcome>) -> NmepStatus {
    match outcome {
        Ok(EpOutcome::Found(report)) => emit_handle(out, NmepEpReport(report)),
        Ok(EpOutcome::NoEp(no)) => {
            set_error(&no.reason);
            unsafe { *out = std::ptr::null_mut() };
            NmepStatus::NoEp
        }
        Err(e) => {
            unsafe { *out = std::ptr::null_mut() };
            fail(e)
        }
    }
}

/// Second-order point of the two-point atom; `NoEp` off the superradiant
/// phase.
#[no_mangle]
pub unsafe extern "C" fn nmep_find_ep2(gamma: f64, phi: f64, out: *mut *mut NmepEpReport) -> NmepStatus {
    guarded(|| {
        check_null!(out);
        emit_ep(out, find_ep2_single_delay(gamma, phi))
    })
}

/// Third-order point of the three-point atom with g1, g2 prescribed.
#[no_mangle]
pub unsafe extern "C" fn nmep_find_ep3(
    g1: f64,
    g2: f64,
    phi: f64,
    out: *mut *mut NmepEpReport,
) -> NmepStatus {
    guarded(|| {
        check_null!(out);
        emit_ep(out, find_ep3_symmetric(g1, g2, phi))
    })
}

/// Order-n design at a prescribed rate and delay; `Infeasible` below the
/// delay bound.
#[no_mangle]
pub unsafe extern "C" fn nmep_design_ep(
    order: usize,
    s_ep: f64,
    tau: f64,
    phi: f64,
    out: *mut *mut NmepEpReport,
) -> NmepStatus {
    guarded(|| {
        check_null!(out);
        emit_ep(out, design_ep_n(order, s_ep, tau, phi))
    })
}

/// Residuals `|D|, |D'|, ...` at a candidate point, written into a
/// caller-allocated buffer of length `order`.
#[no_mangle]
pub unsafe extern "C" fn nmep_ep_residuals(
    sys: *const NmepDelaySystem,
    s_re: f64,
    s_im: f64,
    order: usize,
    out_residuals: *mut f64,
) -> NmepStatus {
    guarded(|| {
        check_null!(sys, out_residuals);
        let system = unsafe { &(*sys).0 };
        match ep_residuals(system, Complex64::new(s_re, s_im), order) {
            Ok(res) => {
                let out = unsafe { std::slice::from_raw_parts_mut(out_residuals, order) };
                out.copy_from_slice(&res);
                NmepStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn nmep_ep_report_order(report: *const NmepEpReport) -> usize {
    if report.is_null() {
        return 0;
    }
    unsafe { &(*report).0 }.order
}

#[no_mangle]
pub unsafe extern "C" fn nmep_ep_report_tau(report: *const NmepEpReport) -> f64 {
    if report.is_null() {
        return f64::NAN;
    }
    unsafe { &(*report).0 }.tau_ep
}

#[no_mangle]
pub unsafe extern "C" fn nmep_ep_report_s(
    report: *const NmepEpReport,
    out_re: *mut f64,
    out_im: *mut f64,
) -> NmepStatus {
    guarded(|| {
        check_null!(report, out_re, out_im);
        let r = unsafe { &(*report).0 };
        unsafe {
            *out_re = r.s_ep.re;
            *out_im = r.s_ep.im;
        }
        NmepStatus::Ok
    })
}

/// Named parameter lookup; `Domain` when the report has no such entry.
#[no_mangle]
pub unsafe extern "C" fn nmep_ep_report_parameter(
    report: *const NmepEpReport,
    name: *const c_char,
    out_value: *mut f64,
) -> NmepStatus {
    guarded(|| {
        check_null!(report, name, out_value);
        let r = unsafe { &(*report).0 };
        let key = match unsafe { std::ffi::CStr::from_ptr(name) }.to_str() {
            Ok(k) => k,
            Err(_) => {
                set_error("parameter name is not UTF-8");
                return NmepStatus::InvalidInput;
            }
        };
        match r.parameter(key) {
            Some(v) => {
                unsafe { *out_value = v };
                NmepStatus::Ok
            }
            None => {
                set_error("no such report parameter");
                NmepStatus::Domain
            }
        }
    })
}

/// Serialize a report to JSON; free with `nmep_string_free`.
#[no_mangle]
pub unsafe extern "C" fn nmep_ep_report_to_json(report: *const NmepEpReport) -> *mut c_char {
    if report.is_null() {
        return std::ptr::null_mut();
    }
    let r = unsafe { &(*report).0 };
    match serde_json::to_string_pretty(r) {
        Ok(json) => CString::new(json)
            .map(CString::into_raw)
            .unwrap_or(std::ptr::null_mut()),
        Err(_) => std::ptr::null_mut(),
    }
}

/// # Safety
/// `report` must come from an EP constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nmep_ep_report_free(report: *mut NmepEpReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Recover real couplings from quadratic delay-class weights; `g` is a
/// caller-allocated buffer of length `n`.
#[no_mangle]
pub unsafe extern "C" fn nmep_hankel_invert(k: *const f64, n: usize, out_g: *mut f64) -> NmepStatus {
    guarded(|| {
        check_null!(k, out_g);
        let weights = unsafe { std::slice::from_raw_parts(k, n) };
        match hankel_invert(weights) {
            Ok(g) => {
                let out = unsafe { std::slice::from_raw_parts_mut(out_g, n) };
                out.copy_from_slice(&g);
                NmepStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Critical dimensionless separation of the collectively emitting pair.
#[no_mangle]
pub unsafe extern "C" fn nmep_collective_critical_distance(beta: f64, out_eta: *mut f64) -> NmepStatus {
    guarded(|| {
        check_null!(out_eta);
        match collective_critical_distance(beta) {
            Ok(eta) => {
                unsafe { *out_eta = eta };
                NmepStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

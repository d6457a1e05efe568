//! C ABI over the `wavegauge` library.
//!
//! Reactions and wave profiles are opaque heap handles created by the
//! `wg_reaction_*` and `wg_wave_build` functions and released with the matching `_free`.
//! Every fallible call returns a [`WgStatus`]; the message for the most recent
//! failure on the calling thread is available from [`wg_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wavegauge::constants::analyze;
use wavegauge::wave::{build_profile, WaveMethod};
use wavegauge::{Error, GridSpec, ReactionSpec, WaveParams, WaveProfile};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Wave construction method.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgMethod {
    Auto = 0,
    ClosedForm = 1,
    Shooting = 2,
}

/// Opaque reaction term.
pub struct WgReaction {
    spec: ReactionSpec,
}

/// Opaque travelling wave on a truncated grid.
pub struct WgWave {
    wave: WaveProfile,
}

/// Stability constants of a wave.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WgConstants {
    pub c: f64,
    pub kappa: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub z: f64,
    pub z_half: f64,
    pub c_prop: f64,
    pub q1: f64,
    pub q2: f64,
    pub kappa_star: f64,
    pub big_c_star: f64,
    pub c_star: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn fail(e: Error) -> WgStatus {
    let st = if e.is_numerical() {
        WgStatus::Numerical
    } else {
        WgStatus::InvalidArgument
    };
    set_error(e.to_string());
    st
}

fn guard(f: impl FnOnce() -> WgStatus) -> WgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(st) => st,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            WgStatus::Panic
        }
    }
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            set_error(concat!("null pointer: ", stringify!($p)));
            return WgStatus::NullPointer;
        })+
    };
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn wg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Nagumo reaction `v(1-v)(v-a)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn wg_reaction_nagumo(a: f64, out: *mut *mut WgReaction) -> WgStatus {
    nonnull!(out);
    guard(|| match ReactionSpec::nagumo(a) {
        Ok(spec) => {
            *out = Box::into_raw(Box::new(WgReaction { spec }));
            WgStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Polynomial reaction from ascending coefficients `coeffs[0] + coeffs[1] v + ...`.
///
/// # Safety
/// `coeffs` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wg_reaction_polynomial(
    coeffs: *const f64,
    len: usize,
    out: *mut *mut WgReaction,
) -> WgStatus {
    nonnull!(coeffs, out);
    guard(|| {
        let c = std::slice::from_raw_parts(coeffs, len).to_vec();
        match ReactionSpec::polynomial(c) {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(WgReaction { spec }));
                WgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a reaction handle. NULL is ignored.
///
/// # Safety
/// `r` must come from a `wg_reaction_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wg_reaction_free(r: *mut WgReaction) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Evaluates `f(v)` and `f'(v)`. Either output may be NULL.
///
/// # Safety
/// `r` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn wg_reaction_eval(
    r: *const WgReaction,
    v: f64,
    f: *mut f64,
    df: *mut f64,
) -> WgStatus {
    nonnull!(r);
    let spec = &(*r).spec;
    if !f.is_null() {
        *f = spec.f(v);
    }
    if !df.is_null() {
        *df = spec.df(v);
    }
    WgStatus::Ok
}

/// Checks the bistable structural assumptions on `samples` points; writes 1 to
/// `passed` if all hold and 0 otherwise. The first failing check is reported
/// through [`wg_last_error`].
///
/// # Safety
/// `r` must be a live handle and `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn wg_reaction_validate(
    r: *const WgReaction,
    samples: usize,
    passed: *mut c_int,
) -> WgStatus {
    nonnull!(r, passed);
    guard(|| {
        let rep = (*r).spec.validate_assumptions(samples.max(16));
        *passed = rep.all_passed() as c_int;
        if let Some(c) = rep.failures().next() {
            set_error(format!("{}: {}", c.name, c.detail));
        }
        WgStatus::Ok
    })
}

/// Builds the wave of `v_t = nu v_xx + b f(v)` on `[-l_dom, l_dom]` with `n` nodes.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wg_wave_build(
    r: *const WgReaction,
    nu: f64,
    b: f64,
    l_dom: f64,
    n: usize,
    method: WgMethod,
    out: *mut *mut WgWave,
) -> WgStatus {
    nonnull!(r, out);
    guard(|| {
        let method = match method {
            WgMethod::Auto => WaveMethod::Auto,
            WgMethod::ClosedForm => WaveMethod::ClosedForm,
            WgMethod::Shooting => WaveMethod::Shooting,
        };
        let built = WaveParams::new(nu, b).and_then(|p| {
            let grid = GridSpec::new(l_dom, n)?;
            build_profile(&(*r).spec, p, grid, method, 1e-6)
        });
        match built {
            Ok(wave) => {
                *out = Box::into_raw(Box::new(WgWave { wave }));
                WgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a wave handle. NULL is ignored.
///
/// # Safety
/// `w` must come from [`wg_wave_build`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wg_wave_free(w: *mut WgWave) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Wave speed.
///
/// # Safety
/// `w` must be a live handle and `c` writable.
#[no_mangle]
pub unsafe extern "C" fn wg_wave_speed(w: *const WgWave, c: *mut f64) -> WgStatus {
    nonnull!(w, c);
    *c = (*w).wave.c;
    WgStatus::Ok
}

/// Number of grid nodes, or 0 for NULL.
///
/// # Safety
/// `w` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wg_wave_len(w: *const WgWave) -> usize {
    if w.is_null() {
        0
    } else {
        (*w).wave.x.len()
    }
}

/// Copies nodes, `v` and `v_x` into caller buffers of length `len`. Any of
/// the three buffers may be NULL.
///
/// # Safety
/// `w` must be a live handle; non-null buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wg_wave_copy_profile(
    w: *const WgWave,
    x: *mut f64,
    v: *mut f64,
    vx: *mut f64,
    len: usize,
) -> WgStatus {
    nonnull!(w);
    let wave = &(*w).wave;
    let n = wave.x.len();
    if len < n {
        set_error(format!("buffer holds {len} values, profile has {n}"));
        return WgStatus::BufferTooSmall;
    }
    for (dst, src) in [(x, &wave.x), (v, &wave.v), (vx, &wave.vx)] {
        if !dst.is_null() {
            ptr::copy_nonoverlapping(src.as_ptr(), dst, n);
        }
    }
    WgStatus::Ok
}

/// Computes the stability constants of the wave.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wg_wave_constants(w: *const WgWave, out: *mut WgConstants) -> WgStatus {
    nonnull!(w, out);
    guard(|| match analyze(&(*w).wave) {
        Ok(a) => {
            let k = a.constants;
            *out = WgConstants {
                c: k.c,
                kappa: k.kappa,
                gamma_minus: k.gamma_minus,
                gamma_plus: k.gamma_plus,
                z: k.z,
                z_half: k.z_half,
                c_prop: k.c_prop,
                q1: k.q1,
                q2: k.q2,
                kappa_star: k.kappa_star,
                big_c_star: k.big_c_star,
                c_star: k.c_star,
            };
            WgStatus::Ok
        }
        Err(e) => fail(e),
    })
}

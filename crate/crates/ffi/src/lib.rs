//! C ABI over the kglab core.
//!
//! Fields and propagator samples are opaque heap handles created by the
//! `*_new`-style functions and released with the matching `*_free`. Every
//! fallible call returns a [`KglabStatus`]; on failure the message is kept in
//! a thread-local slot readable through [`kglab_last_error_message`].
//! Outputs are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kglab::diagnostics::{cone_leakage, fit_exponential_tail, support_radius};
use kglab::evolution::{energy, evolve_local_fd, evolve_spectral, CauchyData, EvolutionConfig};
use kglab::posfreq::{evolve_positive, positivity_tail_witness};
use kglab::propagator::{
    multiplier_error, pauli_jordan, spacelike_suppression_scan, PropagatorSample,
    QuadratureSettings,
};
use kglab::spectral::make_bump;
use kglab::{Error, Field, Mass, UniformGrid};
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KglabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidGrid = 2,
    NonFinite = 3,
    GridMismatch = 4,
    UnderResolved = 5,
    Precondition = 6,
    InfraredSingular = 7,
    TimeBeyondMargin = 8,
    Unstable = 9,
    NonMultipleTime = 10,
    WeightOverflow = 11,
    NotConverged = 12,
    FitRejected = 13,
    ZeroNorm = 14,
    Config = 15,
    Io = 16,
    Format = 17,
    BufferTooSmall = 18,
    Panic = 19,
}

impl From<&Error> for KglabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidGrid(_) => KglabStatus::InvalidGrid,
            Error::NonFinite { .. } => KglabStatus::NonFinite,
            Error::GridMismatch(_) => KglabStatus::GridMismatch,
            Error::UnderResolved { .. } => KglabStatus::UnderResolved,
            Error::Precondition(_) => KglabStatus::Precondition,
            Error::InfraredSingular(_) => KglabStatus::InfraredSingular,
            Error::TimeBeyondMargin { .. } => KglabStatus::TimeBeyondMargin,
            Error::Unstable(_) => KglabStatus::Unstable,
            Error::NonMultipleTime { .. } => KglabStatus::NonMultipleTime,
            Error::WeightOverflow { .. } => KglabStatus::WeightOverflow,
            Error::NotConverged { .. } => KglabStatus::NotConverged,
            Error::FitRejected(_) => KglabStatus::FitRejected,
            Error::ZeroNorm => KglabStatus::ZeroNorm,
            Error::Config { .. } => KglabStatus::Config,
            Error::Io(_) => KglabStatus::Io,
            Error::Format(_) => KglabStatus::Format,
        }
    }
}

/// Opaque sampled complex field on a periodic grid.
pub struct KglabField(Field);

/// Opaque commutator-function slice `Delta(t, .)`.
pub struct KglabPropagator(PropagatorSample);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(KglabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(KglabStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(KglabStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and the
/// thread-local message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KglabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            KglabStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside kglab".into());
            KglabStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed(f: Field) -> *mut KglabField {
    Box::into_raw(Box::new(KglabField(f)))
}

fn mass(m: f64) -> Result<Mass, Failure> {
    Ok(Mass::new(m)?)
}

/// Message of the last failed call on this thread, or NULL after a success.
/// Valid until the next kglab call on the same thread.
#[no_mangle]
pub extern "C" fn kglab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kglab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a field from `n` samples with spacing `dx`. `im` may be NULL for a
/// real field.
///
/// # Safety
/// `re` must point to `n` doubles, as must `im` unless it is NULL.
#[no_mangle]
pub unsafe extern "C" fn kglab_field_new(
    n: usize,
    dx: f64,
    re: *const f64,
    im: *const f64,
    out: *mut *mut KglabField,
) -> KglabStatus {
    guard(|| {
        if re.is_null() {
            return Err(null("re"));
        }
        let grid = UniformGrid::new(n, dx)?;
        let re = std::slice::from_raw_parts(re, n);
        let values = if im.is_null() {
            re.iter().map(|&a| Complex64::new(a, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, n);
            re.iter()
                .zip(im)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect()
        };
        let f = Field::new(grid, values)?;
        write(out, boxed(f), "out")
    })
}

/// Samples `amplitude * exp(1 - 1/(1 - u^2))`, `u = (x - center)/radius`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kglab_field_bump(
    n: usize,
    dx: f64,
    center: f64,
    radius: f64,
    amplitude: f64,
    out: *mut *mut KglabField,
) -> KglabStatus {
    guard(|| {
        let grid = UniformGrid::new(n, dx)?;
        let f = make_bump(grid, center, radius, amplitude)?;
        write(out, boxed(f), "out")
    })
}

/// Releases a field. NULL is ignored.
///
/// # Safety
/// `field` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kglab_field_free(field: *mut KglabField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of grid points, or 0 for NULL.
///
/// # Safety
/// `field` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kglab_field_len(field: *const KglabField) -> usize {
    field.as_ref().map_or(0, |f| f.0.grid().n())
}

/// Grid spacing, or NaN for NULL.
///
/// # Safety
/// `field` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kglab_field_dx(field: *const KglabField) -> f64 {
    field.as_ref().map_or(f64::NAN, |f| f.0.grid().dx())
}

/// Copies the samples into caller buffers of length `len`. Either buffer may
/// be NULL to skip that component.
///
/// # Safety
/// Non-NULL buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn kglab_field_values(
    field: *const KglabField,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> KglabStatus {
    guard(|| {
        let f = borrow(field, "field")?;
        let v = f.0.values();
        if len < v.len() {
            return Err(Failure(
                KglabStatus::BufferTooSmall,
                format!("buffer of {len} for {} samples", v.len()),
            ));
        }
        for (j, z) in v.iter().enumerate() {
            if !re.is_null() {
                re.add(j).write(z.re);
            }
            if !im.is_null() {
                im.add(j).write(z.im);
            }
        }
        Ok(())
    })
}

unsafe fn cauchy(
    phi: *const KglabField,
    pi: *const KglabField,
    m: f64,
) -> Result<CauchyData, Failure> {
    let phi = borrow(phi, "phi")?.0.clone();
    let m = mass(m)?;
    match pi.as_ref() {
        None => Ok(CauchyData::at_rest(phi, m)),
        Some(p) => Ok(CauchyData::new(phi, p.0.clone(), m, 0.0)?),
    }
}

unsafe fn write_pair(
    data: CauchyData,
    out_phi: *mut *mut KglabField,
    out_pi: *mut *mut KglabField,
) -> Result<(), Failure> {
    if out_phi.is_null() {
        return Err(null("out_phi"));
    }
    let (phi, pi) = data.into_parts();
    out_phi.write(boxed(phi));
    if !out_pi.is_null() {
        out_pi.write(boxed(pi));
    }
    Ok(())
}

/// Exact spectral evolution of `(phi, pi)` from time 0 to `t`. `pi` NULL
/// means data at rest; `out_pi` NULL skips the time derivative.
///
/// # Safety
/// Handles must be live; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kglab_evolve_spectral(
    phi: *const KglabField,
    pi: *const KglabField,
    m: f64,
    t: f64,
    out_phi: *mut *mut KglabField,
    out_pi: *mut *mut KglabField,
) -> KglabStatus {
    guard(|| {
        let data = cauchy(phi, pi, m)?;
        write_pair(evolve_spectral(&data, t)?, out_phi, out_pi)
    })
}

/// Staggered three-point-stencil evolution with step `dt`; `t` must be a
/// multiple of `dt`.
///
/// # Safety
/// As [`kglab_evolve_spectral`].
#[no_mangle]
pub unsafe extern "C" fn kglab_evolve_local_fd(
    phi: *const KglabField,
    pi: *const KglabField,
    m: f64,
    t: f64,
    dt: f64,
    out_phi: *mut *mut KglabField,
    out_pi: *mut *mut KglabField,
) -> KglabStatus {
    guard(|| {
        let data = cauchy(phi, pi, m)?;
        write_pair(
            evolve_local_fd(&data, t, &EvolutionConfig::local_fd(dt))?,
            out_phi,
            out_pi,
        )
    })
}

/// Energy of `(phi, pi)`; `pi` NULL means at rest.
///
/// # Safety
/// Handles must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kglab_energy(
    phi: *const KglabField,
    pi: *const KglabField,
    m: f64,
    out: *mut f64,
) -> KglabStatus {
    guard(|| write(out, energy(&cauchy(phi, pi, m)?), "out"))
}

/// `exp(-i omega t) psi`, mode by mode.
///
/// # Safety
/// `psi` must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kglab_evolve_positive(
    psi: *const KglabField,
    m: f64,
    t: f64,
    out: *mut *mut KglabField,
) -> KglabStatus {
    guard(|| {
        let psi = borrow(psi, "psi")?;
        write(out, boxed(evolve_positive(&psi.0, mass(m)?, t)?), "out")
    })
}

/// `-i omega phi` for compactly supported `phi`.
///
/// # Safety
/// `phi` must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kglab_positivity_tail_witness(
    phi: *const KglabField,
    m: f64,
    out: *mut *mut KglabField,
) -> KglabStatus {
    guard(|| {
        let phi = borrow(phi, "phi")?;
        write(
            out,
            boxed(positivity_tail_witness(&phi.0, mass(m)?)?),
            "out",
        )
    })
}

/// Fraction of the L2 mass outside `|x| <= r0 + |t| + margin`.
///
/// # Safety
/// `field` must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kglab_cone_leakage(
    field: *const KglabField,
    r0: f64,
    t: f64,
    margin: f64,
    out: *mut f64,
) -> KglabStatus {
    guard(|| {
        let f = borrow(field, "field")?;
        write(out, cone_leakage(&f.0, r0, t, margin)?, "out")
    })
}

/// Smallest `R` with `|f| < threshold` beyond it; `saturated` is set to 1
/// when no such `R` below `L/2` exists.
///
/// # Safety
/// `field` must be live; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kglab_support_radius(
    field: *const KglabField,
    threshold: f64,
    radius: *mut f64,
    saturated: *mut i32,
) -> KglabStatus {
    guard(|| {
        let f = borrow(field, "field")?;
        if saturated.is_null() {
            return Err(null("saturated"));
        }
        let s = support_radius(&f.0, threshold);
        write(radius, s.radius, "radius")?;
        saturated.write(i32::from(s.saturated));
        Ok(())
    })
}

/// Log-linear fit of `|f|` over `lo <= |x| <= hi`.
///
/// # Safety
/// `field` must be live; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kglab_fit_tail(
    field: *const KglabField,
    lo: f64,
    hi: f64,
    rate: *mut f64,
    r2: *mut f64,
) -> KglabStatus {
    guard(|| {
        let f = borrow(field, "field")?;
        if r2.is_null() {
            return Err(null("r2"));
        }
        let fit = fit_exponential_tail(&f.0, [lo, hi])?;
        write(rate, fit.rate, "rate")?;
        r2.write(fit.r2);
        Ok(())
    })
}

/// `Delta(t, .)` on an `n`-point grid with spacing `dx`, using the default
/// quadrature settings.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kglab_propagator_new(
    t: f64,
    n: usize,
    dx: f64,
    m: f64,
    out: *mut *mut KglabPropagator,
) -> KglabStatus {
    guard(|| {
        let grid = UniformGrid::new(n, dx)?;
        let s = pauli_jordan(t, &grid, mass(m)?, &QuadratureSettings::default())?;
        write(out, Box::into_raw(Box::new(KglabPropagator(s))), "out")
    })
}

/// Releases a propagator. NULL is ignored.
///
/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kglab_propagator_free(p: *mut KglabPropagator) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Copy of the `Delta` slice as a new field handle.
///
/// # Safety
/// `p` must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kglab_propagator_delta(
    p: *const KglabPropagator,
    out: *mut *mut KglabField,
) -> KglabStatus {
    guard(|| {
        let p = borrow(p, "propagator")?;
        write(out, boxed(p.0.delta().clone()), "out")
    })
}

/// Quadrature residual and, for `m > 0`, the difference-identity error
/// (NaN when `m = 0`).
///
/// # Safety
/// `p` must be live; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kglab_propagator_errors(
    p: *const KglabPropagator,
    residual: *mut f64,
    identity_error: *mut f64,
    multiplier: *mut f64,
) -> KglabStatus {
    guard(|| {
        let p = borrow(p, "propagator")?;
        if identity_error.is_null() || multiplier.is_null() {
            return Err(null("output"));
        }
        write(residual, p.0.meta().residual, "residual")?;
        identity_error.write(p.0.identity_error().unwrap_or(f64::NAN));
        multiplier.write(multiplier_error(&p.0));
        Ok(())
    })
}

/// Ratio of `max |Delta|` beyond `|t| + margin` to `max |Delta|` inside the
/// cone; NaN at `t = 0`.
///
/// # Safety
/// `p` must be live; `ratio` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kglab_propagator_suppression(
    p: *const KglabPropagator,
    margin: f64,
    ratio: *mut f64,
) -> KglabStatus {
    guard(|| {
        let p = borrow(p, "propagator")?;
        let scan = spacelike_suppression_scan(&p.0, margin)?;
        write(ratio, scan.ratio.unwrap_or(f64::NAN), "ratio")
    })
}

//! C ABI over `meso-metrology`.
//!
//! Models and reservoir setups are opaque heap handles created by
//! `meso_*_new`/`meso_model_parse` and released with the matching `_free`.
//! Every fallible call returns a [`MesoStatus`]; on failure the message is
//! available from [`meso_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use meso_metrology::limits::{boxcar_closed_current, boxcar_closed_noise, boxcar_closed_precision};
use meso_metrology::sweep::{optimize_theta, Method, OptimizeOptions};
use meso_metrology::{
    transport, BiasConvention, CombWeighting, Error, QuadratureSpec, ReservoirSetup, TransmissionModel,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MesoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Domain = 4,
    Quadrature = 5,
    Degenerate = 6,
    Divergent = 7,
    EstimatorUndefined = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MesoConvention {
    RightHot = 0,
    LeftHot = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MesoWeighting {
    Uniform = 0,
    TrapezoidEndpoints = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MesoMethod {
    Exact = 0,
    LinearResponse = 1,
    ZeroTemperature = 2,
}

/// Opaque transmission model.
pub struct MesoModel(TransmissionModel);

/// Opaque pair of reservoirs.
pub struct MesoSetup(ReservoirSetup);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MesoQuadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub tail_multiplier: f64,
    pub max_subdivisions: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MesoTransport {
    pub current: f64,
    pub noise: f64,
    pub dcurrent_dtheta: f64,
    /// `+inf` when `divergent` is set.
    pub gamma: f64,
    pub quad_error: f64,
    pub divergent: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MesoOptimum {
    pub theta_star: f64,
    pub gamma_max: f64,
    pub n_evals: usize,
    pub refined: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> MesoStatus {
    match err {
        Error::Domain(_) | Error::DistributionalDerivative => MesoStatus::Domain,
        Error::Quadrature { .. } => MesoStatus::Quadrature,
        Error::Degenerate(_) => MesoStatus::Degenerate,
        Error::Divergent(_) => MesoStatus::Divergent,
        Error::EstimatorUndefined { .. } => MesoStatus::EstimatorUndefined,
        Error::Parse { .. } => MesoStatus::Parse,
    }
}

enum Failure {
    Status(MesoStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(MesoStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `body`, records any error or panic, and maps it to a status.
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> MesoStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MesoStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            MesoStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn quadrature(q: *const MesoQuadrature) -> QuadratureSpec {
    // SAFETY: a non-NULL `q` points to a valid MesoQuadrature (caller contract).
    match unsafe { q.as_ref() } {
        None => QuadratureSpec::default(),
        Some(q) => QuadratureSpec {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            tail_multiplier: q.tail_multiplier,
            max_subdivisions: q.max_subdivisions,
        },
    }
}

fn boxed_model(out: *mut *mut MesoModel, model: TransmissionModel) -> Result<(), Failure> {
    // SAFETY: checked for NULL inside `write`.
    unsafe { write(out, Box::into_raw(Box::new(MesoModel(model))), "out") }
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn meso_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn meso_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn meso_quadrature_default() -> MesoQuadrature {
    let d = QuadratureSpec::default();
    MesoQuadrature {
        rel_tol: d.rel_tol,
        abs_tol: d.abs_tol,
        tail_multiplier: d.tail_multiplier,
        max_subdivisions: d.max_subdivisions,
    }
}

/// Parses a model spec such as `lorentzian:gamma=0.1,theta=0`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn meso_model_parse(spec: *const c_char, out: *mut *mut MesoModel) -> MesoStatus {
    guard(|| {
        if spec.is_null() {
            return Err(null("spec"));
        }
        let text = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| Failure::Status(MesoStatus::InvalidArgument, "spec is not valid UTF-8".into()))?;
        boxed_model(out, text.parse()?)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn meso_model_lorentzian(gamma: f64, theta: f64, out: *mut *mut MesoModel) -> MesoStatus {
    guard(|| boxed_model(out, TransmissionModel::lorentzian(gamma, theta)?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn meso_model_comb(
    n_dots: usize,
    gamma: f64,
    half_width: f64,
    theta: f64,
    weighting: MesoWeighting,
    out: *mut *mut MesoModel,
) -> MesoStatus {
    let w = match weighting {
        MesoWeighting::Uniform => CombWeighting::Uniform,
        MesoWeighting::TrapezoidEndpoints => CombWeighting::TrapezoidEndpoints,
    };
    guard(|| boxed_model(out, TransmissionModel::comb(n_dots, gamma, half_width, theta, w)?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn meso_model_boxcar(half_width: f64, theta: f64, out: *mut *mut MesoModel) -> MesoStatus {
    guard(|| boxed_model(out, TransmissionModel::boxcar(half_width, theta)?))
}

/// # Safety
/// `model` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn meso_model_free(model: *mut MesoModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Moves the model to `theta` in place.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn meso_model_set_theta(model: *mut MesoModel, theta: f64) -> MesoStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        if !theta.is_finite() {
            return Err(Failure::Status(MesoStatus::InvalidArgument, "theta must be finite".into()));
        }
        m.0 = m.0.with_theta(theta);
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn meso_model_evaluate(model: *const MesoModel, energy: f64, out: *mut f64) -> MesoStatus {
    guard(|| write(out, deref(model, "model")?.0.evaluate(energy), "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn meso_setup_new(
    temperature: f64,
    fermi_energy: f64,
    bias: f64,
    convention: MesoConvention,
    out: *mut *mut MesoSetup,
) -> MesoStatus {
    let c = match convention {
        MesoConvention::RightHot => BiasConvention::RightHot,
        MesoConvention::LeftHot => BiasConvention::LeftHot,
    };
    guard(|| {
        let s = ReservoirSetup::new(temperature, fermi_energy, bias, c)?;
        write(out, Box::into_raw(Box::new(MesoSetup(s))), "out")
    })
}

/// # Safety
/// `setup` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn meso_setup_free(setup: *mut MesoSetup) {
    if !setup.is_null() {
        drop(Box::from_raw(setup));
    }
}

/// Fermi-Dirac occupation; a Heaviside step at `temperature = 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn meso_fermi(energy: f64, mu: f64, temperature: f64, out: *mut f64) -> MesoStatus {
    guard(|| write(out, meso_metrology::fermi::fermi(energy, mu, temperature)?, "out"))
}

/// Current, noise, sensitivity and precision rate. `quad` may be NULL for the
/// default tolerances.
///
/// # Safety
/// `model` and `setup` must be live handles; `quad` NULL or valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn meso_transport(
    model: *const MesoModel,
    setup: *const MesoSetup,
    quad: *const MesoQuadrature,
    out: *mut MesoTransport,
) -> MesoStatus {
    guard(|| {
        let r = transport(&deref(model, "model")?.0, &deref(setup, "setup")?.0, &quadrature(quad))?;
        let v = MesoTransport {
            current: r.current,
            noise: r.noise,
            dcurrent_dtheta: r.dcurrent_dtheta,
            gamma: r.gamma_or_inf(),
            quad_error: r.quad_error,
            divergent: r.divergent,
        };
        write(out, v, "out")
    })
}

/// Closed-form boxcar current, noise and precision rate at `k_B T > 0`.
/// Any of the output pointers may be NULL to skip that quantity.
///
/// # Safety
/// `setup` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn meso_boxcar_closed(
    setup: *const MesoSetup,
    half_width: f64,
    theta: f64,
    current: *mut f64,
    noise: *mut f64,
    gamma: *mut f64,
) -> MesoStatus {
    guard(|| {
        let s = &deref(setup, "setup")?.0;
        if !current.is_null() {
            current.write(boxcar_closed_current(s, half_width, theta)?);
        }
        if !noise.is_null() {
            noise.write(boxcar_closed_noise(s, half_width, theta)?);
        }
        if !gamma.is_null() {
            gamma.write(boxcar_closed_precision(s, half_width, theta)?);
        }
        Ok(())
    })
}

/// Maximises γ over θ. Pass NaN for both bounds to use the default search
/// interval and 0 for `grid_points` to use the default grid.
///
/// # Safety
/// `model` and `setup` must be live handles; `quad` NULL or valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn meso_optimize(
    model: *const MesoModel,
    setup: *const MesoSetup,
    quad: *const MesoQuadrature,
    method: MesoMethod,
    theta_min: f64,
    theta_max: f64,
    grid_points: usize,
    out: *mut MesoOptimum,
) -> MesoStatus {
    guard(|| {
        let d = OptimizeOptions::default();
        let interval = match (theta_min.is_nan(), theta_max.is_nan()) {
            (true, true) => None,
            (false, false) => Some((theta_min, theta_max)),
            _ => {
                return Err(Failure::Status(
                    MesoStatus::InvalidArgument,
                    "give both theta bounds or neither (NaN)".into(),
                ))
            }
        };
        let opts = OptimizeOptions {
            method: match method {
                MesoMethod::Exact => Method::Exact,
                MesoMethod::LinearResponse => Method::LinearResponse,
                MesoMethod::ZeroTemperature => Method::ZeroTemperature,
            },
            interval,
            grid_points: if grid_points == 0 { d.grid_points } else { grid_points },
            theta_tol: d.theta_tol,
        };
        let r = optimize_theta(&deref(model, "model")?.0, &deref(setup, "setup")?.0, &quadrature(quad), &opts)?;
        let v =
            MesoOptimum { theta_star: r.theta_star, gamma_max: r.gamma_max, n_evals: r.n_evals, refined: r.refined };
        write(out, v, "out")
    })
}

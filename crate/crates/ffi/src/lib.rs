//! C ABI over the tierwave engine.
//!
//! Objects are opaque heap handles created by `tw_*_new` / `tw_params_reference`
//! and released with the matching `tw_*_free`. Every fallible call returns a
//! [`TwStatus`] and writes its result through an out-pointer; on failure the
//! message is available from [`tw_last_error`] on the same thread.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tierwave::allocation::{self, AllocationResult};
use tierwave::config::{QosConfig, Scenario, SystemParams};
use tierwave::femtocell::{self, FemtoEnv};
use tierwave::macrocell::{self, MacroEnv};
use tierwave::scheduler::{self, PfSimConfig};
use tierwave::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    RequiresAlphaFour = 3,
    Degenerate = 4,
    Infeasible = 5,
    Numerical = 6,
    Config = 7,
    Io = 8,
    UnknownName = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwScenario {
    HighAttenuation = 0,
    LowAttenuation = 1,
}

/// Opaque system parameter set.
pub struct TwParams(SystemParams);

/// Opaque macrocell SIR model.
pub struct TwMacroEnv(MacroEnv);

/// Opaque femtocell tier model.
pub struct TwFemtoEnv(FemtoEnv);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwFalohaOptimum {
    pub rho_f: f64,
    pub throughput: f64,
    pub ase: f64,
    pub unimodal: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwAllocation {
    pub rho: f64,
    pub rho_f: f64,
    pub t_c: f64,
    pub t_f: f64,
    pub u_c: f64,
    pub u_f: f64,
    pub eta: f64,
    pub ase: f64,
    pub t_cu: f64,
    pub t_fu: f64,
    pub binding: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwRequiredSpectrum {
    pub total_hz: f64,
    pub femto_form_hz: f64,
    pub subchannels: f64,
    pub targets_consistent: bool,
    pub forms_agree: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwPfResult {
    pub throughput_pf: f64,
    pub throughput_rr: f64,
    pub stderr_pf: f64,
    pub stderr_rr: f64,
}

impl From<AllocationResult> for TwAllocation {
    fn from(a: AllocationResult) -> Self {
        Self {
            rho: a.rho,
            rho_f: a.rho_f,
            t_c: a.t_c,
            t_f: a.t_f,
            u_c: a.u_c,
            u_f: a.u_f,
            eta: a.eta,
            ase: a.ase,
            t_cu: a.t_cu,
            t_fu: a.t_fu,
            binding: a.binding,
        }
    }
}

impl From<TwAllocation> for AllocationResult {
    fn from(a: TwAllocation) -> Self {
        Self {
            rho: a.rho,
            rho_f: a.rho_f,
            t_c: a.t_c,
            t_f: a.t_f,
            u_c: a.u_c,
            u_f: a.u_f,
            eta: a.eta,
            ase: a.ase,
            t_cu: a.t_cu,
            t_fu: a.t_fu,
            binding: a.binding,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TwStatus {
    match e {
        Error::InvalidParameter { .. } | Error::EmptySum => TwStatus::InvalidParameter,
        Error::RequiresAlphaFour(..) => TwStatus::RequiresAlphaFour,
        Error::Degenerate(_) => TwStatus::Degenerate,
        Error::Infeasible(_) => TwStatus::Infeasible,
        Error::NoRoot(_) => TwStatus::Numerical,
        Error::Config(_) => TwStatus::Config,
        Error::Io(_) => TwStatus::Io,
    }
}

struct Fail(TwStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Fail>;

fn null(what: &str) -> Fail {
    Fail(TwStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, stores its value in `out` and maps errors and panics to a
/// status.
fn guard<T>(out: *mut T, f: impl FnOnce() -> Outcome<T>) -> TwStatus {
    if out.is_null() {
        set_error("out pointer is null".into());
        return TwStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            // SAFETY: checked non-null; the caller owns a writable `T`.
            unsafe { out.write(v) };
            TwStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TwStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Outcome<&'a T> {
    // SAFETY: the caller passes either null or a live handle from this library.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn tw_params_reference(scenario: TwScenario, out: *mut *mut TwParams) -> TwStatus {
    guard(out, || {
        let s = match scenario {
            TwScenario::HighAttenuation => Scenario::HighAttenuation,
            TwScenario::LowAttenuation => Scenario::LowAttenuation,
        };
        Ok(boxed(TwParams(SystemParams::reference(s))))
    })
}

/// # Safety
/// `params` must be null or a handle from `tw_params_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tw_params_clone(params: *const TwParams, out: *mut *mut TwParams) -> TwStatus {
    guard(out, || {
        let p = unsafe { get(params, "params") }?;
        Ok(boxed(TwParams(p.0.clone())))
    })
}

fn field<'a>(p: &'a mut SystemParams, name: &str) -> Option<&'a mut f64> {
    Some(match name {
        "R_c" => &mut p.macro_radius,
        "R_f" => &mut p.femto_radius,
        "U" => &mut p.total_users,
        "U_f" => &mut p.users_per_femto,
        "N_f" => &mut p.femtos_per_cell,
        "W" => &mut p.subchannel_bandwidth,
        "alpha_c" => &mut p.alpha_c,
        "alpha_f" => &mut p.alpha_f,
        "beta_f" => &mut p.beta_f,
        "P_f_dB" => &mut p.penetration_loss_db,
        "sigma_c_dB" => &mut p.sigma_c_db,
        "sigma_fi_dB" => &mut p.sigma_fi_db,
        "sigma_fo_dB" => &mut p.sigma_fo_db,
        "mu_c_dB" => &mut p.mu_c_db,
        "mu_fi_dB" => &mut p.mu_fi_db,
        "mu_fo_dB" => &mut p.mu_fo_db,
        "G_dB" => &mut p.shannon_gap_db,
        _ => return None,
    })
}

fn set_param(p: &mut SystemParams, name: &str, value: f64) -> Outcome<()> {
    if let Some(slot) = field(p, name) {
        *slot = value;
    } else if name == "F" || name == "L" {
        if !(value >= 1.0 && value.fract() == 0.0 && value < u32::MAX as f64) {
            return Err(Fail(TwStatus::InvalidParameter, format!("{name} must be a positive integer, got {value}")));
        }
        let n = value as usize;
        if name == "F" {
            p.subchannels = n;
        } else {
            p.levels = n;
        }
    } else {
        return Err(Fail(TwStatus::UnknownName, format!("unknown parameter `{name}`")));
    }
    Ok(p.validate()?)
}

/// Sets one parameter by its table name (`R_c`, `N_f`, `P_f_dB`, ...). The
/// handle is left unchanged if the result fails validation.
///
/// # Safety
/// `params` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tw_params_set(params: *mut TwParams, name: *const c_char, value: f64) -> TwStatus {
    let mut unit = ();
    guard(&mut unit, || {
        let p = unsafe { params.as_mut() }.ok_or_else(|| null("params"))?;
        if name.is_null() {
            return Err(null("name"));
        }
        let name = unsafe { CStr::from_ptr(name) }
            .to_str()
            .map_err(|_| Fail(TwStatus::InvalidParameter, "name is not UTF-8".into()))?;
        let mut next = p.0.clone();
        set_param(&mut next, name, value)?;
        p.0 = next;
        Ok(())
    })
}

/// Reads one parameter by its table name.
///
/// # Safety
/// `params` must be a live handle, `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tw_params_get(params: *const TwParams, name: *const c_char, out: *mut f64) -> TwStatus {
    guard(out, || {
        let p = unsafe { get(params, "params") }?;
        if name.is_null() {
            return Err(null("name"));
        }
        let name = unsafe { CStr::from_ptr(name) }
            .to_str()
            .map_err(|_| Fail(TwStatus::InvalidParameter, "name is not UTF-8".into()))?;
        let mut q = p.0.clone();
        match name {
            "F" => Ok(q.subchannels as f64),
            "L" => Ok(q.levels as f64),
            "U_c" => Ok(q.macro_users()),
            "area" => Ok(q.cell_area()),
            _ => field(&mut q, name)
                .map(|v| *v)
                .ok_or_else(|| Fail(TwStatus::UnknownName, format!("unknown parameter `{name}`"))),
        }
    })
}

/// # Safety
/// `params` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tw_params_free(params: *mut TwParams) {
    if !params.is_null() {
        drop(unsafe { Box::from_raw(params) });
    }
}

/// `C(a, b)`.
#[no_mangle]
pub extern "C" fn tw_c_function(a: f64, b: f64, out: *mut f64) -> TwStatus {
    guard(out, || Ok(macrocell::c_function(a, b)?))
}

/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tw_macro_env_new(params: *const TwParams, annuli: usize, out: *mut *mut TwMacroEnv) -> TwStatus {
    guard(out, || {
        let p = unsafe { get(params, "params") }?;
        Ok(boxed(TwMacroEnv(macrocell::build_macro_env(&p.0, annuli)?)))
    })
}

/// Cell-averaged SIR CDF at linear threshold `gamma`.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tw_macro_sir_cdf(env: *const TwMacroEnv, gamma: f64, out: *mut f64) -> TwStatus {
    guard(out, || Ok(unsafe { get(env, "env") }?.0.cell_avg_sir_cdf(gamma)?))
}

/// Round-robin subchannel throughput `T_c`, b/s/Hz.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tw_macro_throughput_rr(env: *const TwMacroEnv, out: *mut f64) -> TwStatus {
    guard(out, || Ok(unsafe { get(env, "env") }?.0.throughput_rr()))
}

/// # Safety
/// `env` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tw_macro_env_free(env: *mut TwMacroEnv) {
    if !env.is_null() {
        drop(unsafe { Box::from_raw(env) });
    }
}

/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tw_femto_env_new(params: *const TwParams, rho_f: f64, out: *mut *mut TwFemtoEnv) -> TwStatus {
    guard(out, || {
        let p = unsafe { get(params, "params") }?;
        Ok(boxed(TwFemtoEnv(FemtoEnv::new(&p.0, rho_f)?)))
    })
}

/// Femtocell subchannel throughput `T_f`, b/s/Hz.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tw_femto_throughput(env: *const TwFemtoEnv, out: *mut f64) -> TwStatus {
    guard(out, || Ok(unsafe { get(env, "env") }?.0.femto_throughput()))
}

/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tw_femto_sir_cdf(env: *const TwFemtoEnv, gamma: f64, out: *mut f64) -> TwStatus {
    guard(out, || Ok(unsafe { get(env, "env") }?.0.femto_sir_cdf_lb(gamma)?))
}

/// Lower bound on the interference tail `Pr(I > y)`.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tw_femto_tail_lb(env: *const TwFemtoEnv, y: f64, out: *mut f64) -> TwStatus {
    guard(out, || Ok(unsafe { get(env, "env") }?.0.interference_tail_lb(y)?))
}

/// Exact interference tail; fails with `RequiresAlphaFour` unless `alpha_f = 4`.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tw_femto_tail_exact(env: *const TwFemtoEnv, y: f64, out: *mut f64) -> TwStatus {
    guard(out, || Ok(unsafe { get(env, "env") }?.0.interference_tail_exact4(y)?))
}

/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tw_femto_optimize(env: *const TwFemtoEnv, out: *mut TwFalohaOptimum) -> TwStatus {
    guard(out, || {
        let o = femtocell::optimize_faloha(&unsafe { get(env, "env") }?.0)?;
        Ok(TwFalohaOptimum {
            rho_f: o.rho_f,
            throughput: o.throughput,
            ase: o.ase,
            unimodal: o.unimodal,
        })
    })
}

/// # Safety
/// `env` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tw_femto_env_free(env: *mut TwFemtoEnv) {
    if !env.is_null() {
        drop(unsafe { Box::from_raw(env) });
    }
}

/// Optimal spectrum split for macrocell throughput `t_c` and QoS `eta`, with
/// the femtocell tier at its best access fraction.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tw_plan(params: *const TwParams, t_c: f64, eta: f64, out: *mut TwAllocation) -> TwStatus {
    guard(out, || {
        let p = unsafe { get(params, "params") }?;
        Ok(allocation::plan(&p.0, t_c, QosConfig::new(eta)?)?.into())
    })
}

/// # Safety
/// `alloc` must point to a valid `TwAllocation`.
#[no_mangle]
pub unsafe extern "C" fn tw_required_spectrum(
    alloc: *const TwAllocation,
    d_c: f64,
    d_f: f64,
    bandwidth: f64,
    out: *mut TwRequiredSpectrum,
) -> TwStatus {
    guard(out, || {
        let a = unsafe { get(alloc, "alloc") }?;
        let r = allocation::required_spectrum(&(*a).into(), d_c, d_f, bandwidth)?;
        Ok(TwRequiredSpectrum {
            total_hz: r.total_hz,
            femto_form_hz: r.femto_form_hz,
            subchannels: r.subchannels,
            targets_consistent: r.targets_consistent,
            forms_agree: r.forms_agree,
        })
    })
}

/// Proportional-fair and round-robin throughput over `drops` user drops of
/// `trials` scheduling intervals each.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tw_simulate_pf(
    params: *const TwParams,
    users: usize,
    drops: usize,
    trials: usize,
    seed: u64,
    out: *mut TwPfResult,
) -> TwStatus {
    guard(out, || {
        let p = unsafe { get(params, "params") }?;
        let cfg = PfSimConfig {
            users,
            drops,
            trials_per_drop: trials,
            seed,
            bandwidth: p.0.subchannel_bandwidth,
            ..PfSimConfig::default()
        };
        let r = scheduler::simulate_pf(&p.0, cfg)?;
        Ok(TwPfResult {
            throughput_pf: r.throughput_pf,
            throughput_rr: r.throughput_rr,
            stderr_pf: r.stderr_pf,
            stderr_rr: r.stderr_rr,
        })
    })
}

use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use tierwave_ffi::*;

fn last_error() -> String {
    let p = tw_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn params(s: TwScenario) -> *mut TwParams {
    let mut p = ptr::null_mut();
    assert_eq!(tw_params_reference(s, &mut p), TwStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn c_function_and_errors() {
    let mut v = 0.0;
    assert_eq!(tw_c_function(0.0, 1.0, &mut v), TwStatus::Ok);
    assert!(v > 0.0 && v < 1.0);
    assert_eq!(tw_c_function(0.0, -1.0, &mut v), TwStatus::InvalidParameter);
    assert!(last_error().contains('b'));
    assert_eq!(tw_c_function(0.0, 1.0, ptr::null_mut()), TwStatus::NullPointer);
}

#[test]
fn params_get_and_set() {
    let p = params(TwScenario::LowAttenuation);
    let name = |s: &str| CString::new(s).unwrap();
    let mut v = 0.0;
    unsafe {
        assert_eq!(tw_params_get(p, name("alpha_f").as_ptr(), &mut v), TwStatus::Ok);
        assert_eq!(v, 3.5);
        assert_eq!(tw_params_set(p, name("N_f").as_ptr(), 100.0), TwStatus::Ok);
        assert_eq!(tw_params_get(p, name("U_c").as_ptr(), &mut v), TwStatus::Ok);
        assert_eq!(v, 100.0);
        assert_eq!(tw_params_set(p, name("L").as_ptr(), 2.5), TwStatus::InvalidParameter);
        assert_eq!(tw_params_set(p, name("nope").as_ptr(), 1.0), TwStatus::UnknownName);
        assert!(last_error().contains("nope"));
        // Rejected values leave the handle untouched.
        assert_ne!(tw_params_set(p, name("R_c").as_ptr(), -1.0), TwStatus::Ok);
        assert_eq!(tw_params_get(p, name("R_c").as_ptr(), &mut v), TwStatus::Ok);
        assert_eq!(v, 288.0);
        assert_eq!(tw_params_set(ptr::null_mut(), name("R_c").as_ptr(), 1.0), TwStatus::NullPointer);
        tw_params_free(p);
        tw_params_free(ptr::null_mut());
    }
}

#[test]
fn macro_and_femto_handles() {
    let p = params(TwScenario::HighAttenuation);
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(tw_macro_env_new(p, 24, &mut m), TwStatus::Ok);
        let (mut tc, mut cdf) = (0.0, 0.0);
        assert_eq!(tw_macro_throughput_rr(m, &mut tc), TwStatus::Ok);
        assert!(tc > 1.0 && tc < 2.5, "{tc}");
        assert_eq!(tw_macro_sir_cdf(m, 1.0, &mut cdf), TwStatus::Ok);
        assert!(cdf > 0.0 && cdf < 1.0);
        tw_macro_env_free(m);

        let mut f = ptr::null_mut();
        assert_eq!(tw_femto_env_new(p, 1.0, &mut f), TwStatus::Ok);
        let (mut lb, mut exact) = (0.0, 0.0);
        assert_eq!(tw_femto_tail_lb(f, 1e-9, &mut lb), TwStatus::Ok);
        assert_eq!(tw_femto_tail_exact(f, 1e-9, &mut exact), TwStatus::Ok);
        assert!(lb <= exact);
        let mut o = TwFalohaOptimum::default();
        assert_eq!(tw_femto_optimize(f, &mut o), TwStatus::Ok);
        assert!(o.rho_f > 0.0 && o.rho_f <= 1.0);
        tw_femto_env_free(f);
        tw_params_free(p);
    }

    let la = params(TwScenario::LowAttenuation);
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(tw_femto_env_new(la, 1.0, &mut f), TwStatus::Ok);
        let mut v = 0.0;
        assert_eq!(tw_femto_tail_exact(f, 1e-9, &mut v), TwStatus::RequiresAlphaFour);
        assert_eq!(tw_femto_env_new(la, 1.5, &mut f), TwStatus::InvalidParameter);
        tw_femto_env_free(f);
        tw_params_free(la);
    }
}

#[test]
fn plan_and_spectrum() {
    let p = params(TwScenario::HighAttenuation);
    unsafe {
        let mut a = TwAllocation::default();
        assert_eq!(tw_plan(p, 1.5738, 0.01, &mut a), TwStatus::Ok);
        assert!(a.rho > 0.0 && a.rho < 1.0);
        assert!(a.t_cu.min(a.t_fu) >= a.eta * (a.t_cu + a.t_fu) - 1e-9);
        let mut r = TwRequiredSpectrum::default();
        assert_eq!(tw_required_spectrum(&a, 1e5, 9.9e6, 15e3, &mut r), TwStatus::Ok);
        assert!((r.total_hz - 200.0 * 1e5 / (a.rho * a.t_c)).abs() < 1e-6 * r.total_hz);
        assert!(r.targets_consistent);
        assert_eq!(tw_plan(p, 1.0, 0.7, &mut a), TwStatus::InvalidParameter);
        let mut pf = TwPfResult::default();
        assert_eq!(tw_simulate_pf(p, 8, 4, 500, 1, &mut pf), TwStatus::Ok);
        assert!(pf.throughput_pf >= pf.throughput_rr * 0.9);
        assert_eq!(tw_simulate_pf(p, 0, 4, 500, 1, &mut pf), TwStatus::InvalidParameter);
        tw_params_free(p);
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(tw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/tierwave.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["tw_params_reference", "tw_plan", "tw_last_error", "TW_STATUS_OK", "typedef struct TwParams TwParams"] {
        assert!(text.contains(sym), "{sym}");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-xc", "-std=c99"]).arg(&header).output() else {
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

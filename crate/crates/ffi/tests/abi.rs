use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use meso_metrology::sweep::{optimize_theta, OptimizeOptions};
use meso_metrology::{transport, QuadratureSpec, ReservoirSetup, TransmissionModel};
use meso_metrology_ffi::*;

fn last_error() -> String {
    let p = meso_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn model(spec: &str) -> *mut MesoModel {
    let c = CString::new(spec).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { meso_model_parse(c.as_ptr(), &mut m) }, MesoStatus::Ok);
    m
}

fn setup(t: f64, v: f64) -> *mut MesoSetup {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { meso_setup_new(t, 0.0, v, MesoConvention::RightHot, &mut s) }, MesoStatus::Ok);
    s
}

#[test]
fn transport_matches_the_library() {
    let m = model("comb:nd=5,gamma=0.05,delta=0.6,theta=0.2");
    let s = setup(0.2, 1.0);
    let mut out = MesoTransport::default();
    assert_eq!(unsafe { meso_transport(m, s, ptr::null(), &mut out) }, MesoStatus::Ok);
    let direct = transport(
        &"comb:nd=5,gamma=0.05,delta=0.6,theta=0.2".parse::<TransmissionModel>().unwrap(),
        &ReservoirSetup::simple(0.2, 1.0).unwrap(),
        &QuadratureSpec::default(),
    )
    .unwrap();
    assert_eq!(out.current, direct.current);
    assert_eq!(out.noise, direct.noise);
    assert_eq!(out.gamma, direct.gamma_or_inf());
    assert!(meso_last_error_message().is_null());
    unsafe {
        meso_model_free(m);
        meso_setup_free(s);
    }
}

#[test]
fn parse_error_sets_status_and_message() {
    let c = CString::new("lorentzian:gama=0.1").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { meso_model_parse(c.as_ptr(), &mut m) }, MesoStatus::Parse);
    assert!(m.is_null());
    assert!(last_error().contains("gama"));
}

#[test]
fn null_handles_are_rejected() {
    let mut out = MesoTransport::default();
    assert_eq!(unsafe { meso_transport(ptr::null(), ptr::null(), ptr::null(), &mut out) }, MesoStatus::NullPointer);
    assert!(last_error().contains("model"));
    let mut v = 0.0;
    assert_eq!(unsafe { meso_fermi(0.0, 0.0, 1.0, ptr::null_mut()) }, MesoStatus::NullPointer);
    assert_eq!(unsafe { meso_fermi(0.0, 0.0, 1.0, &mut v) }, MesoStatus::Ok);
    assert_eq!(v, 0.5);
    unsafe {
        meso_model_free(ptr::null_mut());
        meso_setup_free(ptr::null_mut());
    }
}

#[test]
fn domain_errors_map_to_domain() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { meso_model_lorentzian(-1.0, 0.0, &mut m) }, MesoStatus::Domain);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { meso_setup_new(-0.1, 0.0, 1.0, MesoConvention::LeftHot, &mut s) }, MesoStatus::Domain);
    let cold = setup(0.0, 1.0);
    let mut i = 0.0;
    let st = unsafe { meso_boxcar_closed(cold, 0.5, 0.3, &mut i, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(st, MesoStatus::Domain);
    unsafe { meso_setup_free(cold) };
}

#[test]
fn boxcar_closed_form_agrees_with_transport() {
    let s = setup(0.3, 0.7);
    let (mut i, mut n, mut g) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { meso_boxcar_closed(s, 0.4, 0.2, &mut i, &mut n, &mut g) }, MesoStatus::Ok);
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { meso_model_boxcar(0.4, 0.2, &mut m) }, MesoStatus::Ok);
    let q = MesoQuadrature { rel_tol: 1e-12, abs_tol: 1e-300, ..meso_quadrature_default() };
    let mut t = MesoTransport::default();
    assert_eq!(unsafe { meso_transport(m, s, &q, &mut t) }, MesoStatus::Ok);
    assert!((i / t.current - 1.0).abs() < 1e-9);
    assert!((n / t.noise - 1.0).abs() < 1e-9);
    assert!((g / t.gamma - 1.0).abs() < 1e-9);
    unsafe {
        meso_model_free(m);
        meso_setup_free(s);
    }
}

#[test]
fn optimize_and_set_theta() {
    let m = model("lorentzian:gamma=0.2,theta=0");
    let s = setup(0.1, 1.0);
    let mut opt = MesoOptimum::default();
    let st = unsafe { meso_optimize(m, s, ptr::null(), MesoMethod::Exact, f64::NAN, f64::NAN, 0, &mut opt) };
    assert_eq!(st, MesoStatus::Ok);
    let direct = optimize_theta(
        &TransmissionModel::lorentzian(0.2, 0.0).unwrap(),
        &ReservoirSetup::simple(0.1, 1.0).unwrap(),
        &QuadratureSpec::default(),
        &OptimizeOptions::default(),
    )
    .unwrap();
    assert_eq!(opt.theta_star, direct.theta_star);
    assert_eq!(opt.gamma_max, direct.gamma_max);

    let st = unsafe { meso_optimize(m, s, ptr::null(), MesoMethod::Exact, 0.0, f64::NAN, 0, &mut opt) };
    assert_eq!(st, MesoStatus::InvalidArgument);

    assert_eq!(unsafe { meso_model_set_theta(m, opt.theta_star) }, MesoStatus::Ok);
    let mut t = MesoTransport::default();
    assert_eq!(unsafe { meso_transport(m, s, ptr::null(), &mut t) }, MesoStatus::Ok);
    assert!((t.gamma / opt.gamma_max - 1.0).abs() < 1e-12);
    let mut v = 0.0;
    assert_eq!(unsafe { meso_model_evaluate(m, opt.theta_star, &mut v) }, MesoStatus::Ok);
    assert!((v - 1.0).abs() < 1e-15);
    unsafe {
        meso_model_free(m);
        meso_setup_free(s);
    }
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(meso_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/<test> -> target/<profile>
    let dir = std::env::current_exe().ok()?.parent()?.parent()?.to_path_buf();
    let lib = dir.join("libmeso_metrology_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_against_the_header() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not built; skipping C link test");
        return;
    };
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = tempfile::tempdir().unwrap();
    let bin = exe.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(root.join("include"))
        .arg(root.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status();
    let Ok(status) = status else {
        eprintln!("no C compiler ({cc}); skipping C link test");
        return;
    };
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fields: Vec<f64> =
        String::from_utf8(out.stdout).unwrap().split_whitespace().map(|s| s.parse().unwrap()).collect();
    let r = transport(
        &TransmissionModel::lorentzian(0.1, 1.1).unwrap(),
        &ReservoirSetup::simple(0.1, 1.0).unwrap(),
        &QuadratureSpec::default(),
    )
    .unwrap();
    assert!((fields[0] / r.current - 1.0).abs() < 1e-11);
    assert!((fields[2] / r.gamma_or_inf() - 1.0).abs() < 1e-11);
    assert!(fields[3] >= fields[2]);
}

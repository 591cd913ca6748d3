use std::ffi::{CStr, CString};
use std::ptr;

use qframe_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qf_last_error()) }.to_str().unwrap().to_owned()
}

const TLS: &str = r#"
name = "abi"
kappa = 7.2e-3
frame = "q_frame"
n_max = 4
[device]
kind = "tls"
omega_q = 0.75
g = 0.03
[drive]
amplitude = 1e-2
omega_d = 1.0
[integrator]
t_end = 40.0
sample_dt = 10.0
"#;

fn scenario(text: &str) -> *mut QfScenario {
    let mut s = ptr::null_mut();
    let st = unsafe { qf_scenario_from_toml(c(text).as_ptr(), &mut s) };
    assert_eq!(st, QfStatus::Ok, "{}", last_error());
    s
}

#[test]
fn null_arguments_are_rejected() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { qf_scenario_from_toml(ptr::null(), &mut s) }, QfStatus::NullPointer);
    assert!(last_error().contains("toml"));
    assert_eq!(unsafe { qf_scenario_from_toml(c(TLS).as_ptr(), ptr::null_mut()) }, QfStatus::NullPointer);
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { qf_simulate(ptr::null(), &mut t) }, QfStatus::NullPointer);
    assert_eq!(unsafe { qf_trajectory_is_complete(ptr::null()) }, -1);
    unsafe {
        qf_scenario_free(ptr::null_mut());
        qf_trajectory_free(ptr::null_mut());
    }
}

#[test]
fn config_errors_carry_field_names() {
    let mut s = ptr::null_mut();
    let bad = TLS.replace("kappa = 7.2e-3", "kappa = 0.0");
    assert_eq!(unsafe { qf_scenario_from_toml(c(&bad).as_ptr(), &mut s) }, QfStatus::Config);
    assert!(last_error().contains("kappa"), "{}", last_error());
    assert!(s.is_null());

    let s = scenario(TLS);
    let st = unsafe { qf_scenario_set(s, c("n_max").as_ptr(), c("0").as_ptr()) };
    assert_eq!(st, QfStatus::Config);
    assert!(last_error().contains("n_max"));
    let bytes = [0xffu8, 0];
    let st = unsafe { qf_scenario_set(s, bytes.as_ptr().cast(), c("1").as_ptr()) };
    assert_eq!(st, QfStatus::InvalidUtf8);
    unsafe { qf_scenario_free(s) };
}

#[test]
fn toml_buffer_protocol() {
    let s = scenario(TLS);
    let mut needed = 0usize;
    assert_eq!(unsafe { qf_scenario_to_toml(s, ptr::null_mut(), 0, &mut needed) }, QfStatus::Ok);
    let mut small = vec![0 as std::ffi::c_char; needed - 1];
    assert_eq!(
        unsafe { qf_scenario_to_toml(s, small.as_mut_ptr(), small.len(), ptr::null_mut()) },
        QfStatus::BufferTooSmall
    );
    let mut buf = vec![0 as std::ffi::c_char; needed];
    assert_eq!(unsafe { qf_scenario_to_toml(s, buf.as_mut_ptr(), buf.len(), ptr::null_mut()) }, QfStatus::Ok);
    let text = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_owned();
    let s2 = scenario(&text);
    unsafe {
        qf_scenario_free(s);
        qf_scenario_free(s2);
    }
}

#[test]
fn simulate_and_read_samples() {
    let s = scenario(TLS);
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { qf_simulate(s, &mut t) }, QfStatus::Ok, "{}", last_error());
    assert!(last_error().is_empty());
    let mut n = 0;
    assert_eq!(unsafe { qf_trajectory_len(t, &mut n) }, QfStatus::Ok);
    assert_eq!(n, 5);
    let mut x = QfSample::default();
    assert_eq!(unsafe { qf_trajectory_sample(t, 4, &mut x) }, QfStatus::Ok);
    assert!((x.t - 40.0).abs() < 1e-12);
    assert!((x.kappa_t - 40.0 * 7.2e-3).abs() < 1e-12);
    assert!(x.photon_number > 0.0 && x.abs_c_u < 1e-6);
    assert!(x.transmon_occupation.is_nan());
    assert_eq!(unsafe { qf_trajectory_sample(t, 5, &mut x) }, QfStatus::OutOfRange);
    assert_eq!(unsafe { qf_trajectory_is_complete(t) }, 1);
    unsafe {
        qf_trajectory_free(t);
        qf_scenario_free(s);
    }
}

#[test]
fn aborted_integration_keeps_partial_trajectory() {
    let text = format!("{TLS}rtol = 1e-14\nh_init = 0.5\nh_min = 0.5\n");
    let s = scenario(&text);
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { qf_simulate(s, &mut t) }, QfStatus::IntegratorAbort);
    assert!(!t.is_null());
    assert_eq!(unsafe { qf_trajectory_is_complete(t) }, 0);
    let mut n = 0;
    unsafe { qf_trajectory_len(t, &mut n) };
    assert!(n >= 1);
    unsafe {
        qf_trajectory_free(t);
        qf_scenario_free(s);
    }
}

#[test]
fn preset_and_dispersive_values() {
    let mut s = ptr::null_mut();
    let st = unsafe { qf_scenario_from_preset(c("fig2").as_ptr(), c("q_n5").as_ptr(), &mut s) };
    assert_eq!(st, QfStatus::Ok, "{}", last_error());
    let st = unsafe { qf_scenario_set(s, c("spectrum.n_max").as_ptr(), c("30").as_ptr()) };
    assert_eq!(st, QfStatus::Ok, "{}", last_error());
    let mut d = QfDispersive::default();
    assert_eq!(unsafe { qf_dispersive(s, &mut d) }, QfStatus::Ok, "{}", last_error());
    // (ω_q − ω_c)²/4g² with ω_q = 0.75, g = 0.03
    assert!((d.n_crit - 0.0625 / 0.0036).abs() < 1e-9);
    assert!((d.e_ge - 0.75).abs() < 1e-12);
    assert!(d.e_ef.is_nan());
    unsafe { qf_scenario_free(s) };

    let mut s = ptr::null_mut();
    let st = unsafe { qf_scenario_from_preset(c("fig2").as_ptr(), c("nope").as_ptr(), &mut s) };
    assert_eq!(st, QfStatus::Config);
    assert!(last_error().contains("nope"));
}

#[test]
fn run_to_dir_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(TLS);
    let path = c(dir.path().to_str().unwrap());
    assert_eq!(unsafe { qf_run_to_dir(s, path.as_ptr()) }, QfStatus::Ok, "{}", last_error());
    for f in ["trajectory.csv", "spectrum.csv", "config.toml", "record.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    unsafe { qf_scenario_free(s) };
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(qf_version()) }.to_str().unwrap();
    assert!(v.starts_with("qframe-ffi "));
}

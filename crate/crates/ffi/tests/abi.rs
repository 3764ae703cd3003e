use std::ffi::{c_char, CStr};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use bfrate_ffi::*;

fn channel(gains: &[f64], probs: &[f64]) -> *mut BfrateChannel {
    let mut ch = ptr::null_mut();
    let status = unsafe { bfrate_channel_new(gains.as_ptr(), probs.as_ptr(), gains.len(), 1.0, 1, &mut ch) };
    assert_eq!(status, BfrateStatus::Ok);
    ch
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let len = unsafe { bfrate_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(len > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn two_state_round_trip() {
    let ch = channel(&[1.0, 2.0], &[0.5, 0.5]);
    let mut lambda = 0.0;
    let mut powers = [0.0; 2];
    unsafe {
        assert_eq!(
            bfrate_waterfill(ch, 1.0, &mut lambda, powers.as_mut_ptr(), 2),
            BfrateStatus::Ok
        );
        assert_eq!(bfrate_last_error_message(ptr::null_mut(), 0), 0);
    }
    assert!((lambda - 1.625).abs() < 1e-12);
    assert!((powers[0] - 0.625).abs() < 1e-12);

    let mut d = BfrateDispersion::default();
    assert_eq!(unsafe { bfrate_dispersion(ch, 1.0, &mut d) }, BfrateStatus::Ok);
    assert!((d.v_bf - 0.5461487564381302).abs() < 1e-12);
    assert!((d.v_bf_prime - 0.4528566261368348).abs() < 1e-12);

    let mut b = BfrateBounds::default();
    assert_eq!(
        unsafe { bfrate_bounds(ch, 1.0, 10_000, 0.01, 0.01, &mut b) },
        BfrateStatus::Ok
    );
    assert!((b.log_m_lb_lt - 5630.459416637913).abs() < 1e-8);
    assert!((b.log_m_ub_lt - 5776.703850102501).abs() < 1e-8);
    unsafe { bfrate_channel_free(ch) };
}

#[test]
fn errors_map_to_codes() {
    let ch = channel(&[1.0, 2.0], &[0.5, 0.5]);
    let mut out = 0.0;
    let mut b = BfrateBounds::default();
    unsafe {
        assert_eq!(bfrate_bounds(ch, 1.0, 100, 0.6, 0.01, &mut b), BfrateStatus::Domain);
        assert_eq!(b, BfrateBounds::default());
        assert!(last_error().contains("epsilon"));
        assert_eq!(
            bfrate_waterfill(ch, -1.0, &mut out, ptr::null_mut(), 0),
            BfrateStatus::InvalidArgument
        );
        assert_eq!(
            bfrate_waterfill(ch, 1.0, &mut out, [0.0; 3].as_mut_ptr(), 3),
            BfrateStatus::InvalidArgument
        );
        assert_eq!(
            bfrate_waterfill(ptr::null(), 1.0, &mut out, ptr::null_mut(), 0),
            BfrateStatus::NullPointer
        );
        assert_eq!(bfrate_normal_inv_cdf(1.5, &mut out), BfrateStatus::Domain);
        assert_eq!(bfrate_normal_cdf(0.0, ptr::null_mut()), BfrateStatus::NullPointer);

        let cfg = BfrateSimConfig {
            budget: 1.0,
            blocks: 2,
            alpha: 0.1,
            trials: 100,
            seed: 1,
        };
        let mut v = BfrateViolation::default();
        assert_eq!(
            bfrate_simulate_controller(ch, &cfg, &mut v),
            BfrateStatus::BudgetBackoff
        );

        let mut bad = ptr::null_mut();
        assert_eq!(
            bfrate_channel_new([1.0, 1.0].as_ptr(), [0.5, 0.5].as_ptr(), 2, 1.0, 1, &mut bad),
            BfrateStatus::InvalidArgument
        );
        assert!(bad.is_null());
        assert_eq!(
            bfrate_channel_preset(c"nope".as_ptr(), &mut bad),
            BfrateStatus::InvalidArgument
        );
        bfrate_channel_free(ptr::null_mut());
        bfrate_channel_free(ch);
    }
}

#[test]
fn presets_normal_functions_and_simulation() {
    let mut ch = ptr::null_mut();
    unsafe {
        assert_eq!(
            bfrate_channel_preset(c"paper-rayleigh".as_ptr(), &mut ch),
            BfrateStatus::Ok
        );
        assert_eq!(bfrate_channel_num_states(ch), 10);
        bfrate_channel_free(ch);
        assert_eq!(bfrate_channel_preset(c"two-state".as_ptr(), &mut ch), BfrateStatus::Ok);

        let mut x = 0.0;
        assert_eq!(bfrate_normal_inv_cdf(0.01, &mut x), BfrateStatus::Ok);
        assert!((x + 2.326_347_874_040_841).abs() < 1e-12);
        assert_eq!(bfrate_normal_cdf(x, &mut x), BfrateStatus::Ok);
        assert!((x - 0.01).abs() < 1e-15);

        let cfg = BfrateSimConfig {
            budget: 1.0,
            blocks: 300,
            alpha: 0.1,
            trials: 500,
            seed: 9,
        };
        let (mut v1, mut v2) = (BfrateViolation::default(), BfrateViolation::default());
        assert_eq!(bfrate_simulate_controller(ch, &cfg, &mut v1), BfrateStatus::Ok);
        assert_eq!(bfrate_simulate_controller(ch, &cfg, &mut v2), BfrateStatus::Ok);
        assert_eq!(v1, v2);
        let mut d = BfrateDensity::default();
        assert_eq!(bfrate_simulate_density(ch, &cfg, &mut d), BfrateStatus::Ok);
        assert!((d.analytic_mean - 0.5893274981708231).abs() < 1e-12);
        assert!(d.ks_distance > 0.0 && d.ks_distance < 0.2);
        bfrate_channel_free(ch);

        let version = CStr::from_ptr(bfrate_version()).to_str().unwrap();
        assert_eq!(version, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/bfrate.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

/// Compiles and runs a C program against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("skipped: no C compiler");
        return;
    };
    // Test binaries live in <target>/<profile>/deps.
    let profile_dir: PathBuf = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libbfrate_ffi.a");
    if !lib.exists() {
        eprintln!("skipped: {} not built", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let status = Command::new(cc)
        .arg(format!("{manifest}/tests/c/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

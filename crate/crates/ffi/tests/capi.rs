use std::ffi::{c_char, CStr, CString};
use std::ptr;

use hamsys_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(hamsys_last_error()) }.to_string_lossy().into_owned()
}

fn example(id: &str) -> *mut HamsysProblem {
    let mut p = ptr::null_mut();
    let id = cstr(id);
    assert_eq!(unsafe { hamsys_problem_from_example(id.as_ptr(), &mut p) }, HamsysStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(hamsys_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn parse_errors_are_reported() {
    let mut p = ptr::null_mut();
    let bad = cstr("{\"n\": 2, \"J\": [");
    assert_eq!(unsafe { hamsys_problem_from_json(bad.as_ptr(), &mut p) }, HamsysStatus::Parse);
    assert!(p.is_null());
    assert!(last_error().contains("parse error"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { hamsys_problem_from_json(ptr::null(), &mut p) }, HamsysStatus::NullPointer);
    let mut n = 0usize;
    assert_eq!(unsafe { hamsys_problem_dimension(ptr::null(), &mut n) }, HamsysStatus::NullPointer);
    let id = cstr("ex3.1");
    assert_eq!(unsafe { hamsys_problem_from_example(id.as_ptr(), ptr::null_mut()) }, HamsysStatus::NullPointer);
}

#[test]
fn unknown_example_is_reported() {
    let mut p = ptr::null_mut();
    let id = cstr("no-such-example");
    assert_eq!(unsafe { hamsys_problem_from_example(id.as_ptr(), &mut p) }, HamsysStatus::UnknownId);
    assert!(last_error().contains("no-such-example"));
}

#[test]
fn rank_and_definiteness_of_the_rotating_projector() {
    let p = example("mark-s1.11-1");
    let (mut rank, mut definite) = (0usize, true);
    assert_eq!(unsafe { hamsys_rank(p, &mut rank, &mut definite) }, HamsysStatus::Ok);
    assert_eq!((rank, definite), (1, false));
    let (mut acceptable, mut passed) = (false, false);
    assert_eq!(unsafe { hamsys_validate(p, &mut acceptable, &mut passed) }, HamsysStatus::Ok);
    assert!(acceptable && passed);
    unsafe { hamsys_problem_free(p) };
}

#[test]
fn unequal_indices_through_the_c_abi() {
    let p = example("ex3.1");
    let (mut np, mut nm, mut dp, mut dm) = (0usize, 0usize, 0i64, 0i64);
    assert_eq!(unsafe { hamsys_deficiency(p, &mut np, &mut nm, &mut dp, &mut dm) }, HamsysStatus::Ok);
    assert_eq!((np, nm, dp, dm), (1, 2, 1, 2));
    unsafe { hamsys_problem_free(p) };
}

#[test]
fn fundamental_matrix_is_identity_at_the_base_point_and_checks_the_buffer() {
    let p = example("kac-krein");
    let mut n = 0usize;
    assert_eq!(unsafe { hamsys_problem_dimension(p, &mut n) }, HamsysStatus::Ok);
    assert_eq!(n, 2);
    let mut y = vec![f64::NAN; 2 * n * n];
    assert_eq!(unsafe { hamsys_fundamental_matrix(p, 0.0, 1.0, 0.0, y.as_mut_ptr(), y.len()) }, HamsysStatus::Ok);
    assert_eq!(y, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    assert_eq!(unsafe { hamsys_fundamental_matrix(p, 0.0, 1.0, 1.0, y.as_mut_ptr(), 3) }, HamsysStatus::BufferTooSmall);
    // H = I, J = [[0,1],[-1,0]] at λ = 0: Y is constant
    assert_eq!(unsafe { hamsys_fundamental_matrix(p, 0.0, 0.0, 2.5, y.as_mut_ptr(), y.len()) }, HamsysStatus::Ok);
    assert!((y[0] - 1.0).abs() < 1e-9 && y[2].abs() < 1e-9);
    unsafe { hamsys_problem_free(p) };
}

#[test]
fn criterion_json_round_trip() {
    let p = example("kac-krein");
    let id = cstr("canonical-maximal");
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { hamsys_criterion_evaluate(p, id.as_ptr(), &mut out) }, HamsysStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { hamsys_string_free(out) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["id"], "canonical-maximal");
    assert_eq!(v["status"], "fails");

    let sl = cstr("sl-scalar");
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { hamsys_criterion_evaluate(p, sl.as_ptr(), &mut out) }, HamsysStatus::Precondition);
    assert!(out.is_null());
    unsafe { hamsys_problem_free(p) };
}

#[test]
fn criteria_registry_is_exposed() {
    let n = hamsys_criteria_count();
    assert!(n >= 18);
    let ids: Vec<String> = (0..n)
        .map(|i| unsafe { CStr::from_ptr(hamsys_criterion_id(i)) }.to_str().unwrap().to_owned())
        .collect();
    assert!(ids.iter().any(|s| s == "sl-scalar"));
    assert!(hamsys_criterion_id(n).is_null());
}

#[test]
fn analysis_report_and_example_run() {
    let p = example("canonical-decay");
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { hamsys_analyze(p, &mut out) }, HamsysStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    unsafe { hamsys_string_free(out) };
    assert_eq!(v["status"], "ok");
    assert_eq!(v["deficiency"]["half_line"]["n_tilde_plus"], 2);
    unsafe { hamsys_problem_free(p) };

    let id = cstr("r3.1-4");
    let mut passed = false;
    assert_eq!(unsafe { hamsys_example_run(id.as_ptr(), &mut passed) }, HamsysStatus::Ok);
    assert!(passed);
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/hamsys.h")).unwrap();
    for f in [
        "hamsys_version",
        "hamsys_last_error",
        "hamsys_string_free",
        "hamsys_problem_from_json",
        "hamsys_problem_from_example",
        "hamsys_problem_free",
        "hamsys_problem_dimension",
        "hamsys_validate",
        "hamsys_rank",
        "hamsys_deficiency",
        "hamsys_fundamental_matrix",
        "hamsys_analyze",
        "hamsys_criterion_evaluate",
        "hamsys_criteria_count",
        "hamsys_criterion_id",
        "hamsys_example_run",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from the header");
    }
    assert!(header.contains("typedef struct HamsysProblem HamsysProblem;"));
}

/// Compile and run the C smoke program against the static library when a C
/// compiler is available.
#[test]
fn c_program_links_against_the_static_library() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if std::process::Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler ({cc}); skipped");
        return;
    }
    // target/<profile>/deps/<test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libhamsys_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipped", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let status = std::process::Command::new(&cc)
        .arg(format!("{manifest}/tests/c/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "C smoke program failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains(": ok"));
}

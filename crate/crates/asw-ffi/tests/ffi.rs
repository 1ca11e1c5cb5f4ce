use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use asw_ffi::*;

fn genus_two_json() -> CString {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../asw/data/genus_two.json");
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

unsafe fn take_string(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    asw_string_free(s);
    out
}

unsafe fn load_genus_two(hw: Option<&str>) -> (AswStatus, *mut AswCurve) {
    let json = genus_two_json();
    let hw = hw.map(|h| CString::new(h).unwrap());
    let mut curve = ptr::null_mut();
    let status = asw_curve_load(json.as_ptr(), hw.as_ref().map_or(ptr::null(), |h| h.as_ptr()), 7, &mut curve);
    (status, curve)
}

#[test]
fn h1_and_tower_through_the_c_interface() {
    unsafe {
        let (status, curve) = load_genus_two(None);
        assert_eq!(status, AswStatus::Ok);
        assert_eq!(asw_curve_genus(curve), 2);

        let mut h1 = ptr::null_mut();
        assert_eq!(asw_h1_compute(curve, 2, &mut h1), AswStatus::Ok);
        assert_eq!(asw_h1_rank(h1), 1);
        assert_eq!(asw_h1_level(h1), 2);

        let mut json = ptr::null_mut();
        assert_eq!(asw_h1_to_json(h1, true, &mut json), AswStatus::Ok);
        let report: asw::io::CoverReport = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(report.rank, 1);
        assert_eq!(report.seed, 7);
        assert_eq!(report.tower.unwrap()[1].universal_integer, "-t_0^7 + t_0^5");

        asw_h1_free(h1);
        asw_curve_free(curve);
    }
}

#[test]
fn trivial_sheaf_through_the_c_interface() {
    unsafe {
        let (_, curve) = load_genus_two(None);
        let mut json = ptr::null_mut();
        assert_eq!(asw_trivial_sheaf_cohomology(curve, 1, &mut json), AswStatus::Ok);
        let report: asw::io::CohomologyReport = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(report.h1, vec!["3"]);
        asw_curve_free(curve);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let (status, curve) = load_genus_two(Some("1,1;0,0"));
        assert_eq!(status, AswStatus::Ok);
        let mut h1 = ptr::null_mut();
        assert_eq!(asw_h1_compute(curve, 1, &mut h1), AswStatus::Inconsistent);
        assert!(h1.is_null());
        let msg = take_string(asw_last_error());
        assert!(msg.contains("Hasse-Witt"), "{msg}");
        assert_eq!(asw_h1_compute(curve, 0, &mut h1), AswStatus::Parse);
        asw_curve_free(curve);

        let bad = CString::new("{ not json").unwrap();
        let mut c = ptr::null_mut();
        assert_eq!(asw_curve_load(bad.as_ptr(), ptr::null(), 0, &mut c), AswStatus::Parse);
        assert_eq!(asw_curve_load(ptr::null(), ptr::null(), 0, &mut c), AswStatus::NullPointer);
        assert_eq!(asw_h1_compute(ptr::null(), 1, &mut h1), AswStatus::NullPointer);
    }
}

#[test]
fn null_handles_are_tolerated() {
    unsafe {
        asw_curve_free(ptr::null_mut());
        asw_h1_free(ptr::null_mut());
        asw_string_free(ptr::null_mut());
        assert_eq!(asw_h1_rank(ptr::null()), 0);
        assert_eq!(asw_curve_genus(ptr::null()), 0);
        assert!(!CStr::from_ptr(asw_version()).to_bytes().is_empty());
    }
}

#[test]
fn header_is_valid_c() {
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = include.join("asw.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["asw_curve_load", "asw_h1_compute", "asw_h1_to_json", "asw_string_free", "asw_last_error"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"asw.h\"\nint main(void) { AswCurve *c = 0; return (int)asw_curve_genus(c) + ASW_STATUS_OK; }\n",
    )
    .unwrap();
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

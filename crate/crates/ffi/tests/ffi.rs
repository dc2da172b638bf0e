use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use welch_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(welch_last_error()) }.to_string_lossy().into_owned()
}

fn take_string(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { welch_string_free(s) };
    out
}

/// Three unit vectors at 120° in the plane, interleaved (re, im).
fn mercedes_benz() -> Vec<f64> {
    let h = 3f64.sqrt() / 2.0;
    vec![1.0, 0.0, 0.0, 0.0, -0.5, 0.0, h, 0.0, -0.5, 0.0, -h, 0.0]
}

fn mb_handle() -> *mut WelchPair {
    let v = mercedes_benz();
    let mut pair = ptr::null_mut();
    let st = unsafe { welch_pair_hilbert(3, 2, WELCH_FIELD_REAL, v.as_ptr(), &mut pair) };
    assert_eq!(st, WelchStatus::Ok, "{}", last_error());
    pair
}

#[test]
fn gram_and_frame_operator_buffers() {
    let pair = mb_handle();
    unsafe {
        assert_eq!((welch_pair_count(pair), welch_pair_dim(pair)), (3, 2));
        let mut g = vec![0.0; 18];
        assert_eq!(welch_pair_gram(pair, g.as_mut_ptr(), g.len()), WelchStatus::Ok);
        assert!((g[0] - 1.0).abs() < 1e-15);
        assert!((g[2] + 0.5).abs() < 1e-15);
        let mut small = vec![0.0; 4];
        assert_eq!(welch_pair_gram(pair, small.as_mut_ptr(), small.len()), WelchStatus::BufferTooSmall);
        assert!(last_error().contains("need 18"));
        let mut s = vec![0.0; 8];
        assert_eq!(welch_pair_frame_operator(pair, s.as_mut_ptr(), s.len()), WelchStatus::Ok);
        // tight frame: S = (3/2) I
        assert!((s[0] - 1.5).abs() < 1e-14 && s[2].abs() < 1e-14 && (s[6] - 1.5).abs() < 1e-14);
        let mut corr = 0.0;
        assert_eq!(welch_frame_correlation(pair, &mut corr), WelchStatus::Ok);
        assert!((corr - 0.5).abs() < 1e-15);
        welch_pair_free(pair);
    }
}

#[test]
fn json_round_trip_and_report() {
    let pair = mb_handle();
    unsafe {
        let mut text = ptr::null_mut();
        assert_eq!(welch_pair_to_json(pair, &mut text), WelchStatus::Ok);
        let json = take_string(text);
        let c = CString::new(json.clone()).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(welch_pair_from_json(c.as_ptr(), &mut back), WelchStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(welch_pair_to_json(back, &mut again), WelchStatus::Ok);
        assert_eq!(take_string(again), json);

        let orders = [1usize, 2];
        let ps = [4.0];
        let mut rep = ptr::null_mut();
        let st = welch_report_json(back, orders.as_ptr(), orders.len(), ps.as_ptr(), ps.len(), &mut rep);
        assert_eq!(st, WelchStatus::Ok, "{}", last_error());
        let rep = take_string(rep);
        assert!(rep.contains("\"welch_max_single_m1\""));
        assert!(rep.contains("\"p_sum_p4\""));
        welch_pair_free(back);
        welch_pair_free(pair);
    }
}

#[test]
fn continuous_report_from_json() {
    let doc = r#"{"measure": {"atoms": ["a", "b", "c"], "weights": [0.5, 0.5, 0.5]},
        "pair": {"field": "real", "dim": 2, "p": 2,
                 "vectors": [[1, 0], [-0.5, 0.8660254037844386], [-0.5, -0.8660254037844386]],
                 "functionals": [[1, 0], [-0.5, 0.8660254037844386], [-0.5, -0.8660254037844386]]}}"#;
    let c = CString::new(doc).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { welch_continuous_report_json(c.as_ptr(), ptr::null(), 0, ptr::null(), 0, &mut out) };
    assert_eq!(st, WelchStatus::Ok, "{}", last_error());
    assert!(take_string(out).contains("cont_welch_max_single_m1"));
}

#[test]
fn scalar_helpers() {
    unsafe {
        let mut x = 0.0;
        assert_eq!(welch_rhs_value(4, 2, 1, &mut x), WelchStatus::Ok);
        assert!((x - 1.0 / 3.0).abs() < 1e-15);
        let mut d = 0usize;
        assert_eq!(welch_sym_dim(3, 2, &mut d), WelchStatus::Ok);
        assert_eq!(d, 6);
        assert_eq!(welch_sym_dim(0, 2, &mut d), WelchStatus::InvalidArgument);
        assert_eq!(welch_rhs_value(1, 2, 1, &mut x), WelchStatus::InvalidArgument);
    }
}

#[test]
fn seeded_search_through_the_abi() {
    unsafe {
        let mut pair = ptr::null_mut();
        let (mut obj, mut conv) = (0.0, false);
        let st = welch_search(WELCH_SEARCH_ETF, 2, 0, 2.0, WELCH_FIELD_COMPLEX, 3, 8, 0, &mut pair, &mut obj, &mut conv);
        assert_eq!(st, WelchStatus::Ok, "{}", last_error());
        assert!(conv && obj < 1e-12);
        assert_eq!(welch_pair_count(pair), 4);
        let mut corr = 0.0;
        welch_frame_correlation(pair, &mut corr);
        assert!((corr - 1.0 / 3f64.sqrt()).abs() < 1e-6);
        welch_pair_free(pair);

        let st = welch_search(9, 2, 3, 2.0, WELCH_FIELD_REAL, 0, 1, 1, &mut pair, &mut obj, &mut conv);
        assert_eq!(st, WelchStatus::InvalidArgument);
    }
}

#[test]
fn errors_carry_messages() {
    unsafe {
        let mut pair = ptr::null_mut();
        let bad = CString::new("{not json").unwrap();
        assert_eq!(welch_pair_from_json(bad.as_ptr(), &mut pair), WelchStatus::Parse);
        assert!(!last_error().is_empty());
        assert!(pair.is_null());
        assert_eq!(welch_pair_from_json(ptr::null(), &mut pair), WelchStatus::NullPointer);
        let v = [1.0, 0.5];
        assert_eq!(
            welch_pair_hilbert(1, 1, WELCH_FIELD_REAL, v.as_ptr(), &mut pair),
            WelchStatus::InvalidArgument,
            "real field rejects imaginary parts"
        );
        assert_eq!(welch_pair_hilbert(1, 1, 7, v.as_ptr(), &mut pair), WelchStatus::InvalidArgument);
        let v = [1.0, 0.0];
        assert_eq!(welch_pair_new(1, 1, 0.5, WELCH_FIELD_REAL, v.as_ptr(), v.as_ptr(), &mut pair), WelchStatus::InvalidArgument);
        assert_eq!(welch_pair_new(1, 1, f64::INFINITY, WELCH_FIELD_REAL, v.as_ptr(), v.as_ptr(), &mut pair), WelchStatus::Ok);
        assert_eq!(last_error(), "");
        welch_pair_free(pair);
        welch_pair_free(ptr::null_mut());
        welch_string_free(ptr::null_mut());
        assert_eq!(welch_pair_count(ptr::null()), 0);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/welch.h")).unwrap();
    for name in [
        "welch_last_error", "welch_pair_from_json", "welch_pair_new", "welch_pair_hilbert", "welch_pair_free",
        "welch_pair_count", "welch_pair_dim", "welch_pair_gram", "welch_pair_frame_operator", "welch_pair_to_json",
        "welch_string_free", "welch_report_json", "welch_continuous_report_json", "welch_frame_correlation",
        "welch_rhs_value", "welch_sym_dim", "welch_search", "typedef struct WelchPair WelchPair",
        "WELCH_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

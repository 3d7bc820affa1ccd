use std::ffi::{CStr, CString};
use std::ptr;

use lefschetz_ffi::*;

fn entry(id: &str) -> *mut LfFactorization {
    let id = CString::new(id).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { lf_catalog_entry(id.as_ptr(), &mut h) }, LfStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(lf_last_error()) }.to_str().unwrap().to_string()
}

fn take_string(s: *mut std::ffi::c_char) -> String {
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { lf_string_free(s) };
    text
}

#[test]
fn w_through_the_abi() {
    let h = entry("W");
    let mut len = 0;
    let mut pass = false;
    let mut sigma = 0;
    unsafe {
        assert_eq!(lf_length(h, &mut len), LfStatus::Ok);
        assert_eq!(lf_verify(h, &mut pass), LfStatus::Ok);
        assert_eq!(lf_signature(h, &mut sigma), LfStatus::Ok);
    }
    assert_eq!((len, pass, sigma), (12, true, -4));

    let (mut rank, mut count) = (0, 0);
    assert_eq!(unsafe { lf_h1(h, &mut rank, ptr::null_mut(), 0, &mut count) }, LfStatus::Ok);
    assert_eq!((rank, count), (4, 0));

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { lf_invariants_json(h, &mut json) }, LfStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(v["e_fib"], 4);
    unsafe { lf_free(h) };
}

#[test]
fn torsion_buffer_protocol() {
    let h = entry("W1(2,3)");
    let (mut rank, mut count) = (0, 0);
    let status = unsafe { lf_h1(h, &mut rank, ptr::null_mut(), 0, &mut count) };
    assert_eq!(status, LfStatus::BufferTooSmall);
    assert_eq!(count, 1);
    let mut buf = vec![0i64; count];
    let status = unsafe { lf_h1(h, &mut rank, buf.as_mut_ptr(), buf.len(), &mut count) };
    assert_eq!(status, LfStatus::Ok);
    assert_eq!((rank, buf), (0, vec![6]));
    unsafe { lf_free(h) };
}

#[test]
fn parse_serialize_round_trip() {
    let h = entry("K1");
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { lf_serialize(h, &mut text) }, LfStatus::Ok);
    let text = CString::new(take_string(text)).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { lf_parse(text.as_ptr(), &mut g) }, LfStatus::Ok);
    let (mut a, mut b) = (0, 0);
    unsafe {
        lf_length(h, &mut a);
        lf_length(g, &mut b);
        lf_free(h);
        lf_free(g);
    }
    assert_eq!(a, b);
}

#[test]
fn errors_carry_codes_and_messages() {
    let src = CString::new("surface g=1 b=0\nword: X\n").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { lf_parse(src.as_ptr(), &mut h) }, LfStatus::Parse);
    assert!(h.is_null());
    assert!(last_error().contains("unknown curve `X`"), "{}", last_error());

    let id = CString::new("nope").unwrap();
    assert_eq!(unsafe { lf_catalog_entry(id.as_ptr(), &mut h) }, LfStatus::UnknownEntry);
    assert_eq!(unsafe { lf_parse(ptr::null(), &mut h) }, LfStatus::NullPointer);
    let mut len = 0;
    assert_eq!(unsafe { lf_length(ptr::null(), &mut len) }, LfStatus::NullPointer);

    let bad = [0xffu8, 0];
    assert_eq!(unsafe { lf_parse(bad.as_ptr().cast(), &mut h) }, LfStatus::InvalidUtf8);

    let g = entry("W");
    assert_eq!(last_error(), "");
    unsafe {
        lf_free(g);
        lf_free(ptr::null_mut());
        lf_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{dir}/include/lefschetz.h")).unwrap();
    let src = std::fs::read_to_string(format!("{dir}/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 10);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct LfFactorization LfFactorization;"));
}

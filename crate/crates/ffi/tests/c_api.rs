use std::ffi::{c_char, CString};
use std::ptr;

use cat0lab_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn read(f: impl Fn(*mut c_char, usize, *mut usize) -> Cat0Status) -> String {
    let mut needed = 0;
    assert_eq!(f(ptr::null_mut(), 0, &mut needed), Cat0Status::BufferTooSmall);
    let mut buf = vec![0u8; needed];
    assert_eq!(f(buf.as_mut_ptr().cast(), buf.len(), &mut needed), Cat0Status::Ok);
    buf.pop();
    String::from_utf8(buf).unwrap()
}

#[test]
fn drift_run_through_handles() {
    let json = c(r#"{"group": {"kind": "lattice", "rank": 1}, "params": {"n_max": 4}}"#);
    let mut config = ptr::null_mut();
    let mut record = ptr::null_mut();
    unsafe {
        assert_eq!(cat0_config_parse(json.as_ptr(), &mut config), Cat0Status::Ok);
        assert_eq!(cat0_run(c("drift").as_ptr(), config, &mut record), Cat0Status::Ok);
        assert_eq!(cat0_record_exit_code(record), 0);
        let text = read(|b, n, need| cat0_record_json(record, b, n, need));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["payload"]["rows"][3]["ln_exact"], "3/2");
        assert_eq!(cat0_record_csv_count(record), 1);
        let csv = read(|b, n, need| cat0_record_csv(record, 0, b, n, need));
        assert!(csv.starts_with("drift.csv\nn,Ln,Ltilde,Ln_over_n,stderr\n1,1,1,1,0\n"));
        cat0_record_free(record);
        cat0_config_free(config);
    }
}

#[test]
fn unknown_command_and_violations() {
    let json = c(r#"{"group": {"kind": "lattice", "rank": 1}, "params": {"n_max": 2}}"#);
    let mut config = ptr::null_mut();
    let mut record = ptr::null_mut();
    unsafe {
        assert_eq!(cat0_config_parse(json.as_ptr(), &mut config), Cat0Status::Ok);
        assert_eq!(cat0_run(c("plot").as_ptr(), config, &mut record), Cat0Status::UnknownCommand);
        assert!(record.is_null());
        let mut buf = [0 as c_char; 64];
        let n = cat0_last_error(buf.as_mut_ptr(), buf.len());
        assert_eq!(n, "unknown command \"plot\"".len() + 1);
        assert_eq!(cat0_run(c("conv_comb").as_ptr(), config, &mut record), Cat0Status::Schema);
        assert_eq!(cat0_record_exit_code(ptr::null()), -1);
        cat0_config_free(config);
    }
}

#[test]
fn space_distance_and_geodesic() {
    let mut space = ptr::null_mut();
    unsafe {
        assert_eq!(cat0_space_parse(c(r#"{"kind": "hyperbolic_plane"}"#).as_ptr(), &mut space), Cat0Status::Ok);
        let mut d = 0.0;
        let s = cat0_space_distance(space, c("[0, 1]").as_ptr(), c("[0, 7.38905609893065]").as_ptr(), &mut d);
        assert_eq!(s, Cat0Status::Ok);
        assert!((d - 2.0).abs() < 1e-12);
        let m = read(|b, n, need| cat0_space_geodesic(space, c("[0, 1]").as_ptr(), c("[0, 4]").as_ptr(), 0.5, b, n, need));
        let v: Vec<f64> = serde_json::from_str(&m).unwrap();
        assert!(v[0].abs() < 1e-12 && (v[1] - 2.0).abs() < 1e-12);
        assert_eq!(
            cat0_space_distance(space, c("[0, -1]").as_ptr(), c("[0, 1]").as_ptr(), &mut d),
            Cat0Status::Schema
        );
        cat0_space_free(space);
    }
}

#[test]
fn exact_drift_values() {
    let mut out = [0.0; 4];
    let s = unsafe { cat0_drift_exact(c(r#"{"kind": "lattice", "rank": 1}"#).as_ptr(), out.as_mut_ptr(), 4) };
    assert_eq!(s, Cat0Status::Ok);
    assert_eq!(out, [1.0, 1.0, 1.5, 1.5]);
}

#[test]
fn header_declares_every_export() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{dir}/include/cat0lab.h")).unwrap();
    let src = std::fs::read_to_string(format!("{dir}/src/lib.rs")).unwrap();
    let names: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(names.len() >= 14, "{names:?}");
    for name in names {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct Cat0Record Cat0Record;"));
    assert!(header.contains("CAT0_STATUS_BUFFER_TOO_SMALL = 11"));
}

use std::ffi::{CStr, CString};
use std::ptr;

use dlab_ffi::*;

const HEAT: &str = "[space]\nlo = -10\nhi = 10\nnodes = 401\n";

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        dlab_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn space(text: &str) -> *mut DlabSpace {
    let c = CString::new(text).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { dlab_space_from_config(c.as_ptr(), &mut s) },
        DlabStatus::Ok
    );
    s
}

fn nonlinearity(entry: &str) -> *mut DlabNonlinearity {
    let c = CString::new(entry).unwrap();
    let mut nl = ptr::null_mut();
    assert_eq!(
        unsafe { dlab_nonlinearity_parse(c.as_ptr(), &mut nl) },
        DlabStatus::Ok
    );
    nl
}

#[test]
fn version_is_static_c_string() {
    let v = unsafe { CStr::from_ptr(dlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn epsilon_window_and_h() {
    let nl = nonlinearity("allen_cahn");
    let (mut lo, mut hi, mut empty) = (f64::NAN, f64::NAN, -1);
    let st = unsafe { dlab_epsilon_window(nl, 0.5, 1.0, &mut lo, &mut hi, &mut empty) };
    assert_eq!(st, DlabStatus::Ok);
    assert_eq!((lo, empty), (0.0, 0));
    assert!((hi - 2.0 / 3.0).abs() < 1e-12);
    let mut h = 0.0;
    assert_eq!(
        unsafe { dlab_nonlinearity_h(nl, 0.5, 0.5, &mut h) },
        DlabStatus::Ok
    );
    // −(ε+2)u² + ε
    assert!((h - (-2.5 * 0.25 + 0.5)).abs() < 1e-14);
    unsafe { dlab_nonlinearity_free(nl) };
}

#[test]
fn errors_set_status_and_message() {
    let bad = CString::new("sine").unwrap();
    let mut nl = ptr::null_mut();
    assert_eq!(
        unsafe { dlab_nonlinearity_parse(bad.as_ptr(), &mut nl) },
        DlabStatus::InvalidArgument
    );
    assert!(nl.is_null());
    assert!(last_error().contains("unknown nonlinearity"));
    assert_eq!(
        unsafe { dlab_nonlinearity_parse(ptr::null(), &mut nl) },
        DlabStatus::NullPointer
    );
    let mut n = 0;
    assert_eq!(
        unsafe { dlab_space_nodes(ptr::null(), &mut n) },
        DlabStatus::NullPointer
    );
    assert!(last_error().contains("space is null"));
    // success clears the message
    let s = space(HEAT);
    assert_eq!(unsafe { dlab_space_nodes(s, &mut n) }, DlabStatus::Ok);
    assert_eq!(n, 401);
    assert_eq!(last_error(), "");
    unsafe { dlab_space_free(s) };
    unsafe { dlab_space_free(ptr::null_mut()) };
}

#[test]
fn truncated_error_buffer() {
    let mut n = 0;
    unsafe { dlab_space_nodes(ptr::null(), &mut n) };
    let mut buf = [1 as std::ffi::c_char; 4];
    let need = unsafe { dlab_last_error(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(need, "space is null".len() + 1);
    assert_eq!(
        unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(),
        "spa"
    );
}

#[test]
fn solve_and_read_back() {
    let s = space("[space]\nlo = -5\nhi = 5\nnodes = 51\n");
    let nl = nonlinearity("log{a=-1}");
    let u0 = vec![(-0.5f64).exp(); 51];
    let mut field = ptr::null_mut();
    let st = unsafe { dlab_solve(s, nl, u0.as_ptr(), u0.len(), 0.0, 1.0, 0.01, &mut field) };
    assert_eq!(st, DlabStatus::Ok, "{}", last_error());
    let (mut nodes, mut times) = (0, 0);
    assert_eq!(
        unsafe { dlab_field_shape(field, &mut nodes, &mut times) },
        DlabStatus::Ok
    );
    assert_eq!((nodes, times), (51, 101));
    let mut small = vec![0.0; 10];
    let st = unsafe { dlab_field_values(field, small.as_mut_ptr(), small.len()) };
    assert_eq!(st, DlabStatus::BufferTooSmall);
    let mut all = vec![0.0; nodes * times];
    assert_eq!(
        unsafe { dlab_field_values(field, all.as_mut_ptr(), all.len()) },
        DlabStatus::Ok
    );
    // exp(−0.5 e^{−1}) from the closed form, first-order in time
    let exact = (-0.5 * (-1.0f64).exp()).exp();
    assert!((all[nodes * times - 1] - exact).abs() < 1e-3);
    let mut xs = vec![0.0; nodes];
    assert_eq!(
        unsafe { dlab_space_coordinates(s, xs.as_mut_ptr(), nodes) },
        DlabStatus::Ok
    );
    assert_eq!((xs[0], xs[50]), (-5.0, 5.0));

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("f.dlab").to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { dlab_field_write_snapshot(field, path.as_ptr()) },
        DlabStatus::Ok
    );
    let snap = dlab::solver::read_snapshot(std::fs::File::open(dir.path().join("f.dlab")).unwrap())
        .unwrap();
    assert_eq!(snap.values, all);
    unsafe {
        dlab_field_free(field);
        dlab_nonlinearity_free(nl);
        dlab_space_free(s);
    }
}

#[test]
fn solver_abort_status() {
    let s = space("[space]\nlo = -5\nhi = 5\nnodes = 11\n");
    let nl = nonlinearity("log{a=1}");
    let u0 = vec![-1.0; 11];
    let mut field = ptr::null_mut();
    let st = unsafe { dlab_solve(s, nl, u0.as_ptr(), u0.len(), 0.0, 1.0, 0.01, &mut field) };
    assert_eq!(st, DlabStatus::SolverAbort);
    assert!(field.is_null());
    unsafe {
        dlab_nonlinearity_free(nl);
        dlab_space_free(s);
    }
}

#[test]
fn verify_heat_kernel() {
    let s = space(HEAT);
    let nl = nonlinearity("zero");
    let family = CString::new("gaussian_heat{shift=0.25}").unwrap();
    let mut field = ptr::null_mut();
    let st = unsafe { dlab_field_exact(s, family.as_ptr(), 0.0, 0.01, 101, &mut field) };
    assert_eq!(st, DlabStatus::Ok, "{}", last_error());
    let mut rep = DlabEstimate::default();
    let st = unsafe { dlab_verify(field, nl, 0.5, 0.0, 0.0, &mut rep) };
    assert_eq!(st, DlabStatus::Ok, "{}", last_error());
    assert_eq!(rep.lemma_holds, 1);
    assert_eq!((rep.k, rep.radius, rep.eps), (0.0, 10.0, 0.5));
    assert!(rep.c_empirical > 0.0 && rep.c_empirical <= rep.c_conservative);
    let st = unsafe { dlab_verify(field, nl, 1.5, 0.0, 0.0, &mut rep) };
    assert_eq!(st, DlabStatus::InvalidArgument);
    unsafe {
        dlab_field_free(field);
        dlab_nonlinearity_free(nl);
        dlab_space_free(s);
    }
}

#[test]
fn header_is_current() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/dlab.h")).unwrap();
    for name in [
        "dlab_last_error",
        "dlab_version",
        "dlab_space_from_config",
        "dlab_space_free",
        "dlab_space_nodes",
        "dlab_space_coordinates",
        "dlab_nonlinearity_parse",
        "dlab_nonlinearity_free",
        "dlab_nonlinearity_h",
        "dlab_epsilon_window",
        "dlab_solve",
        "dlab_field_exact",
        "dlab_field_free",
        "dlab_field_shape",
        "dlab_field_values",
        "dlab_field_write_snapshot",
        "dlab_verify",
    ] {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    assert!(header.contains("DLAB_STATUS_BUFFER_TOO_SMALL = 6"));
}

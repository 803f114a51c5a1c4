use std::ffi::CStr;
use std::ptr;

use stab_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        stab_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn mesh_counts_match_icosphere() {
    unsafe {
        let mut mesh = ptr::null_mut();
        assert_eq!(stab_mesh_new(2, &mut mesh), StabStatus::Ok);
        let (mut v, mut e, mut f) = (0, 0, 0);
        assert_eq!(stab_mesh_counts(mesh, &mut v, &mut e, &mut f), StabStatus::Ok);
        assert_eq!((v, e, f), (162, 480, 320));
        stab_mesh_free(mesh);
    }
}

#[test]
fn null_handles_are_rejected() {
    unsafe {
        assert_eq!(stab_mesh_new(1, ptr::null_mut()), StabStatus::NullPointer);
        assert_eq!(stab_gl_solve(ptr::null_mut()), StabStatus::NullPointer);
        assert!(last_error().contains("null"));
        stab_mesh_free(ptr::null_mut());
        stab_gl_state_free(ptr::null_mut());
        stab_ymh_state_free(ptr::null_mut());
    }
}

#[test]
fn invalid_epsilon_reports_message() {
    unsafe {
        let mut mesh = ptr::null_mut();
        assert_eq!(stab_mesh_new(1, &mut mesh), StabStatus::Ok);
        let mut state = ptr::null_mut();
        let s = stab_gl_state_new(mesh, -1.0, StabAnsatz::VortexPair, 1, &mut state);
        assert_eq!(s, StabStatus::InvalidArgument);
        assert!(state.is_null());
        assert!(last_error().contains("epsilon"), "{}", last_error());
        stab_mesh_free(mesh);
    }
}

#[test]
fn gl_solve_reaches_critical_point() {
    unsafe {
        let mut mesh = ptr::null_mut();
        assert_eq!(stab_mesh_new(3, &mut mesh), StabStatus::Ok);
        let mut state = ptr::null_mut();
        assert_eq!(stab_gl_state_new(mesh, 0.5, StabAnsatz::VortexPair, 1, &mut state), StabStatus::Ok);
        let (mut e0, mut r0) = (0.0, 0.0);
        assert_eq!(stab_gl_energy(state, &mut e0, &mut r0), StabStatus::Ok);
        assert_eq!(stab_gl_solve(state), StabStatus::Ok);
        let (mut e1, mut r1) = (0.0, 0.0);
        assert_eq!(stab_gl_energy(state, &mut e1, &mut r1), StabStatus::Ok);
        assert!(e1 <= e0);
        assert!(r1 < 1e-8, "residual {r1}");

        let mut re = vec![0.0; 100];
        let mut im = vec![0.0; 100];
        assert_eq!(stab_gl_values(state, re.as_mut_ptr(), im.as_mut_ptr(), 100), StabStatus::BufferTooSmall);
        let mut re = vec![0.0; 642];
        let mut im = vec![0.0; 642];
        assert_eq!(stab_gl_values(state, re.as_mut_ptr(), im.as_mut_ptr(), 642), StabStatus::Ok);
        assert!(re.iter().zip(&im).all(|(a, b)| (a * a + b * b).sqrt() <= 1.0 + 1e-9));
        stab_gl_state_free(state);
        stab_mesh_free(mesh);
    }
}

#[test]
fn ymh_solve_keeps_degree() {
    unsafe {
        let mut mesh = ptr::null_mut();
        assert_eq!(stab_mesh_new(3, &mut mesh), StabStatus::Ok);
        let mut state = ptr::null_mut();
        assert_eq!(stab_ymh_state_new(mesh, 0.3, 1, &mut state), StabStatus::Ok);
        assert_eq!(stab_ymh_solve(state), StabStatus::Ok);
        let (mut e, mut g, mut d) = (0.0, 0.0, 0);
        assert_eq!(stab_ymh_energy(state, &mut e, &mut g, &mut d), StabStatus::Ok);
        assert_eq!(d, 1);
        assert!(g < 1e-6, "gradient {g}");
        assert!(e > 0.9 * std::f64::consts::TAU && e < 1.1 * std::f64::consts::TAU, "energy {e}");
        stab_ymh_state_free(state);
        stab_mesh_free(mesh);
    }
}

#[test]
fn pointlab_identities_hold() {
    for id in [StabIdentity::SphereGl, StabIdentity::SphereYmh, StabIdentity::CpnLemma] {
        let n = if id == StabIdentity::CpnLemma { 2 } else { 5 };
        let mut dev = f64::NAN;
        let s = unsafe { stab_pointlab_check(id, n, 20, 7, &mut dev, ptr::null_mut()) };
        assert_eq!(s, StabStatus::Ok);
        assert!(dev < 1e-9, "{id:?}: {dev}");
    }
}

#[test]
fn status_strings_are_static() {
    let s = unsafe { CStr::from_ptr(stab_status_str(StabStatus::NotConverged)) };
    assert_eq!(s.to_str().unwrap(), "not converged");
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/stab.h")).unwrap();
    let source = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

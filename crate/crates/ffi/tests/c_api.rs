use std::ffi::{c_char, CStr, CString};
use std::ptr;

use attractorlab_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe { al_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn biangle_timeline_round_trip() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(al_model_biangle(2.0, 1.0, 2.0, 1.0, 1.0, &mut m), AL_OK);
        let mut t = ptr::null_mut();
        assert_eq!(al_timeline_generate(m, 0.1, 60, &mut t), AL_OK);
        assert_eq!(al_timeline_len(t), 60);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(al_timeline_ln_t_a(t, 50, &mut a), AL_OK);
        assert_eq!(al_timeline_ln_t_a(t, 51, &mut b), AL_OK);
        assert!((b - a - 4f64.ln()).abs() < 1e-9);
        assert_eq!(al_timeline_ln_t_a(t, 500, &mut a), AL_ERR_RANGE);
        let (mut next, mut time) = (0.0, 0.0);
        assert_eq!(al_poincare_step(m, 0.1, &mut next, &mut time), AL_OK);
        assert!(next < 0.1 && time > 0.0);
        al_timeline_free(t);
        al_model_free(m);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut m = ptr::null_mut();
        // Λ = 1
        assert_eq!(al_model_biangle(1.0, 1.0, 1.0, 1.0, 1.0, &mut m), AL_ERR_INVARIANT);
        assert!(m.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(al_model_loop(2.0, 1.0, 1.0, 1.0, ptr::null_mut()), AL_ERR_NULL);
        assert!(last_error().contains("null"));
        let mut x = 0.0;
        assert_eq!(al_orbit_theta_at(ptr::null(), 1.0, &mut x), AL_ERR_NULL);
        assert_eq!(al_manifest_passed(ptr::null()), 0);
        // truncation reports the full length
        let mut small = [0 as c_char; 4];
        let n = al_last_error(small.as_mut_ptr(), small.len());
        assert!(n > 3);
        assert_eq!(CStr::from_ptr(small.as_ptr()).to_bytes().len(), 3);
    }
}

#[test]
fn cylinder_orbit_and_scenario() {
    unsafe {
        let mut o = ptr::null_mut();
        assert_eq!(al_cylinder_orbit(-std::f64::consts::FRAC_PI_3 + 0.3, 0.0, 6.0, 1e-9, &mut o), AL_OK);
        let (mut l, mut r) = (0.0, 0.0);
        assert_eq!(al_orbit_occupancy(o, 0.1, &mut l, &mut r), AL_OK);
        assert!(l > 0.0 && r > 0.0 && l + r <= 1.0);
        assert_eq!(al_orbit_occupancy(o, 2.0, &mut l, &mut r), AL_ERR_DOMAIN);
        al_orbit_free(o);

        let tmp = tempfile::tempdir().unwrap();
        let cfg = CString::new(format!("kind = \"loop-square\"\ncount = 3\noutput_dir = {:?}\n", tmp.path())).unwrap();
        let mut mf = ptr::null_mut();
        assert_eq!(al_run_scenario(cfg.as_ptr(), &mut mf), AL_OK, "{}", last_error());
        assert_eq!(al_manifest_passed(mf), 1);
        let mut buf = vec![0 as c_char; 1024];
        let n = al_manifest_path(mf, buf.as_mut_ptr(), buf.len());
        let p = CStr::from_ptr(buf.as_ptr()).to_str().unwrap().to_string();
        assert_eq!(p.len(), n);
        assert!(std::path::Path::new(&p).exists());
        al_manifest_free(mf);

        let bad = CString::new("kind = \"torus\"").unwrap();
        assert_eq!(al_run_scenario(bad.as_ptr(), &mut mf), AL_ERR_CONFIG);
        assert!(!CStr::from_ptr(al_version()).to_bytes().is_empty());
    }
}

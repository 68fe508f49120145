use std::ffi::{CStr, CString};
use std::ptr;

use hyperrig_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hr_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn sphere_check_round_trip() {
    unsafe {
        let spec = CString::new("sphere:rho=pi/6").unwrap();
        let mut chart = ptr::null_mut();
        assert_eq!(hr_chart_from_spec(spec.as_ptr(), &mut chart), HrStatus::Ok);
        assert_eq!(hr_chart_param_dim(chart), 2);
        let res = [24usize, 24];
        let mut mesh = ptr::null_mut();
        assert_eq!(hr_chart_sample(chart, res.as_ptr(), 2, &mut mesh), HrStatus::Ok);
        assert_eq!(hr_mesh_len(mesh), 576);
        assert_eq!(hr_mesh_ambient_dim(mesh), 4);

        let mut x = [0.0; 4];
        assert_eq!(hr_mesh_point(mesh, 5, x.as_mut_ptr(), 4), HrStatus::Ok);
        assert!((x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(hr_mesh_point(mesh, 10_000, x.as_mut_ptr(), 4), HrStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));

        let mut report = ptr::null_mut();
        assert_eq!(hr_check_theorem1(mesh, &mut report), HrStatus::Ok);
        assert_eq!(hr_report_hypothesis_holds(report), 1);
        let (mut bound, mut radius, mut k) = (0.0, 0.0, 0.0);
        assert_eq!(hr_report_values(report, &mut bound, &mut radius, &mut k), HrStatus::Ok);
        let pi = std::f64::consts::PI;
        assert!((bound - (pi / 12.0).tan()).abs() < 1e-9);
        assert!((k - 3f64.sqrt()).abs() < 1e-6);
        let mut deg = 0;
        assert_eq!(hr_report_degree(report, &mut deg), HrStatus::Ok);
        assert_eq!(deg.abs(), 1);

        let json = hr_report_to_json(report);
        assert!(!json.is_null());
        let text = CStr::from_ptr(json).to_str().unwrap().to_string();
        assert!(text.contains("\"hypothesis_holds\": true"));
        hr_string_free(json);

        let p0 = [0.0, 0.0, 0.0, 1.0];
        assert_eq!(hr_mesh_gauss_degree(mesh, p0.as_ptr(), 4, &mut deg), HrStatus::Ok);
        assert_eq!(deg.abs(), 1);

        let mut center = [0.0; 4];
        let mut r = 0.0;
        assert_eq!(hr_mesh_ball(mesh, HrBallObjective::Enclosing, 0, &mut r, center.as_mut_ptr(), 4), HrStatus::Ok);
        assert!((r - pi / 6.0).abs() < 1e-9);
        assert!((center[3] - 1.0).abs() < 1e-9);

        hr_report_free(report);
        hr_mesh_free(mesh);
        hr_chart_free(chart);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let bad = CString::new("torus:r=2").unwrap();
        let mut chart = ptr::null_mut();
        assert_eq!(hr_chart_from_spec(bad.as_ptr(), &mut chart), HrStatus::Config);
        assert!(chart.is_null());
        assert!(last_error().contains("unknown chart kind"));
        assert_eq!(hr_chart_from_spec(ptr::null(), &mut chart), HrStatus::NullPointer);
        assert_eq!(hr_chart_sample(ptr::null(), ptr::null(), 0, ptr::null_mut()), HrStatus::NullPointer);
        assert_eq!(hr_mesh_len(ptr::null()), 0);
        assert_eq!(hr_report_hypothesis_holds(ptr::null()), -1);
        hr_chart_free(ptr::null_mut());
        hr_string_free(ptr::null_mut());

        let not_orth = CString::new("[[[1,0],[0,1]],[[2,0],[0,2]]]").unwrap();
        let mut g = ptr::null_mut();
        assert_eq!(hr_group_from_json(not_orth.as_ptr(), &mut g), HrStatus::Config);
        assert!(last_error().contains("element 1") || last_error().contains("1"));
    }
}

#[test]
fn groups_and_cut_locus() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(hr_group_lens(5, 2, &mut g), HrStatus::Ok);
        assert_eq!(hr_group_order(g), 5);
        let p = [1.0, 0.0, 0.0, 0.0];
        let mut sep = 0.0;
        assert_eq!(hr_group_separation(g, p.as_ptr(), 4, &mut sep), HrStatus::Ok);
        assert!((sep - 2.0 * std::f64::consts::PI / 5.0).abs() < 1e-12);
        hr_group_free(g);

        assert_eq!(hr_group_antipodal(4, &mut g), HrStatus::Ok);
        let p0 = [0.0, 0.0, 0.0, 1.0];
        let x = [0.6, 0.0, 0.0, 0.8];
        let mut d = 0.0;
        assert_eq!(hr_cut_locus_distance(g, p0.as_ptr(), x.as_ptr(), 4, &mut d), HrStatus::Ok);
        assert!((d - 0.8f64.asin()).abs() < 2e-3);
        assert_eq!(hr_cut_locus_distance(g, p0.as_ptr(), x.as_ptr(), 3, &mut d), HrStatus::InvalidArgument);
        hr_group_free(g);
    }
}

#[test]
fn cli_entry_point() {
    let args: Vec<CString> = ["hyperrig", "gallery"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<*const std::ffi::c_char> = args.iter().map(|s| s.as_ptr()).collect();
    assert_eq!(unsafe { hr_run_cli(2, ptrs.as_ptr()) }, 0);
    let args: Vec<CString> = ["hyperrig", "frobnicate"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<*const std::ffi::c_char> = args.iter().map(|s| s.as_ptr()).collect();
    assert_eq!(unsafe { hr_run_cli(2, ptrs.as_ptr()) }, 64);
}

//! C ABI over `hyperrig`.
//!
//! Objects cross the boundary as opaque handles created by `hr_*_new`/`hr_*_from_*`
//! functions and released by the matching `hr_*_free`. Every fallible call
//! returns an [`HrStatus`]; on failure `hr_last_error()` describes the problem
//! until the next call on the same thread. Panics are caught and reported as
//! `HR_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hyperrig::ball::{largest_empty_ball, smallest_enclosing_ball, BallConfig};
use hyperrig::gallery::chart_from_spec;
use hyperrig::gauss_map::GaussMapContext;
use hyperrig::quotient::{separation, DirichletBoundary, IsometryGroup, DEFAULT_BOUNDARY_DENSITY};
use hyperrig::rigidity::{check_theorem1, RigidityConfig, RigidityReport};
use hyperrig::{Error, HypersurfaceMesh, ImmersionChart, SpherePoint};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HrStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// Malformed argument (bad UTF-8, wrong length, out of range).
    InvalidArgument = 2,
    /// Unparseable chart or group description.
    Config = 3,
    /// The computation failed (singular map, degenerate input, ...).
    Computation = 4,
    Panic = 5,
}

/// Objective selector for [`hr_mesh_ball`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HrBallObjective {
    Enclosing = 0,
    Empty = 1,
}

/// Parametrized hypersurface.
pub struct HrChart(ImmersionChart);
/// Sampled hypersurface with curvature data.
pub struct HrMesh(HypersurfaceMesh);
/// Result of a theorem check.
pub struct HrReport(RigidityReport);
/// Finite isometry group acting freely on the sphere.
pub struct HrGroup(IsometryGroup);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HrStatus {
    match e {
        Error::Config(_) | Error::InvalidGroup { .. } | Error::TrivialGroup => HrStatus::Config,
        Error::InvalidArgument(_) | Error::InvalidPoint(_) | Error::DimensionMismatch { .. } | Error::BadDimension(_) => {
            HrStatus::InvalidArgument
        }
        _ => HrStatus::Computation,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (HrStatus, String)>) -> HrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HrStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            HrStatus::Panic
        }
    }
}

trait Lift<T> {
    fn lift(self) -> Result<T, (HrStatus, String)>;
}

impl<T> Lift<T> for hyperrig::Result<T> {
    fn lift(self) -> Result<T, (HrStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (HrStatus, String) {
    (HrStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (HrStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (HrStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (HrStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (HrStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (HrStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn point(p: *const f64, len: usize, what: &str) -> Result<SpherePoint, (HrStatus, String)> {
    SpherePoint::from_slice(slice(p, len, what)?).lift()
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failed call on this thread (empty after success).
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn hr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn hr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a chart from a description such as `sphere:rho=pi/6`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_chart_from_spec(spec: *const c_char, out: *mut *mut HrChart) -> HrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let chart = chart_from_spec(c_str(spec, "spec")?).lift()?;
        *out = boxed(HrChart(chart));
        Ok(())
    })
}

/// # Safety
/// `chart` must come from `hr_chart_from_spec` (or be null).
#[no_mangle]
pub unsafe extern "C" fn hr_chart_free(chart: *mut HrChart) {
    if !chart.is_null() {
        drop(Box::from_raw(chart));
    }
}

/// Number of parameters of the chart (0 for a null handle).
///
/// # Safety
/// `chart` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hr_chart_param_dim(chart: *const HrChart) -> usize {
    chart.as_ref().map_or(0, |c| c.0.param_dim())
}

/// Samples the chart. `resolution` holds `len` cells-per-axis values; `len = 0` picks defaults.
///
/// # Safety
/// `chart` must be live, `resolution` readable for `len` entries, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_chart_sample(
    chart: *const HrChart,
    resolution: *const usize,
    len: usize,
    out: *mut *mut HrMesh,
) -> HrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let chart = &borrow(chart, "chart")?.0;
        let res = match slice(resolution, len, "resolution")? {
            [] => hyperrig::immersion::default_resolution(chart.param_dim()),
            r => r.to_vec(),
        };
        *out = boxed(HrMesh(chart.sample_mesh(&res).lift()?));
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from `hr_chart_sample` (or be null).
#[no_mangle]
pub unsafe extern "C" fn hr_mesh_free(mesh: *mut HrMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Number of samples (0 for a null handle).
///
/// # Safety
/// `mesh` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn hr_mesh_len(mesh: *const HrMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.len())
}

/// Dimension of the ambient Euclidean space (0 for a null handle).
///
/// # Safety
/// `mesh` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn hr_mesh_ambient_dim(mesh: *const HrMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.chart.ambient_dim())
}

/// Copies sample `index` into `coords` (`len` must equal the ambient dimension).
///
/// # Safety
/// `mesh` must be live and `coords` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hr_mesh_point(mesh: *const HrMesh, index: usize, coords: *mut f64, len: usize) -> HrStatus {
    guard(|| {
        let m = &borrow(mesh, "mesh")?.0;
        let s = m
            .samples
            .get(index)
            .ok_or_else(|| (HrStatus::InvalidArgument, format!("index {index} out of range (len {})", m.len())))?;
        let x = s.point.coords();
        if len != x.len() {
            return Err((HrStatus::InvalidArgument, format!("coords has length {len}, expected {}", x.len())));
        }
        if coords.is_null() {
            return Err(null("coords"));
        }
        std::slice::from_raw_parts_mut(coords, len).copy_from_slice(x.as_slice());
        Ok(())
    })
}

/// Smallest absolute principal curvature over all samples.
///
/// # Safety
/// `mesh` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_mesh_min_abs_curvature(mesh: *const HrMesh, out: *mut f64) -> HrStatus {
    guard(|| {
        *out_ptr(out, "out")? = borrow(mesh, "mesh")?.0.min_abs_curvature();
        Ok(())
    })
}

/// Smallest enclosing or largest empty ball of the samples.
/// `center` receives `len` coordinates (the ambient dimension).
///
/// # Safety
/// `mesh` must be live, `radius` writable, `center` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hr_mesh_ball(
    mesh: *const HrMesh,
    objective: HrBallObjective,
    seed: u64,
    radius: *mut f64,
    center: *mut f64,
    len: usize,
) -> HrStatus {
    guard(|| {
        let m = &borrow(mesh, "mesh")?.0;
        let radius = out_ptr(radius, "radius")?;
        let dim = m.chart.ambient_dim();
        if len != dim || center.is_null() {
            return Err((HrStatus::InvalidArgument, format!("center needs {dim} writable doubles")));
        }
        let cfg = BallConfig { seed, ..BallConfig::default() };
        let pts = m.points();
        let r = match objective {
            HrBallObjective::Enclosing => smallest_enclosing_ball(&pts, &cfg),
            HrBallObjective::Empty => largest_empty_ball(&pts, &cfg),
        }
        .lift()?;
        *radius = r.radius;
        std::slice::from_raw_parts_mut(center, len).copy_from_slice(r.center.coords().as_slice());
        Ok(())
    })
}

/// Degree of the transport Gauss map at basepoint `p0` (`len` coordinates).
///
/// # Safety
/// `mesh` must be live, `p0` readable for `len` doubles, `degree` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_mesh_gauss_degree(mesh: *const HrMesh, p0: *const f64, len: usize, degree: *mut i64) -> HrStatus {
    guard(|| {
        let m = &borrow(mesh, "mesh")?.0;
        let degree = out_ptr(degree, "degree")?;
        let ctx = GaussMapContext::new(point(p0, len, "p0")?, m).lift()?;
        *degree = ctx.degree().lift()?.0;
        Ok(())
    })
}

/// Enclosing-ball curvature check with default settings.
///
/// # Safety
/// `mesh` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_check_theorem1(mesh: *const HrMesh, out: *mut *mut HrReport) -> HrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let report = check_theorem1(&borrow(mesh, "mesh")?.0, &RigidityConfig::default()).lift()?;
        *out = boxed(HrReport(report));
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library (or be null).
#[no_mangle]
pub unsafe extern "C" fn hr_report_free(report: *mut HrReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// 1 if the curvature hypothesis holds, 0 if not, -1 for a null handle.
///
/// # Safety
/// `report` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn hr_report_hypothesis_holds(report: *const HrReport) -> i32 {
    report.as_ref().map_or(-1, |r| r.0.hypothesis_holds as i32)
}

/// Curvature bound, radius and smallest curvature of a report.
///
/// # Safety
/// `report` must be live; each out pointer may be null to skip it.
#[no_mangle]
pub unsafe extern "C" fn hr_report_values(
    report: *const HrReport,
    bound: *mut f64,
    radius: *mut f64,
    min_abs_curvature: *mut f64,
) -> HrStatus {
    guard(|| {
        let r = &borrow(report, "report")?.0;
        for (p, v) in [(bound, r.bound), (radius, r.radius), (min_abs_curvature, r.min_abs_curvature)] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Gauss map degree recorded in the report; `Computation` if none was computed.
///
/// # Safety
/// `report` must be live and `degree` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_report_degree(report: *const HrReport, degree: *mut i64) -> HrStatus {
    guard(|| {
        let r = &borrow(report, "report")?.0;
        let d = out_ptr(degree, "degree")?;
        *d = r.degree.ok_or_else(|| (HrStatus::Computation, "no degree recorded".to_string()))?;
        Ok(())
    })
}

/// JSON rendering of the report; free with `hr_string_free`. Null on failure.
///
/// # Safety
/// `report` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn hr_report_to_json(report: *const HrReport) -> *mut c_char {
    let mut out = ptr::null_mut();
    let status = guard(|| {
        let r = &borrow(report, "report")?.0;
        let text = serde_json_string(r)?;
        out = CString::new(text).map_err(|e| (HrStatus::Computation, e.to_string()))?.into_raw();
        Ok(())
    });
    if status == HrStatus::Ok {
        out
    } else {
        ptr::null_mut()
    }
}

fn serde_json_string(r: &RigidityReport) -> Result<String, (HrStatus, String)> {
    r.to_json().map_err(|e| (HrStatus::Computation, e.to_string()))
}

/// `{±I}` acting on `R^dim`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_group_antipodal(dim: usize, out: *mut *mut HrGroup) -> HrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        *out = boxed(HrGroup(IsometryGroup::antipodal(dim).lift()?));
        Ok(())
    })
}

/// Cyclic group of order `k` on `R⁴` rotating two orthogonal planes by `2π/k` and `2πq/k`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_group_lens(k: usize, q: usize, out: *mut *mut HrGroup) -> HrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        *out = boxed(HrGroup(IsometryGroup::lens(k, q).lift()?));
        Ok(())
    })
}

/// Group from a JSON list of orthogonal matrices, identity first.
///
/// # Safety
/// `json` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_group_from_json(json: *const c_char, out: *mut *mut HrGroup) -> HrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        *out = boxed(HrGroup(IsometryGroup::from_json(c_str(json, "json")?).lift()?));
        Ok(())
    })
}

/// # Safety
/// `group` must come from this library (or be null).
#[no_mangle]
pub unsafe extern "C" fn hr_group_free(group: *mut HrGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Group order (0 for a null handle).
///
/// # Safety
/// `group` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn hr_group_order(group: *const HrGroup) -> usize {
    group.as_ref().map_or(0, |g| g.0.order())
}

/// `min_{g≠e} d(p, g p)`.
///
/// # Safety
/// `group` must be live, `p` readable for `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_group_separation(group: *const HrGroup, p: *const f64, len: usize, out: *mut f64) -> HrStatus {
    guard(|| {
        let g = &borrow(group, "group")?.0;
        let out = out_ptr(out, "out")?;
        *out = separation(g, &point(p, len, "p")?).lift()?;
        Ok(())
    })
}

/// Quotient distance from `x` to the cut locus of `p0`; both have `len` coordinates.
///
/// # Safety
/// `group` must be live, `p0` and `x` readable for `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_cut_locus_distance(
    group: *const HrGroup,
    p0: *const f64,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> HrStatus {
    guard(|| {
        let g = &borrow(group, "group")?.0;
        let out = out_ptr(out, "out")?;
        let p0 = point(p0, len, "p0")?;
        let x = point(x, len, "x")?;
        if len != g.dim() {
            return Err((HrStatus::InvalidArgument, format!("points have {len} coordinates, group acts on R^{}", g.dim())));
        }
        *out = DirichletBoundary::new(g, &p0, DEFAULT_BOUNDARY_DENSITY).lift()?.cut_locus_distance(&x);
        Ok(())
    })
}

/// Runs the command-line driver with `argc` arguments (program name first) and returns its exit code.
///
/// # Safety
/// `argv` must hold `argc` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn hr_run_cli(argc: i32, argv: *const *const c_char) -> i32 {
    let args: Option<Vec<String>> = (|| {
        let list = slice(argv, argc.max(0) as usize, "argv").ok()?;
        list.iter().map(|&a| c_str(a, "argv").ok().map(str::to_string)).collect()
    })();
    match args {
        Some(a) => catch_unwind(|| hyperrig::cli::run(a)).unwrap_or(hyperrig::cli::EXIT_ERROR),
        None => hyperrig::cli::EXIT_CONFIG,
    }
}

//! Curvature-bound rigidity checks.
//!
//! Each check compares the smallest absolute principal curvature of a mesh
//! with a bound built from ball radii, then scans the transport Gauss map
//! for singular samples and computes its degree. The reports never claim a
//! diffeomorphism: the checkable consequence is "hypothesis holds, `dγ`
//! nonsingular on every sample, `|degree| = 1`".

use std::f64::consts::PI;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ball::{largest_empty_ball, smallest_enclosing_ball, BallConfig};
use crate::error::{Error, Result};
use crate::gallery::clifford_torus;
use crate::gauss_map::{DegreeOptions, GaussMapContext};
use crate::immersion::HypersurfaceMesh;
use crate::sphere::{distance_to_great_sphere, geodesic_distance, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremId {
    /// Enclosing-ball bound `tan(R/2)`.
    T1,
    /// Quotient bound `cot((r − 2R)/4)`.
    T2,
    /// Normal-strip bound `sin L / (1 + cos R)`.
    T3,
    /// Projective-space bound `tan((π/2 + R)/2)`.
    Corollary,
}

impl std::str::FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(TheoremId::T1),
            "t2" => Ok(TheoremId::T2),
            "t3" | "variation" => Ok(TheoremId::T3),
            "corollary" | "rp" => Ok(TheoremId::Corollary),
            other => Err(Error::Config(format!("unknown theorem '{other}'"))),
        }
    }
}

/// Per-component findings for quotient checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentScan {
    pub pieces: Vec<usize>,
    pub samples: usize,
    pub gauss_map_nonsingular: bool,
    pub min_abs_jacobian: f64,
    pub degree: Option<i64>,
    pub degree_residual: Option<f64>,
}

/// Extra fields filled by the quotient checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientSummary {
    pub group_order: usize,
    /// Smallest displacement `min_{g≠1} d(p, g p)` at the lifted basepoint.
    pub separation: f64,
    /// Number of connected components of the lifted hypersurface.
    pub components: usize,
    pub components_downstairs: usize,
    /// `|Γ| / k`.
    pub multiplicity: Option<usize>,
    /// Predicted topology of each component, withheld when not certified.
    pub label: Option<String>,
    pub label_basis: Option<String>,
    pub component_scans: Vec<ComponentScan>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub theorem_id: TheoremId,
    pub inputs_digest: String,
    #[serde(rename = "R")]
    pub radius: f64,
    pub bound: f64,
    pub min_abs_curvature: f64,
    pub margin: f64,
    pub hypothesis_holds: bool,
    pub gauss_map_nonsingular: bool,
    pub degree: Option<i64>,
    pub degree_residual: Option<f64>,
    pub min_abs_jacobian: f64,
    pub basepoint: SpherePoint,
    /// Normal-strip width `L` (T3 only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strip_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball_certified_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quotient: Option<QuotientSummary>,
    pub falsification: bool,
    pub conclusion: String,
    pub notes: Vec<String>,
}

impl RigidityReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Hypothesis holds but the checkable conclusion failed.
    pub fn is_falsification(&self) -> bool {
        if !self.hypothesis_holds {
            return false;
        }
        if let Some(q) = &self.quotient {
            return !q.component_scans.iter().all(|c| c.gauss_map_nonsingular && c.degree.map(i64::abs) == Some(1));
        }
        !self.gauss_map_nonsingular || self.degree.map(i64::abs) != Some(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityConfig {
    pub ball: BallConfig,
    /// Overrides the ball center as basepoint (T1) or supplies it (T3).
    pub p0: Option<SpherePoint>,
    pub degree: DegreeOptions,
}

impl Default for RigidityConfig {
    fn default() -> Self {
        RigidityConfig { ball: BallConfig::default(), p0: None, degree: DegreeOptions::default() }
    }
}

/// `min |λ| > bound`, the only test that decides `hypothesis_holds`.
pub fn hypothesis_margin(min_abs_curvature: f64, bound: f64) -> (f64, bool) {
    let margin = min_abs_curvature - bound;
    (margin, margin > 0.0)
}

/// SHA-256 over the sampled geometry and a configuration string.
pub fn inputs_digest(mesh: &HypersurfaceMesh, config: &str) -> String {
    let mut h = Sha256::new();
    for s in &mesh.samples {
        for x in s.u.iter().chain(s.point.coords().iter()).chain(s.normal.vec.iter()) {
            h.update(x.to_le_bytes());
        }
        h.update(s.weight.to_le_bytes());
    }
    h.update(mesh.chart.info().name.as_bytes());
    h.update(config.as_bytes());
    hex::encode(h.finalize())
}

pub(crate) fn config_string<T: Serialize>(cfg: &T) -> String {
    serde_json::to_string(cfg).unwrap_or_default()
}

struct GaussFindings {
    nonsingular: bool,
    min_abs_det: f64,
    degree: Option<i64>,
    residual: Option<f64>,
    notes: Vec<String>,
}

fn gauss_findings(mesh: &HypersurfaceMesh, p0: &SpherePoint, opts: &DegreeOptions) -> Result<GaussFindings> {
    let ctx = GaussMapContext::new(p0.clone(), mesh)?;
    let scan = ctx.nonsingular_scan(opts.singular_tol)?;
    let mut notes = Vec::new();
    let (mut degree, mut residual) = (None, None);
    if scan.nonsingular {
        match ctx.degree_with(opts) {
            Ok((d, r)) => {
                degree = Some(d);
                residual = Some(r);
            }
            Err(Error::NonIntegerDegree { raw, residual: res }) => {
                notes.push(format!("degree quadrature {raw:.6} is not within {} of an integer (off by {res:.3e})", opts.residual_tol));
            }
            Err(e) => return Err(e),
        }
    } else {
        notes.push(format!(
            "gauss map singular: |det(A + cI)| = {:.3e} at sample {}",
            scan.min_abs_det, scan.argmin
        ));
    }
    Ok(GaussFindings { nonsingular: scan.nonsingular, min_abs_det: scan.min_abs_det, degree, residual, notes })
}

fn conclusion(holds: bool, g: &GaussFindings) -> String {
    let certified = g.nonsingular && g.degree.map(i64::abs) == Some(1);
    match (holds, certified) {
        (true, true) => "hypothesis holds; dγ nonsingular on all samples; |degree| = 1".into(),
        (true, false) => "FALSIFICATION: hypothesis holds but the gauss map check failed".into(),
        (false, true) => "hypothesis fails; dγ is nonetheless nonsingular with |degree| = 1".into(),
        (false, false) => "hypothesis fails; no conclusion".into(),
    }
}

struct Assembly {
    theorem_id: TheoremId,
    radius: f64,
    bound: f64,
    basepoint: SpherePoint,
    strip_width: Option<f64>,
    ball_certified_gap: Option<f64>,
    notes: Vec<String>,
}

fn assemble(mesh: &HypersurfaceMesh, cfg: &RigidityConfig, a: Assembly) -> Result<RigidityReport> {
    let min_abs = mesh.min_abs_curvature();
    let (margin, holds) = hypothesis_margin(min_abs, a.bound);
    let g = gauss_findings(mesh, &a.basepoint, &cfg.degree)?;
    let mut notes = a.notes;
    if !holds {
        notes.push("hypothesis fails; the condition is sufficient, not necessary".into());
    }
    if mesh.chart.info().sheets > 1 {
        notes.push(format!("degree divided by the chart's {} sheets", mesh.chart.info().sheets));
    }
    notes.extend(g.notes.iter().cloned());
    let mut report = RigidityReport {
        theorem_id: a.theorem_id,
        inputs_digest: inputs_digest(mesh, &config_string(cfg)),
        radius: a.radius,
        bound: a.bound,
        min_abs_curvature: min_abs,
        margin,
        hypothesis_holds: holds,
        gauss_map_nonsingular: g.nonsingular,
        degree: g.degree,
        degree_residual: g.residual,
        min_abs_jacobian: g.min_abs_det,
        basepoint: a.basepoint,
        strip_width: a.strip_width,
        ball_certified_gap: a.ball_certified_gap,
        quotient: None,
        falsification: false,
        conclusion: conclusion(holds, &g),
        notes,
    };
    report.falsification = report.is_falsification();
    Ok(report)
}

fn require_surface_dim(mesh: &HypersurfaceMesh) -> Result<()> {
    if mesh.param_dim() < 2 {
        return Err(Error::BadDimension(format!("rigidity checks need n >= 2, got n = {}", mesh.param_dim())));
    }
    Ok(())
}

/// Enclosing-ball check: `min |λ| > tan(R/2)` with `p₀` the ball center.
pub fn check_theorem1(mesh: &HypersurfaceMesh, cfg: &RigidityConfig) -> Result<RigidityReport> {
    require_surface_dim(mesh)?;
    let points = mesh.points();
    let (basepoint, radius, gap, notes) = match &cfg.p0 {
        Some(p0) => {
            let r = points.iter().map(|p| geodesic_distance(p, p0)).fold(0.0, f64::max);
            if r >= PI - 1e-6 {
                return Err(Error::DegenerateEnclosure { radius: r });
            }
            (p0.clone(), r, None, vec!["basepoint supplied by the caller; R is the radius about it".to_string()])
        }
        None => {
            let ball = smallest_enclosing_ball(&points, &cfg.ball)?;
            (ball.center, ball.radius, ball.certified_gap, vec![])
        }
    };
    let bound = (radius / 2.0).tan();
    assemble(
        mesh,
        cfg,
        Assembly { theorem_id: TheoremId::T1, radius, bound, basepoint, strip_width: None, ball_certified_gap: gap, notes },
    )
}

/// Normal-strip check: `min |λ| > sin L / (1 + cos R)` about a given `p₀`.
pub fn check_variation(mesh: &HypersurfaceMesh, p0: &SpherePoint, cfg: &RigidityConfig) -> Result<RigidityReport> {
    require_surface_dim(mesh)?;
    let mut radius: f64 = 0.0;
    let mut strip: f64 = 0.0;
    for (i, s) in mesh.samples.iter().enumerate() {
        let gap = 1.0 + s.point.dot(p0);
        if gap <= crate::sphere::TOL_ANTIPODAL {
            return Err(Error::AntipodalPoints { context: format!("-p0 coincides with sample {i}"), gap });
        }
        radius = radius.max(geodesic_distance(&s.point, p0));
        let eta = SpherePoint::from_unit_unchecked(s.normal.vec.clone());
        strip = strip.max(distance_to_great_sphere(&eta, p0));
    }
    let bound = strip.sin() / (1.0 + radius.cos());
    assemble(
        mesh,
        cfg,
        Assembly {
            theorem_id: TheoremId::T3,
            radius,
            bound,
            basepoint: p0.clone(),
            strip_width: Some(strip),
            ball_certified_gap: None,
            notes: vec![],
        },
    )
}

/// Thread-safe collector of reports that flags hypothesis/conclusion conflicts.
#[derive(Debug, Default)]
pub struct FalsificationMonitor {
    seen: Mutex<Vec<(String, bool)>>,
}

impl FalsificationMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, label: &str, report: &RigidityReport) {
        self.seen.lock().unwrap().push((label.to_string(), report.is_falsification()));
    }

    pub fn checked(&self) -> usize {
        self.seen.lock().unwrap().len()
    }

    pub fn events(&self) -> Vec<String> {
        self.seen.lock().unwrap().iter().filter(|(_, f)| *f).map(|(l, _)| l.clone()).collect()
    }
}

// ---------------------------------------------------------------------------
// sharpness of the tan(R/2) threshold on products of circles

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessConfig {
    pub r_grid: Vec<f64>,
    /// Sphere dimensions of the product `S^j(r) × S^k(s)`.
    pub j: usize,
    pub k: usize,
    pub resolution: usize,
    /// The weakened condition counts as satisfied when `ratio > ε + decision_tol`.
    pub decision_tol: f64,
    pub ball: BallConfig,
}

impl Default for SharpnessConfig {
    fn default() -> Self {
        SharpnessConfig {
            r_grid: vec![0.5, 0.6, 0.65, 0.7, std::f64::consts::FRAC_1_SQRT_2, 0.75, 0.8, 0.9],
            j: 1,
            k: 1,
            resolution: 96,
            decision_tol: 1e-3,
            ball: BallConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub r: f64,
    pub s: f64,
    pub min_abs_curvature: f64,
    pub analytic_min_abs_curvature: f64,
    pub r_enclosing: f64,
    pub r_empty: f64,
    pub analytic_r_enclosing: f64,
    pub analytic_r_empty: f64,
    /// `min |λ| / tan(R_enclosing / 2)`.
    pub ratio: f64,
    /// Same ratio from the empty-ball radius `R_empty`.
    pub ratio_empty: f64,
    pub ce_holds: bool,
    pub topology: String,
    pub is_sphere: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessTable {
    pub epsilon: f64,
    pub rows: Vec<SharpnessRow>,
    pub best_r: f64,
    pub max_ratio: f64,
    /// Some grid member satisfies the weakened condition.
    pub ce_satisfiable: bool,
    /// Some grid member satisfies it and is not a sphere.
    pub counterexample: bool,
    pub notes: Vec<String>,
}

/// Scans `S^j(r) × S^k(s)` for the largest `min |λ| / tan(R/2)`.
pub fn sharpness_scan(epsilon: f64, cfg: &SharpnessConfig) -> Result<SharpnessTable> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if cfg.r_grid.is_empty() {
        return Err(Error::InvalidArgument("empty r grid".into()));
    }
    let n = cfg.j + cfg.k;
    let mut rows = Vec::with_capacity(cfg.r_grid.len());
    for &r in &cfg.r_grid {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidArgument(format!("r = {r} outside (0, 1)")));
        }
        let chart = clifford_torus(r, cfg.j, cfg.k)?;
        let mesh = chart.sample_mesh(&vec![cfg.resolution; n])?;
        let points = mesh.points();
        let enc = smallest_enclosing_ball(&points, &cfg.ball)?;
        let emp = largest_empty_ball(&points, &cfg.ball)?;
        let s = (1.0 - r * r).sqrt();
        let min_abs = mesh.min_abs_curvature();
        let m = r.min(s);
        let ratio = min_abs / (enc.radius / 2.0).tan();
        let topology = chart.info().topology.clone();
        rows.push(SharpnessRow {
            r,
            s,
            min_abs_curvature: min_abs,
            analytic_min_abs_curvature: (r / s).min(s / r),
            r_enclosing: enc.radius,
            r_empty: emp.radius,
            analytic_r_enclosing: PI - m.acos(),
            analytic_r_empty: m.acos(),
            ratio,
            ratio_empty: min_abs / (emp.radius / 2.0).tan(),
            ce_holds: ratio > epsilon + cfg.decision_tol,
            is_sphere: topology == format!("S^{n}"),
            topology,
        });
    }
    let mut best = 0;
    for (i, row) in rows.iter().enumerate() {
        if row.ratio > rows[best].ratio {
            best = i;
        }
    }
    let ce_satisfiable = rows.iter().any(|r| r.ce_holds);
    let counterexample = rows.iter().any(|r| r.ce_holds && !r.is_sphere);
    let mut notes = vec![format!(
        "(ce) counted as satisfied when the ratio exceeds epsilon by more than {:e}",
        cfg.decision_tol
    )];
    if counterexample {
        notes.push("weakened bound satisfied by a non-sphere: the tan(R/2) threshold cannot be scaled down".into());
    }
    Ok(SharpnessTable {
        epsilon,
        best_r: rows[best].r,
        max_ratio: rows[best].ratio,
        rows,
        ce_satisfiable,
        counterexample,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{equator, geodesic_sphere};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sphere_mesh(rho: f64, res: usize) -> HypersurfaceMesh {
        geodesic_sphere(&SpherePoint::north_pole(4), rho, 2).unwrap().sample_mesh(&[res, res]).unwrap()
    }

    #[test]
    fn theorem1_small_sphere_holds() {
        let mesh = sphere_mesh(PI / 6.0, 32);
        let rep = check_theorem1(&mesh, &RigidityConfig::default()).unwrap();
        assert!(rep.hypothesis_holds);
        assert_abs_diff_eq!(rep.min_abs_curvature, 3f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(rep.bound, (PI / 12.0).tan(), epsilon = 1e-6);
        assert!(rep.gauss_map_nonsingular);
        assert_eq!(rep.degree.map(i64::abs), Some(1));
        assert!(!rep.falsification);
        assert_eq!(rep.inputs_digest.len(), 64);
    }

    #[test]
    fn theorem1_large_sphere_fails_with_note() {
        let mesh = sphere_mesh(5.0 * PI / 12.0, 32);
        let rep = check_theorem1(&mesh, &RigidityConfig::default()).unwrap();
        assert!(!rep.hypothesis_holds);
        assert_abs_diff_eq!(rep.bound, (5.0 * PI / 24.0).tan(), epsilon = 1e-6);
        assert!(rep.notes.iter().any(|n| n.contains("sufficient, not necessary")));
    }

    #[test]
    fn variation_matches_theorem1_on_centered_sphere() {
        let rho = PI / 6.0;
        let mesh = sphere_mesh(rho, 32);
        let p0 = SpherePoint::north_pole(4);
        let t3 = check_variation(&mesh, &p0, &RigidityConfig::default()).unwrap();
        assert_abs_diff_eq!(t3.bound, (rho / 2.0).tan(), epsilon = 1e-9);
        assert_abs_diff_eq!(t3.strip_width.unwrap(), rho, epsilon = 1e-12);
        let cfg = RigidityConfig { p0: Some(p0), ..RigidityConfig::default() };
        let t1 = check_theorem1(&mesh, &cfg).unwrap();
        assert_abs_diff_eq!(t1.bound, t3.bound, epsilon = 1e-9);
        let solved = check_theorem1(&mesh, &RigidityConfig::default()).unwrap();
        assert_abs_diff_eq!(solved.bound, t3.bound, epsilon = 1e-9);
    }

    #[test]
    fn variation_on_equator() {
        let p0 = SpherePoint::north_pole(4);
        let mesh = equator(&p0, 2).unwrap().sample_mesh(&[16, 16]).unwrap();
        let rep = check_variation(&mesh, &p0, &RigidityConfig::default()).unwrap();
        assert_abs_diff_eq!(rep.strip_width.unwrap(), PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.radius, PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.bound, 1.0, epsilon = 1e-12);
        assert!(!rep.hypothesis_holds);
        // c = 1 and A = 0, so gamma(p) = -p is a diffeomorphism anyway
        assert!(rep.gauss_map_nonsingular);
        assert_eq!(rep.degree.map(i64::abs), Some(1));
    }

    #[test]
    fn one_dimensional_rejected() {
        let mesh = geodesic_sphere(&SpherePoint::north_pole(3), 0.5, 1).unwrap().sample_mesh(&[16]).unwrap();
        assert!(matches!(check_theorem1(&mesh, &RigidityConfig::default()), Err(Error::BadDimension(_))));
    }

    #[test]
    fn monitor_collects_events() {
        let mesh = sphere_mesh(PI / 6.0, 16);
        let mut rep = check_theorem1(&mesh, &RigidityConfig::default()).unwrap();
        let mon = FalsificationMonitor::new();
        mon.record("sphere", &rep);
        rep.degree = Some(2);
        mon.record("tampered", &rep);
        assert_eq!(mon.checked(), 2);
        assert_eq!(mon.events(), vec!["tampered".to_string()]);
    }

    #[test]
    fn sharpness_rejects_bad_input() {
        assert!(sharpness_scan(0.0, &SharpnessConfig::default()).is_err());
        let cfg = SharpnessConfig { r_grid: vec![1.5], ..SharpnessConfig::default() };
        assert!(sharpness_scan(0.3, &cfg).is_err());
    }

    proptest! {
        #[test]
        fn hypothesis_is_exactly_positive_margin(k in 0.0f64..10.0, b in 0.0f64..10.0) {
            let (m, h) = hypothesis_margin(k, b);
            prop_assert_eq!(h, m > 0.0);
            prop_assert_eq!(m, k - b);
        }

        #[test]
        fn raising_curvature_with_negative_margin_keeps_failing(k in 0.0f64..5.0, b in 0.0f64..5.0, t in 0.0f64..1.0) {
            let (m0, h0) = hypothesis_margin(k, b);
            let k1 = k + t * (b - k).max(0.0);
            let (m1, h1) = hypothesis_margin(k1, b);
            if !h0 && m1 <= 0.0 {
                prop_assert!(!h1);
            }
            prop_assert!(m1 >= m0);
        }
    }
}

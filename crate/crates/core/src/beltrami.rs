//! Central projection of the upper hemisphere and the deformation
//! `C_t = B⁻¹ ∘ (x ↦ t x) ∘ B`, which squeezes a hypersurface toward the pole
//! and drives its principal curvatures up.
//!
//! `C_t(p) = D p / |D p|` with `D = diag(t, …, t, 1)`, so the deformed chart
//! gets exact derivatives from the chain rule through `G(v) = v / |v|`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ball::{smallest_enclosing_ball, BallConfig};
use crate::error::{Error, Result};
use crate::immersion::{default_resolution, unravel, ChartInfo, ChartMap, ImmersionChart};
use crate::sphere::SpherePoint;

pub const HEMISPHERE_TOL: f64 = 1e-9;

/// `(p₁/p_last, …, p_{n+1}/p_last)`.
pub fn beltrami(p: &SpherePoint) -> Result<DVector<f64>> {
    let c = p.coords();
    let dim = c.len();
    let last = c[dim - 1];
    if !(last > HEMISPHERE_TOL) {
        return Err(Error::OutsideHemisphere { last });
    }
    Ok(c.rows(0, dim - 1) / last)
}

/// `(x, 1) / √(1 + |x|²)`.
pub fn beltrami_inverse(x: &DVector<f64>) -> SpherePoint {
    let mut v = DVector::zeros(x.len() + 1);
    v.rows_mut(0, x.len()).copy_from(x);
    v[x.len()] = 1.0;
    let n = v.norm();
    SpherePoint::from_unit_unchecked(v / n)
}

/// `C_t(p)` computed through the projection, for cross-checking the closed form.
pub fn deform_point(p: &SpherePoint, t: f64) -> Result<SpherePoint> {
    Ok(beltrami_inverse(&(beltrami(p)? * t)))
}

#[derive(Debug)]
struct DeformedMap {
    inner: ImmersionChart,
    t: f64,
}

impl DeformedMap {
    fn scale(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut w = v * self.t;
        let last = v.len() - 1;
        w[last] = v[last];
        w
    }

    fn scale_mat(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut w = m * self.t;
        let last = m.nrows() - 1;
        w.row_mut(last).copy_from(&m.row(last));
        w
    }
}

/// `dG_v[a] = (a − g⟨g,a⟩)/ρ` with `ρ = |v|`, `g = v/ρ`.
fn norm_first(g: &DVector<f64>, rho: f64, a: &DVector<f64>) -> DVector<f64> {
    (a - g * g.dot(a)) / rho
}

/// `d²G_v[a, b]`.
fn norm_second(g: &DVector<f64>, rho: f64, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (ga, gb) = (g.dot(a), g.dot(b));
    let r2 = rho * rho;
    -(a * gb + b * ga + g * a.dot(b)) / r2 + g * (3.0 * ga * gb / r2)
}

impl ChartMap for DeformedMap {
    fn param_dim(&self) -> usize {
        self.inner.param_dim()
    }
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }
    fn eval(&self, u: &[f64]) -> DVector<f64> {
        let v = self.scale(self.inner.eval(u).coords());
        let n = v.norm();
        v / n
    }
    fn jacobian(&self, u: &[f64]) -> Option<DMatrix<f64>> {
        let v = self.scale(self.inner.eval(u).coords());
        let rho = v.norm();
        let g = &v / rho;
        let dj = self.scale_mat(&self.inner.jacobian(u));
        let cols: Vec<DVector<f64>> = dj.column_iter().map(|c| norm_first(&g, rho, &c.into_owned())).collect();
        Some(DMatrix::from_columns(&cols))
    }
    fn hessian(&self, u: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        let hess = self.inner.map().hessian(u)?;
        let v = self.scale(self.inner.eval(u).coords());
        let rho = v.norm();
        let g = &v / rho;
        let dj = self.scale_mat(&self.inner.jacobian(u));
        let n = self.param_dim();
        let out = (0..n)
            .map(|i| {
                let dh = self.scale_mat(&hess[i]);
                let cols: Vec<DVector<f64>> = (0..n)
                    .map(|j| {
                        let a = dj.column(i).into_owned();
                        let b = dj.column(j).into_owned();
                        norm_second(&g, rho, &a, &b) + norm_first(&g, rho, &dh.column(j).into_owned())
                    })
                    .collect();
                DMatrix::from_columns(&cols)
            })
            .collect();
        Some(out)
    }
}

/// Checks the chart stays in the open upper hemisphere on a probe grid.
pub fn check_upper_hemisphere(chart: &ImmersionChart, per_axis: usize) -> Result<()> {
    let n = chart.param_dim();
    let dom = chart.domain();
    let res = vec![per_axis.max(2); n];
    let total: usize = res.iter().product();
    for idx in 0..total {
        let m = unravel(idx, &res);
        let u: Vec<f64> = (0..n)
            .map(|i| dom.lo[i] + (dom.hi[i] - dom.lo[i]) * m[i] as f64 / (res[i] - 1) as f64)
            .collect();
        let p = chart.eval(&u);
        let last = p.coords()[p.ambient_dim() - 1];
        if !(last > HEMISPHERE_TOL) {
            return Err(Error::OutsideHemisphere { last });
        }
    }
    Ok(())
}

/// The chart `C_t ∘ f`, with the normal carried continuously from `t = 1`.
pub fn deform_chart(chart: &ImmersionChart, t: f64) -> Result<ImmersionChart> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("deformation parameter must be positive, got {t}")));
    }
    check_upper_hemisphere(chart, 17)?;
    let info = ChartInfo {
        name: format!("deformed(t={t})[{}]", chart.info().name),
        analytic_curvatures: if t == 1.0 { chart.info().analytic_curvatures.clone() } else { None },
        analytic_area: None,
        topology: chart.info().topology.clone(),
        sheets: chart.info().sheets,
        notes: chart.info().notes.clone(),
    };
    let map = DeformedMap { inner: chart.clone(), t };
    // C_t is an orientation-preserving diffeomorphism of the hemisphere
    Ok(ImmersionChart::new(Arc::new(map), chart.domain().clone(), info)?.with_orientation(chart.orientation_sign()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationRow {
    pub t: f64,
    pub min_abs_curvature: f64,
    pub max_abs_curvature: f64,
    #[serde(rename = "R_enclosing")]
    pub r_enclosing: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupStudy {
    pub chart: String,
    pub rows: Vec<DeformationRow>,
    /// `min |λ|` increases strictly at every step of the table.
    pub strictly_increasing: bool,
    /// Largest `t` from which `min |λ|` increases strictly to the end of the table.
    pub increasing_from: Option<f64>,
    /// First `t` with `min |λ| > 1`, where the enclosing-ball bound holds with `R = π/2`.
    pub exceeds_one_at: Option<f64>,
}

/// Curvature statistics of `C_t(M)` along a decreasing list of `t`.
pub fn blowup_study(chart: &ImmersionChart, t_list: &[f64], resolution: Option<&[usize]>) -> Result<BlowupStudy> {
    if t_list.is_empty() {
        return Err(Error::InvalidArgument("empty t list".into()));
    }
    if t_list.iter().any(|&t| !(t > 0.0)) || t_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("t list must be positive and strictly decreasing".into()));
    }
    let res = resolution.map(<[usize]>::to_vec).unwrap_or_else(|| default_resolution(chart.param_dim()));
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let mesh = deform_chart(chart, t)?.sample_mesh(&res)?;
        let ball = smallest_enclosing_ball(&mesh.points(), &BallConfig::default())?;
        let row = DeformationRow {
            t,
            min_abs_curvature: mesh.min_abs_curvature(),
            max_abs_curvature: mesh.max_abs_curvature(),
            r_enclosing: ball.radius,
        };
        if !(row.min_abs_curvature.is_finite() && row.max_abs_curvature.is_finite()) {
            return Err(Error::DegenerateImmersion { u: vec![], reason: format!("non-finite curvature at t = {t}") });
        }
        rows.push(row);
    }
    let inc: Vec<bool> = rows.windows(2).map(|w| w[1].min_abs_curvature > w[0].min_abs_curvature).collect();
    let strictly_increasing = inc.iter().all(|&b| b);
    let tail = inc.iter().rev().take_while(|&&b| b).count();
    let increasing_from = if rows.len() >= 2 && tail > 0 { Some(rows[rows.len() - 1 - tail].t) } else { None };
    let exceeds_one_at = rows.iter().find(|r| r.min_abs_curvature > 1.0).map(|r| r.t);
    Ok(BlowupStudy { chart: chart.info().name.clone(), rows, strictly_increasing, increasing_from, exceeds_one_at })
}

impl BlowupStudy {
    /// `t, min|λ|, max|λ|, R` rows.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,min_abs_curvature,max_abs_curvature,R_enclosing")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                crate::immersion::fmt17(r.t),
                crate::immersion::fmt17(r.min_abs_curvature),
                crate::immersion::fmt17(r.max_abs_curvature),
                crate::immersion::fmt17(r.r_enclosing)
            )?;
        }
        Ok(())
    }
}

/// Geodesic sphere of radius `rho` about a center tilted `tilt` away from the pole of `S^{n+1}`.
pub fn off_pole_sphere(rho: f64, tilt: f64, n: usize) -> Result<ImmersionChart> {
    let mut c = DVector::zeros(n + 2);
    c[0] = tilt.sin();
    c[n + 1] = tilt.cos();
    crate::gallery::geodesic_sphere(&SpherePoint::new(c)?, rho, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::clifford_torus;
    use crate::immersion::ParamBox;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn projection_examples() {
        let pole = SpherePoint::north_pole(4);
        assert_eq!(beltrami(&pole).unwrap().norm(), 0.0);
        let p = SpherePoint::from_slice(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let x = beltrami(&p).unwrap();
        assert_abs_diff_eq!((x - DVector::from_vec(vec![1.0, 0.0, 0.0])).norm(), 0.0, epsilon = 1e-15);
        let back = beltrami_inverse(&DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert_abs_diff_eq!((back.coords() - p.coords()).norm(), 0.0, epsilon = 1e-15);
        let q = SpherePoint::from_slice(&[1.0, 0.0, 0.0, -0.1]).unwrap();
        assert!(matches!(beltrami(&q), Err(Error::OutsideHemisphere { .. })));
    }

    #[test]
    fn geodesics_project_to_lines() {
        let a = SpherePoint::from_slice(&[0.3, -0.2, 0.1, 0.9]).unwrap();
        let b = SpherePoint::from_slice(&[-0.4, 0.5, 0.2, 0.7]).unwrap();
        let imgs: Vec<DVector<f64>> = [0.0, 0.37, 1.0]
            .iter()
            .map(|&s| {
                let v = crate::sphere::log_map(&a, &b).unwrap();
                let p = crate::sphere::exp_map(&crate::sphere::TangentVector::project(a.clone(), &v.vec * s));
                beltrami(&p).unwrap()
            })
            .collect();
        let d1 = &imgs[1] - &imgs[0];
        let d2 = &imgs[2] - &imgs[0];
        let cross = d1.norm() * d2.norm() - d1.dot(&d2).abs();
        assert!(cross.abs() < 1e-9, "{cross}");
    }

    #[test]
    fn closed_form_matches_composition() {
        let chart = off_pole_sphere(PI / 4.0, PI / 8.0, 2).unwrap();
        let def = deform_chart(&chart, 0.3).unwrap();
        let u = [1.0, 2.0];
        let via = deform_point(&chart.eval(&u), 0.3).unwrap();
        assert_abs_diff_eq!((def.eval(&u).coords() - via.coords()).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn chain_rule_derivatives_match_differences() {
        let chart = off_pole_sphere(PI / 4.0, PI / 8.0, 2).unwrap();
        let def = deform_chart(&chart, 0.25).unwrap();
        let map = def.map();
        let u = [0.9, 2.3];
        let j = map.jacobian(&u).unwrap();
        let h = map.hessian(&u).unwrap();
        let step = 1e-5;
        for i in 0..2 {
            let mut p = u;
            p[i] += step;
            let (fp, jp) = (map.eval(&p), map.jacobian(&p).unwrap());
            p[i] -= 2.0 * step;
            let (fm, jm) = (map.eval(&p), map.jacobian(&p).unwrap());
            assert_abs_diff_eq!(((fp - fm) / (2.0 * step) - j.column(i)).norm(), 0.0, epsilon = 1e-8);
            assert_abs_diff_eq!(((jp - jm) / (2.0 * step) - &h[i]).norm(), 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn identity_deformation_keeps_curvature() {
        let chart = off_pole_sphere(PI / 4.0, PI / 8.0, 2).unwrap();
        let def = deform_chart(&chart, 1.0).unwrap();
        for u in [[0.5, 1.0], [2.0, 4.0]] {
            let a = chart.principal_curvatures(&u).unwrap();
            let b = def.principal_curvatures(&u).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn study_single_row_and_bad_lists() {
        let chart = off_pole_sphere(PI / 4.0, PI / 8.0, 2).unwrap();
        let st = blowup_study(&chart, &[1.0], Some(&[16, 16])).unwrap();
        assert_eq!(st.rows.len(), 1);
        assert_abs_diff_eq!(st.rows[0].min_abs_curvature, 1.0, epsilon = 1e-9);
        assert!(blowup_study(&chart, &[0.5, 1.0], None).is_err());
        assert!(blowup_study(&chart, &[], None).is_err());
    }

    #[test]
    fn deformation_rejects_lower_hemisphere() {
        let chart = clifford_torus(0.6, 1, 1).unwrap();
        assert!(matches!(deform_chart(&chart, 0.5), Err(Error::OutsideHemisphere { .. })));
    }

    #[test]
    fn clifford_patch_curvature_grows() {
        let chart = clifford_torus(FRAC_1_SQRT_2, 1, 1).unwrap();
        let patch = chart
            .restricted(ParamBox {
                lo: vec![-0.4, PI / 2.0 - 0.4],
                hi: vec![0.4, PI / 2.0 + 0.4],
                periodic: vec![false, false],
            })
            .unwrap();
        let st = blowup_study(&patch, &[1.0, 0.5, 0.25], Some(&[12, 12])).unwrap();
        assert!(st.strictly_increasing, "{:?}", st.rows);
    }
}

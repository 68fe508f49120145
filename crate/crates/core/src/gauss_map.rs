//! The transport Gauss map `γ(p) = τ_p^{p₀}(η(p))` of a hypersurface into
//! the unit sphere of `T_{p₀}S^{n+1}`, its differential and covering degree.
//!
//! With `c(p) = ⟨η, p₀⟩ / (1 + ⟨p, p₀⟩)` one has the closed form
//! `γ = −c·(p + p₀) + η` and the identity `τ_{p₀}^p ∘ dγ = −(A + c·I)`, so
//! `dγ` is singular exactly where some principal curvature equals `−c`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::immersion::{CurvatureOptions, HypersurfaceMesh, ImmersionChart, SurfaceSample};
use crate::sphere::{transport_vec, unit_sphere_volume, SpherePoint, TOL_ANTIPODAL};

/// Default central-difference step for `dγ`.
pub const DEFAULT_GAMMA_STEP: f64 = 1e-4;

/// `γ` from a point, its unit normal and the basepoint.
pub fn gauss_vector(point: &DVector<f64>, normal: &DVector<f64>, p0: &DVector<f64>) -> Result<DVector<f64>> {
    let c = coefficient(point, normal, p0)?;
    Ok(normal - (point + p0) * c)
}

fn coefficient(point: &DVector<f64>, normal: &DVector<f64>, p0: &DVector<f64>) -> Result<f64> {
    let gap = 1.0 + point.dot(p0);
    if gap <= TOL_ANTIPODAL {
        return Err(Error::AntipodalPoints { context: "gauss map: -p0 lies on the hypersurface".into(), gap });
    }
    Ok(normal.dot(p0) / gap)
}

/// Settings for the degree computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeOptions {
    /// Samples with `|det(A + cI)|` below this make the map singular.
    pub singular_tol: f64,
    /// Largest accepted distance of the raw quadrature from an integer.
    pub residual_tol: f64,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        DegreeOptions { singular_tol: 1e-8, residual_tol: 0.05 }
    }
}

/// Smallest `|det(A + cI)|` over a mesh and where it occurs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonsingularScan {
    pub min_abs_det: f64,
    pub argmin: usize,
    pub nonsingular: bool,
}

/// Basepoint plus mesh; guarantees `−p₀` is off the sampled hypersurface.
#[derive(Clone, Debug)]
pub struct GaussMapContext<'m> {
    p0: SpherePoint,
    mesh: &'m HypersurfaceMesh,
}

impl<'m> GaussMapContext<'m> {
    pub fn new(p0: SpherePoint, mesh: &'m HypersurfaceMesh) -> Result<Self> {
        if p0.ambient_dim() != mesh.chart.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: mesh.chart.ambient_dim(), got: p0.ambient_dim() });
        }
        for (i, s) in mesh.samples.iter().enumerate() {
            let gap = 1.0 + s.point.dot(&p0);
            if gap <= TOL_ANTIPODAL {
                return Err(Error::AntipodalPoints { context: format!("-p0 coincides with sample {i}"), gap });
            }
        }
        Ok(GaussMapContext { p0, mesh })
    }

    pub fn p0(&self) -> &SpherePoint {
        &self.p0
    }

    pub fn mesh(&self) -> &HypersurfaceMesh {
        self.mesh
    }

    pub fn gauss_map(&self, sample: &SurfaceSample) -> Result<DVector<f64>> {
        gauss_vector(sample.point.coords(), &sample.normal.vec, self.p0.coords())
    }

    pub fn transport_coefficient(&self, sample: &SurfaceSample) -> Result<f64> {
        coefficient(sample.point.coords(), &sample.normal.vec, self.p0.coords())
    }

    /// `α = c·I` in the sample's tangent frame.
    pub fn invariant_shape(&self, sample: &SurfaceSample) -> Result<DMatrix<f64>> {
        let n = sample.shape.nrows();
        Ok(DMatrix::identity(n, n) * self.transport_coefficient(sample)?)
    }

    /// `max |τ_{p₀}^p dγ + A + cI|` with `dγ` from central differences.
    pub fn relationship_residual(&self, sample: &SurfaceSample) -> Result<f64> {
        self.relationship_residual_with(sample, DEFAULT_GAMMA_STEP)
    }

    pub fn relationship_residual_with(&self, sample: &SurfaceSample, h: f64) -> Result<f64> {
        let lhs = transported_differential(&self.mesh.chart, &sample.u, &self.p0, h)?;
        let c = self.transport_coefficient(sample)?;
        let n = sample.shape.nrows();
        let sum = lhs + &sample.shape + DMatrix::identity(n, n) * c;
        Ok(sum.abs().max())
    }

    /// `σ · det(A + cI)` where `σ` is the chart orientation sign.
    pub fn jacobian_determinant(&self, sample: &SurfaceSample) -> Result<f64> {
        let c = self.transport_coefficient(sample)?;
        Ok(self.mesh.chart.orientation_sign() * shifted_det(&sample.shape, c))
    }

    pub fn jacobian_determinants(&self) -> Result<Vec<f64>> {
        self.mesh.samples.iter().map(|s| self.jacobian_determinant(s)).collect()
    }

    pub fn nonsingular_scan(&self, tol: f64) -> Result<NonsingularScan> {
        let dets = self.jacobian_determinants()?;
        Ok(scan_dets(dets.iter().copied(), tol))
    }

    /// Raw quadrature `Σ weight · σ det(A + cI) / vol(Sⁿ)`.
    pub fn degree_raw(&self) -> Result<f64> {
        let n = self.mesh.param_dim();
        let dets = self.jacobian_determinants()?;
        let total: f64 = self.mesh.samples.iter().zip(&dets).map(|(s, d)| s.weight * d).sum();
        Ok(total / unit_sphere_volume(n))
    }

    pub fn degree(&self) -> Result<(i64, f64)> {
        self.degree_with(&DegreeOptions::default())
    }

    /// Degree divided by the chart's sheet count, rounded, with its residual.
    pub fn degree_with(&self, opts: &DegreeOptions) -> Result<(i64, f64)> {
        let scan = self.nonsingular_scan(opts.singular_tol)?;
        if !scan.nonsingular {
            return Err(Error::SingularGaussMap { index: scan.argmin, det: scan.min_abs_det });
        }
        let sheets = self.mesh.chart.info().sheets.max(1) as f64;
        round_degree(self.degree_raw()? / sheets, opts.residual_tol)
    }
}

/// `det(S + c I)` for a symmetric shape matrix.
pub fn shifted_det(shape: &DMatrix<f64>, c: f64) -> f64 {
    let n = shape.nrows();
    (shape + DMatrix::identity(n, n) * c).determinant()
}

pub(crate) fn scan_dets(dets: impl Iterator<Item = f64>, tol: f64) -> NonsingularScan {
    let mut best = NonsingularScan { min_abs_det: f64::INFINITY, argmin: 0, nonsingular: true };
    for (i, d) in dets.enumerate() {
        if d.abs() < best.min_abs_det {
            best.min_abs_det = d.abs();
            best.argmin = i;
        }
    }
    best.nonsingular = best.min_abs_det > tol;
    best
}

pub(crate) fn round_degree(raw: f64, residual_tol: f64) -> Result<(i64, f64)> {
    let deg = raw.round();
    let residual = (raw - deg).abs();
    if !(residual < residual_tol) {
        return Err(Error::NonIntegerDegree { raw, residual });
    }
    Ok((deg as i64, residual))
}

/// `τ_{p₀}^p ∘ dγ` at `u`, as a matrix in the orthonormal tangent frame.
pub fn transported_differential(chart: &ImmersionChart, u: &[f64], p0: &SpherePoint, h: f64) -> Result<DMatrix<f64>> {
    let n = chart.param_dim();
    let fr = chart.frame(u)?;
    let gamma_at = |v: &[f64]| -> Result<DVector<f64>> {
        let f = chart.frame(v)?;
        gauss_vector(f.point.coords(), &f.normal, p0.coords())
    };
    let mut images = DMatrix::zeros(n, n);
    let mut up = u.to_vec();
    for i in 0..n {
        up[i] = u[i] + h;
        let plus = gamma_at(&up)?;
        up[i] = u[i] - h;
        let minus = gamma_at(&up)?;
        up[i] = u[i];
        let dg = (plus - minus) / (2.0 * h);
        let back = transport_vec(p0.coords(), fr.point.coords(), &dg)?;
        images.set_column(i, &(fr.tangent.transpose() * back));
    }
    Ok(fr.to_frame(&images))
}

/// Signed count of `γ`-preimages of a random regular value, for 2-dimensional charts.
///
/// Debug aid only. The parameter box is triangulated on an `nodes × nodes`
/// vertex grid (boundary included, nudged off coordinate singularities) and
/// each triangle's spherical image is tested for containing the target.
/// The sign convention matches [`GaussMapContext::degree`], before division
/// by the chart's sheet count.
pub fn degree_by_preimages(chart: &ImmersionChart, p0: &SpherePoint, nodes: usize, seed: u64) -> Result<i64> {
    if chart.param_dim() != 2 {
        return Err(Error::BadDimension("preimage counting is implemented for surfaces only".into()));
    }
    let nodes = nodes.max(8);
    let dom = chart.domain();
    let nudge = 1e-6;
    let opts = CurvatureOptions { rank_tol: 1e-14, ..CurvatureOptions::default() };
    let coord = |axis: usize, k: usize| -> f64 {
        let t = k as f64 / (nodes - 1) as f64;
        let x = dom.lo[axis] + t * (dom.hi[axis] - dom.lo[axis]);
        if dom.periodic[axis] {
            x
        } else {
            x.clamp(dom.lo[axis] + nudge, dom.hi[axis] - nudge)
        }
    };
    let mut gamma = Vec::with_capacity(nodes * nodes);
    for a in 0..nodes {
        for b in 0..nodes {
            let f = chart.frame_with(&[coord(0, a), coord(1, b)], &opts)?;
            gamma.push(gauss_vector(f.point.coords(), &f.normal, p0.coords())?);
        }
    }
    let dim = p0.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = DVector::from_fn(dim, |_, _| rng.random::<f64>() - 0.5);
    y -= p0.coords() * y.dot(p0.coords());
    y /= y.norm();

    let det4 = |a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>| -> f64 {
        DMatrix::from_columns(&[p0.coords().clone(), a.clone(), b.clone(), c.clone()]).determinant()
    };
    let mut count = 0i64;
    let at = |a: usize, b: usize| &gamma[a * nodes + b];
    for a in 0..nodes - 1 {
        for b in 0..nodes - 1 {
            let tris = [
                (at(a, b), at(a + 1, b), at(a, b + 1)),
                (at(a + 1, b + 1), at(a, b + 1), at(a + 1, b)),
            ];
            for (p, q, r) in tris {
                let orient = det4(p, q, r);
                if orient == 0.0 || y.dot(&(p + q + r)) <= 0.0 {
                    continue;
                }
                let s = orient.signum();
                if det4(p, q, &y) * s > 0.0 && det4(q, r, &y) * s > 0.0 && det4(r, p, &y) * s > 0.0 {
                    count += s as i64;
                }
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{clifford_torus, equator, geodesic_sphere};
    use crate::sphere::{parallel_transport, TangentVector};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sphere_mesh(rho: f64, res: usize) -> HypersurfaceMesh {
        let c = SpherePoint::north_pole(4);
        geodesic_sphere(&c, rho, 2).unwrap().sample_mesh(&[res, res]).unwrap()
    }

    #[test]
    fn gamma_agrees_with_transport_and_is_unit() {
        let mesh = clifford_torus(0.6, 1, 1).unwrap().sample_mesh(&[16, 16]).unwrap();
        let p0 = SpherePoint::from_slice(&[0.2, -0.1, 0.4, 0.9]).unwrap();
        let ctx = GaussMapContext::new(p0.clone(), &mesh).unwrap();
        for s in mesh.samples.iter().step_by(7) {
            let g = ctx.gauss_map(s).unwrap();
            assert_abs_diff_eq!(g.norm(), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(g.dot(p0.coords()), 0.0, epsilon = 1e-10);
            let t = parallel_transport(&s.point, &p0, &s.normal).unwrap();
            assert_abs_diff_eq!((t.vec - g).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn equator_with_pole_normal_maps_to_minus_p() {
        let p0 = SpherePoint::north_pole(4);
        let p = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let g = gauss_vector(&p, p0.coords(), p0.coords()).unwrap();
        assert_abs_diff_eq!((g + &p).norm(), 0.0, epsilon = 1e-15);
        let mesh = equator(&p0, 2).unwrap().sample_mesh(&[8, 8]).unwrap();
        let ctx = GaussMapContext::new(p0, &mesh).unwrap();
        assert_abs_diff_eq!(ctx.transport_coefficient(&mesh.samples[3]).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn antipodal_basepoint_rejected() {
        let mesh = sphere_mesh(0.5, 8);
        let p0 = mesh.samples[0].point.antipode();
        assert!(matches!(GaussMapContext::new(p0, &mesh), Err(Error::AntipodalPoints { .. })));
    }

    #[test]
    fn coefficient_on_centered_sphere_is_half_angle_tangent() {
        let rho = PI / 6.0;
        let mesh = sphere_mesh(rho, 12);
        let ctx = GaussMapContext::new(SpherePoint::north_pole(4), &mesh).unwrap();
        for s in &mesh.samples {
            assert_abs_diff_eq!(ctx.transport_coefficient(s).unwrap(), (rho / 2.0).tan(), epsilon = 1e-12);
            let want = (1.0 / rho.tan() + (rho / 2.0).tan()).powi(2);
            assert_abs_diff_eq!(ctx.jacobian_determinant(s).unwrap(), want, epsilon = 1e-9);
        }
    }

    #[test]
    fn relationship_on_sphere_and_second_order() {
        let mesh = sphere_mesh(PI / 6.0, 8);
        let p0 = SpherePoint::from_slice(&[0.1, 0.2, 0.3, 0.9]).unwrap();
        let ctx = GaussMapContext::new(p0, &mesh).unwrap();
        let s = &mesh.samples[21];
        assert!(ctx.relationship_residual(s).unwrap() < 5e-5);
        let coarse = ctx.relationship_residual_with(s, 2e-2).unwrap();
        let fine = ctx.relationship_residual_with(s, 1e-2).unwrap();
        let ratio = coarse / fine;
        assert!((3.2..4.8).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn invariant_shape_matches_tilde_extension() {
        let mesh = clifford_torus(0.6, 1, 1).unwrap().sample_mesh(&[8, 8]).unwrap();
        let p0 = SpherePoint::from_slice(&[0.3, 0.1, -0.2, 0.9]).unwrap();
        let ctx = GaussMapContext::new(p0.clone(), &mesh).unwrap();
        let s = &mesh.samples[10];
        let alpha = ctx.invariant_shape(s).unwrap();
        let h = 1e-5;
        for i in 0..2 {
            let v = s.tangent.column(i).into_owned();
            let field = |t: f64| {
                let q = crate::sphere::exp_map(&TangentVector::project(s.point.clone(), &v * t));
                crate::sphere::tilde_field(&s.normal, &p0, &q).unwrap().vec
            };
            let dw = (field(h) - field(-h)) / (2.0 * h);
            let got = s.tangent.transpose() * dw;
            for j in 0..2 {
                assert_abs_diff_eq!(got[j], alpha[(j, i)], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn degree_of_sphere_and_flip() {
        let mesh = sphere_mesh(PI / 6.0, 64);
        let ctx = GaussMapContext::new(SpherePoint::north_pole(4), &mesh).unwrap();
        let (deg, res) = ctx.degree().unwrap();
        assert_eq!(deg, 1);
        assert!(res < 0.05);
        let flipped = mesh.chart.flipped().sample_mesh(&[64, 64]).unwrap();
        let ctx = GaussMapContext::new(SpherePoint::north_pole(4), &flipped).unwrap();
        assert_eq!(ctx.degree().unwrap().0, -1);
    }

    #[test]
    fn preimage_count_agrees_with_quadrature() {
        let chart = geodesic_sphere(&SpherePoint::north_pole(4), 0.6, 2).unwrap();
        let p0 = SpherePoint::from_slice(&[0.1, 0.0, 0.2, 1.0]).unwrap();
        assert_eq!(degree_by_preimages(&chart, &p0, 40, 3).unwrap(), 1);
        assert_eq!(degree_by_preimages(&chart.flipped(), &p0, 40, 3).unwrap(), -1);
    }

    #[test]
    fn singular_map_reported() {
        // totally geodesic with c = 0 everywhere: A + cI vanishes identically
        let mesh = equator(&SpherePoint::north_pole(4), 2).unwrap().sample_mesh(&[8, 8]).unwrap();
        let p0 = SpherePoint::from_slice(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let ctx = GaussMapContext::new(p0, &mesh).unwrap();
        let scan = ctx.nonsingular_scan(1e-8).unwrap();
        assert!(!scan.nonsingular);
        assert!(matches!(ctx.degree(), Err(Error::SingularGaussMap { .. })));
    }
}

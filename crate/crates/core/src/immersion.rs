//! Parametrized hypersurfaces of `S^{n+1}` and their extrinsic curvature.
//!
//! A chart maps a rectangular parameter box in `R^n` into the sphere. The
//! unit normal is the generalized cross product of the position and the
//! tangent columns, so that `det[f | ∂₁f | … | ∂ₙf | η] > 0`, multiplied by
//! the chart's orientation sign. The shape operator `A = −dη` is expressed in
//! the orthonormal frame obtained from a thin QR factorization of the
//! Jacobian, either from exact second derivatives or by central differences
//! of the normal.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{SpherePoint, TangentVector};

/// A smooth map from a parameter box into the unit sphere.
///
/// Implementors supply the position; derivatives are optional and fall back
/// to central differences when absent.
pub trait ChartMap: Send + Sync + fmt::Debug {
    fn param_dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn eval(&self, u: &[f64]) -> DVector<f64>;

    /// `(n+2) × n` matrix of first partials.
    fn jacobian(&self, _u: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// Second partials: entry `i` is the `(n+2) × n` matrix with columns `∂ᵢ∂ⱼf`.
    fn hessian(&self, _u: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        None
    }
}

/// Rectangular parameter domain with per-axis periodicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub periodic: Vec<bool>,
}

impl ParamBox {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn scale(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a).abs()).fold(0.0, f64::max).max(1.0)
    }
}

/// Descriptive metadata attached to a chart by its generator.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ChartInfo {
    pub name: String,
    /// Closed-form principal curvatures (ascending) w.r.t. the chart's normal, when constant.
    pub analytic_curvatures: Option<Vec<f64>>,
    /// Closed-form area of the image, counted with the chart's sheet multiplicity.
    pub analytic_area: Option<f64>,
    pub topology: String,
    /// How many times the parameter domain covers the image.
    pub sheets: usize,
    pub notes: Vec<String>,
}

/// Numerical settings for frames and curvature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureOptions {
    /// Smallest admissible singular value of the Jacobian.
    pub rank_tol: f64,
    /// Step for differencing the normal when no exact Hessian is available.
    pub h_normal: f64,
    /// Largest tolerated asymmetry of the raw shape matrix.
    pub asym_tol: f64,
    /// Ignore exact Hessians and always difference the normal.
    pub force_finite_difference: bool,
}

impl Default for CurvatureOptions {
    fn default() -> Self {
        CurvatureOptions { rank_tol: 1e-7, h_normal: 1e-5, asym_tol: 1e-4, force_finite_difference: false }
    }
}

/// Position, tangent frame and normal at one parameter value.
#[derive(Clone, Debug)]
pub struct LocalFrame {
    pub u: Vec<f64>,
    pub point: SpherePoint,
    pub jacobian: DMatrix<f64>,
    /// Orthonormal tangent basis `e = J R⁻¹`, as columns.
    pub tangent: DMatrix<f64>,
    /// Upper-triangular factor with `J = tangent · r`.
    pub r: DMatrix<f64>,
    pub normal: DVector<f64>,
    /// `√det g` for the induced metric in parameter coordinates.
    pub area_element: f64,
}

impl LocalFrame {
    /// Converts a matrix whose column `i` is the image of `∂ᵢ` (in `e`-coordinates)
    /// into the matrix of the same map in the orthonormal frame.
    pub fn to_frame(&self, coord_images: &DMatrix<f64>) -> DMatrix<f64> {
        let rinv = self.r.clone().try_inverse().expect("frame factor is invertible");
        coord_images * rinv
    }
}

/// A parametrized closed hypersurface with orientation and metadata.
#[derive(Clone)]
pub struct ImmersionChart {
    map: Arc<dyn ChartMap>,
    domain: ParamBox,
    orientation: f64,
    info: ChartInfo,
}

impl fmt::Debug for ImmersionChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImmersionChart")
            .field("name", &self.info.name)
            .field("param_dim", &self.param_dim())
            .field("ambient_dim", &self.ambient_dim())
            .field("orientation", &self.orientation)
            .finish()
    }
}

impl ImmersionChart {
    pub fn new(map: Arc<dyn ChartMap>, domain: ParamBox, info: ChartInfo) -> Result<Self> {
        let n = map.param_dim();
        if domain.lo.len() != n || domain.hi.len() != n || domain.periodic.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: domain.dim() });
        }
        if map.ambient_dim() != n + 2 {
            return Err(Error::BadDimension(format!(
                "hypersurface chart with {n} parameters must land in R^{}, got R^{}",
                n + 2,
                map.ambient_dim()
            )));
        }
        Ok(ImmersionChart { map, domain, orientation: 1.0, info })
    }

    pub fn param_dim(&self) -> usize {
        self.map.param_dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.map.ambient_dim()
    }

    pub fn domain(&self) -> &ParamBox {
        &self.domain
    }

    pub fn info(&self) -> &ChartInfo {
        &self.info
    }

    pub fn info_mut(&mut self) -> &mut ChartInfo {
        &mut self.info
    }

    pub fn map(&self) -> &Arc<dyn ChartMap> {
        &self.map
    }

    /// `+1` or `−1`: multiplies the determinant-convention normal.
    pub fn orientation_sign(&self) -> f64 {
        self.orientation
    }

    pub fn with_orientation(mut self, sign: f64) -> Self {
        self.orientation = if sign < 0.0 { -1.0 } else { 1.0 };
        self
    }

    /// Reverses the normal; principal curvatures change sign.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        out.orientation = -self.orientation;
        if let Some(k) = &out.info.analytic_curvatures {
            let mut k: Vec<f64> = k.iter().map(|x| -x).collect();
            k.sort_by(f64::total_cmp);
            out.info.analytic_curvatures = Some(k);
        }
        out
    }

    /// Same map on a smaller box (for open patches and studies).
    pub fn restricted(&self, domain: ParamBox) -> Result<Self> {
        let mut out = ImmersionChart::new(self.map.clone(), domain, self.info.clone())?;
        out.orientation = self.orientation;
        Ok(out)
    }

    /// Chooses the orientation sign so that the normal at `u` points along `desired`.
    pub fn oriented_toward(mut self, u: &[f64], desired: &DVector<f64>) -> Result<Self> {
        self.orientation = 1.0;
        let eta = self.unit_normal(u)?;
        if eta.vec.dot(desired) < 0.0 {
            self.orientation = -1.0;
        }
        Ok(self)
    }

    pub fn eval(&self, u: &[f64]) -> SpherePoint {
        SpherePoint::from_unit_unchecked(normalized(self.map.eval(u)))
    }

    /// Exact Jacobian if the map supplies one, otherwise central differences.
    pub fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        if let Some(j) = self.map.jacobian(u) {
            return j;
        }
        let n = self.param_dim();
        let h = f64::EPSILON.cbrt() * self.domain.scale();
        let mut j = DMatrix::zeros(self.ambient_dim(), n);
        let mut up = u.to_vec();
        for i in 0..n {
            up[i] = u[i] + h;
            let plus = self.eval(&up).into_coords();
            up[i] = u[i] - h;
            let minus = self.eval(&up).into_coords();
            up[i] = u[i];
            j.set_column(i, &((plus - minus) / (2.0 * h)));
        }
        j
    }

    pub fn has_exact_hessian(&self) -> bool {
        let mid = self.midpoint();
        self.map.hessian(&mid).is_some()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.domain.lo.iter().zip(&self.domain.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Frame at `u` with the default rank tolerance.
    pub fn frame(&self, u: &[f64]) -> Result<LocalFrame> {
        self.frame_with(u, &CurvatureOptions::default())
    }

    pub fn frame_with(&self, u: &[f64], opts: &CurvatureOptions) -> Result<LocalFrame> {
        let n = self.param_dim();
        if u.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: u.len() });
        }
        let point = self.eval(u);
        let jac = self.jacobian(u);
        // remove any radial drift so the columns are exactly tangent
        let f = point.coords();
        let mut jt = jac.clone();
        for mut col in jt.column_iter_mut() {
            let radial = col.dot(f);
            col -= f * radial;
        }
        let sv = jt.clone().svd(false, false).singular_values;
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smin > opts.rank_tol) {
            return Err(Error::DegenerateImmersion {
                u: u.to_vec(),
                reason: format!("smallest singular value of the jacobian is {smin:e}"),
            });
        }
        let normal = cross_normal(f, &jt) * self.orientation;
        let qr = jt.clone().qr();
        let tangent = qr.q();
        let r = qr.r();
        let area_element = r.diagonal().iter().map(|x| x.abs()).product::<f64>();
        Ok(LocalFrame { u: u.to_vec(), point, jacobian: jt, tangent, r, normal, area_element })
    }

    /// Unit normal at `u` (determinant convention times orientation sign).
    pub fn unit_normal(&self, u: &[f64]) -> Result<TangentVector> {
        let fr = self.frame(u)?;
        Ok(TangentVector { base: fr.point, vec: fr.normal })
    }

    /// Shape operator in the orthonormal tangent frame, with the raw asymmetry.
    pub fn shape_operator_with(&self, u: &[f64], opts: &CurvatureOptions) -> Result<(LocalFrame, DMatrix<f64>, f64)> {
        let fr = self.frame_with(u, opts)?;
        let n = self.param_dim();
        let exact = if opts.force_finite_difference { None } else { self.map.hessian(u) };
        let raw = match exact {
            Some(hess) => {
                // h_ij = <η, ∂ᵢ∂ⱼ f>, S = R^{-T} H R^{-1}
                let h = DMatrix::from_fn(n, n, |i, j| hess[i].column(j).dot(&fr.normal));
                let rinv = fr.r.clone().try_inverse().expect("frame factor is invertible");
                rinv.transpose() * h * rinv
            }
            None => {
                let hn = opts.h_normal;
                let mut images = DMatrix::zeros(n, n);
                let mut up = u.to_vec();
                for i in 0..n {
                    up[i] = u[i] + hn;
                    let plus = self.frame_with(&up, opts)?.normal;
                    up[i] = u[i] - hn;
                    let minus = self.frame_with(&up, opts)?.normal;
                    up[i] = u[i];
                    let d_eta = (plus - minus) / (2.0 * hn);
                    // A(∂ᵢ) = −dη(∂ᵢ), expressed in e-coordinates
                    let col = -(fr.tangent.transpose() * d_eta);
                    images.set_column(i, &col);
                }
                fr.to_frame(&images)
            }
        };
        let asym = (&raw - raw.transpose()).abs().max();
        if asym > opts.asym_tol {
            return Err(Error::DegenerateImmersion {
                u: u.to_vec(),
                reason: format!("shape operator asymmetry {asym:e} exceeds {:e}", opts.asym_tol),
            });
        }
        let sym = (&raw + raw.transpose()) * 0.5;
        Ok((fr, sym, asym))
    }

    pub fn shape_operator(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.shape_operator_with(u, &CurvatureOptions::default())?.1)
    }

    pub fn principal_curvatures(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(sorted_eigenvalues(&self.shape_operator(u)?))
    }

    pub fn gauss_kronecker(&self, u: &[f64]) -> Result<f64> {
        Ok(self.principal_curvatures(u)?.iter().product())
    }

    /// Compares `eval` at identified boundary points of periodic axes.
    pub fn check_seams(&self, probes: usize) -> Result<f64> {
        let n = self.param_dim();
        let mut worst: f64 = 0.0;
        for axis in 0..n {
            if !self.domain.periodic[axis] {
                continue;
            }
            for k in 0..probes.max(1) {
                let mut u: Vec<f64> = (0..n)
                    .map(|i| {
                        let t = (k as f64 + 0.5) / probes.max(1) as f64;
                        let t = (t + 0.37 * i as f64).fract();
                        self.domain.lo[i] + t * (self.domain.hi[i] - self.domain.lo[i])
                    })
                    .collect();
                u[axis] = self.domain.lo[axis];
                let a = self.eval(&u).into_coords();
                u[axis] = self.domain.hi[axis];
                let b = self.eval(&u).into_coords();
                let gap = (a - b).norm();
                if gap > 1e-8 {
                    return Err(Error::SeamMismatch { axis, gap });
                }
                worst = worst.max(gap);
            }
        }
        Ok(worst)
    }

    /// Samples the chart on a cell-centred grid (`resolution[i]` cells per axis).
    pub fn sample_mesh(&self, resolution: &[usize]) -> Result<HypersurfaceMesh> {
        self.sample_mesh_with(resolution, &CurvatureOptions::default())
    }

    pub fn sample_mesh_with(&self, resolution: &[usize], opts: &CurvatureOptions) -> Result<HypersurfaceMesh> {
        let n = self.param_dim();
        if resolution.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: resolution.len() });
        }
        if let Some(&bad) = resolution.iter().find(|&&r| r < 8) {
            return Err(Error::InvalidArgument(format!("resolution {bad} below minimum 8 per axis")));
        }
        self.check_seams(8)?;
        let cell: Vec<f64> = (0..n)
            .map(|i| (self.domain.hi[i] - self.domain.lo[i]) / resolution[i] as f64)
            .collect();
        let cell_volume: f64 = cell.iter().product::<f64>().abs();
        let total: usize = resolution.iter().product();

        let samples: Vec<SurfaceSample> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let multi = unravel(idx, resolution);
                let u: Vec<f64> =
                    (0..n).map(|i| self.domain.lo[i] + (multi[i] as f64 + 0.5) * cell[i]).collect();
                let (fr, shape, asym) = self.shape_operator_with(&u, opts)?;
                let principal = sorted_eigenvalues(&shape);
                Ok(SurfaceSample {
                    u,
                    point: fr.point.clone(),
                    normal: TangentVector { base: fr.point.clone(), vec: fr.normal.clone() },
                    tangent: fr.tangent.clone(),
                    shape,
                    asymmetry: asym,
                    principal_curvatures: principal,
                    area_element: fr.area_element,
                    weight: fr.area_element * cell_volume,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let total_area = samples.iter().map(|s| s.weight).sum();
        Ok(HypersurfaceMesh { samples, chart: self.clone(), resolution: resolution.to_vec(), total_area })
    }
}

fn normalized(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    v / n
}

/// Generalized cross product of `f` and the columns of `jac`, normalized.
///
/// Component `k` is the cofactor of the `k`-th entry in the last column of
/// `[f | J | ·]`, so `det[f | J | η] = |η_raw|² > 0`.
fn cross_normal(f: &DVector<f64>, jac: &DMatrix<f64>) -> DVector<f64> {
    let dim = f.len();
    let n = jac.ncols();
    let mut m = DMatrix::zeros(dim, n + 1);
    m.set_column(0, f);
    for i in 0..n {
        m.set_column(i + 1, &jac.column(i));
    }
    let mut eta = DVector::zeros(dim);
    for k in 0..dim {
        let minor = m.clone().remove_row(k);
        let sign = if (k + n + 1) % 2 == 0 { 1.0 } else { -1.0 };
        eta[k] = sign * minor.determinant();
    }
    normalized(eta)
}

pub(crate) fn sorted_eigenvalues(sym: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = sym.clone().symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub(crate) fn unravel(mut idx: usize, res: &[usize]) -> Vec<usize> {
    let mut out = vec![0; res.len()];
    for i in (0..res.len()).rev() {
        out[i] = idx % res[i];
        idx /= res[i];
    }
    out
}

pub(crate) fn ravel(multi: &[usize], res: &[usize]) -> usize {
    multi.iter().zip(res).fold(0, |acc, (m, r)| acc * r + m)
}

/// Curvature data at one grid point.
#[derive(Clone, Debug)]
pub struct SurfaceSample {
    pub u: Vec<f64>,
    pub point: SpherePoint,
    pub normal: TangentVector,
    /// Orthonormal tangent frame (columns) in which `shape` is written.
    pub tangent: DMatrix<f64>,
    pub shape: DMatrix<f64>,
    pub asymmetry: f64,
    pub principal_curvatures: Vec<f64>,
    pub area_element: f64,
    pub weight: f64,
}

impl SurfaceSample {
    pub fn min_abs_curvature(&self) -> f64 {
        self.principal_curvatures.iter().map(|k| k.abs()).fold(f64::INFINITY, f64::min)
    }
}

/// Quadrature mesh of a closed hypersurface.
#[derive(Clone, Debug)]
pub struct HypersurfaceMesh {
    pub samples: Vec<SurfaceSample>,
    pub chart: ImmersionChart,
    pub resolution: Vec<usize>,
    pub total_area: f64,
}

impl HypersurfaceMesh {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn param_dim(&self) -> usize {
        self.chart.param_dim()
    }

    pub fn points(&self) -> Vec<SpherePoint> {
        self.samples.iter().map(|s| s.point.clone()).collect()
    }

    pub fn min_abs_curvature(&self) -> f64 {
        self.samples.iter().map(|s| s.min_abs_curvature()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_curvature(&self) -> f64 {
        self.samples
            .iter()
            .flat_map(|s| s.principal_curvatures.iter().map(|k| k.abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.samples.iter().map(|s| s.asymmetry).fold(0.0, f64::max)
    }

    /// Grid-neighbour pairs `(i, j)`, wrapping periodic axes.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let res = &self.resolution;
        let periodic = &self.chart.domain().periodic;
        let mut out = Vec::new();
        for idx in 0..self.samples.len() {
            let multi = unravel(idx, res);
            for axis in 0..res.len() {
                let mut m = multi.clone();
                if m[axis] + 1 < res[axis] {
                    m[axis] += 1;
                } else if periodic[axis] {
                    m[axis] = 0;
                } else {
                    continue;
                }
                out.push((idx, ravel(&m, res)));
            }
        }
        out
    }

    /// Number of adjacent sample pairs whose normals have non-positive inner product.
    pub fn orientation_defects(&self) -> usize {
        self.adjacent_pairs()
            .into_iter()
            .filter(|&(a, b)| self.samples[a].normal.vec.dot(&self.samples[b].normal.vec) <= 0.0)
            .count()
    }

    /// Largest distance between grid-adjacent samples.
    pub fn max_spacing(&self) -> f64 {
        self.adjacent_pairs()
            .into_iter()
            .map(|(a, b)| crate::sphere::geodesic_distance(&self.samples[a].point, &self.samples[b].point))
            .fold(0.0, f64::max)
    }

    /// CSV dump: `u*, x*, eta*, k*, weight`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.param_dim();
        let dim = self.chart.ambient_dim();
        let mut header: Vec<String> = Vec::new();
        header.extend((0..n).map(|i| format!("u{i}")));
        header.extend((0..dim).map(|i| format!("x{i}")));
        header.extend((0..dim).map(|i| format!("eta{i}")));
        header.extend((0..n).map(|i| format!("k{i}")));
        header.push("weight".into());
        writeln!(w, "{}", header.join(","))?;
        for s in &self.samples {
            let mut row: Vec<String> = Vec::with_capacity(header.len());
            row.extend(s.u.iter().map(|x| fmt17(*x)));
            row.extend(s.point.coords().iter().map(|x| fmt17(*x)));
            row.extend(s.normal.vec.iter().map(|x| fmt17(*x)));
            row.extend(s.principal_curvatures.iter().map(|x| fmt17(*x)));
            row.push(fmt17(s.weight));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Default per-axis resolution for an `n`-dimensional chart.
pub fn default_resolution(n: usize) -> Vec<usize> {
    let per_axis = match n {
        0..=2 => 64,
        3 => 24,
        _ => 12,
    };
    vec![per_axis; n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    /// Round 2-sphere of radius ρ about e₃ in S³, position only (no derivatives).
    #[derive(Debug)]
    struct BareCap {
        rho: f64,
    }

    impl ChartMap for BareCap {
        fn param_dim(&self) -> usize {
            2
        }
        fn ambient_dim(&self) -> usize {
            4
        }
        fn eval(&self, u: &[f64]) -> DVector<f64> {
            let (t, p) = (u[0], u[1]);
            let s = self.rho.sin();
            DVector::from_vec(vec![s * t.sin() * p.cos(), s * t.sin() * p.sin(), s * t.cos(), self.rho.cos()])
        }
    }

    fn bare(rho: f64) -> ImmersionChart {
        ImmersionChart::new(
            Arc::new(BareCap { rho }),
            ParamBox { lo: vec![0.0, 0.0], hi: vec![PI, 2.0 * PI], periodic: vec![false, true] },
            ChartInfo { name: "bare".into(), sheets: 1, ..Default::default() },
        )
        .unwrap()
    }

    #[test]
    fn finite_difference_fallback_recovers_round_sphere() {
        let rho = 0.7;
        let c = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]);
        let chart = bare(rho).oriented_toward(&[1.0, 0.3], &c).unwrap();
        let k = chart.principal_curvatures(&[1.0, 0.3]).unwrap();
        for v in k {
            assert_abs_diff_eq!(v, 1.0 / rho.tan(), epsilon = 1e-5);
        }
        let eta = chart.unit_normal(&[1.0, 0.3]).unwrap();
        assert_abs_diff_eq!(eta.vec.dot(&c), rho.sin(), epsilon = 1e-9);
    }

    #[test]
    fn normal_satisfies_determinant_convention() {
        let chart = bare(0.9);
        let u = [0.8, 2.0];
        let fr = chart.frame(&u).unwrap();
        let mut m = DMatrix::zeros(4, 4);
        m.set_column(0, fr.point.coords());
        m.set_column(1, &fr.jacobian.column(0));
        m.set_column(2, &fr.jacobian.column(1));
        m.set_column(3, &fr.normal);
        assert!(m.determinant() > 0.0);
        assert_abs_diff_eq!(fr.normal.dot(fr.point.coords()), 0.0, epsilon = 1e-12);
        for i in 0..2 {
            assert_abs_diff_eq!(fr.normal.dot(&fr.jacobian.column(i)), 0.0, epsilon = 1e-10);
        }
        let flipped = chart.flipped();
        let fr2 = flipped.frame(&u).unwrap();
        assert_abs_diff_eq!((fr2.normal + fr.normal).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_point_is_reported() {
        let chart = bare(0.9);
        match chart.frame(&[0.0, 1.0]) {
            Err(Error::DegenerateImmersion { u, .. }) => assert_eq!(u, vec![0.0, 1.0]),
            other => panic!("expected DegenerateImmersion, got {other:?}"),
        }
    }

    #[test]
    fn resolution_floor_enforced() {
        assert!(matches!(bare(0.5).sample_mesh(&[4, 16]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn seam_mismatch_detected() {
        let chart = bare(0.5)
            .restricted(ParamBox { lo: vec![0.0, 0.0], hi: vec![PI, 6.0], periodic: vec![false, true] })
            .unwrap();
        assert!(matches!(chart.sample_mesh(&[8, 8]), Err(Error::SeamMismatch { axis: 1, .. })));
    }

    #[test]
    fn csv_header_and_rows() {
        let mesh = bare(0.5).sample_mesh(&[8, 8]).unwrap();
        let mut buf = Vec::new();
        mesh.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "u0,u1,x0,x1,x2,x3,eta0,eta1,eta2,eta3,k0,k1,weight");
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), 13);
        let first: f64 = row.split(',').next().unwrap().parse().unwrap();
        assert_abs_diff_eq!(first, PI / 16.0, epsilon = 1e-16);
        assert_eq!(text.lines().count(), 65);
    }
}

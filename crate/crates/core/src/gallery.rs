//! Closed-form charts with known curvature: geodesic spheres, products of
//! spheres `S^j(r) × S^k(s)` and Cartan's isoparametric family in `S^4`.
//!
//! Every chart here supplies exact first and second derivatives.
//!
//! Coordinates on the space `V` of traceless symmetric 3×3 matrices use the
//! basis, orthonormal for `⟨a, b⟩ = tr(ab)/6`,
//!
//! ```text
//! E0 = diag(2, −1, −1)       E1 = diag(0, √3, −√3)
//! E2 = √3 (e01 + e10)        E3 = √3 (e02 + e20)      E4 = √3 (e12 + e21)
//! ```
//!
//! so that the unit sphere of `V` is `{tr(m²) = 6}`.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::error::{Error, Result};
use crate::immersion::{ChartInfo, ChartMap, ImmersionChart, ParamBox};
use crate::sphere::{complement_basis, unit_sphere_volume, SpherePoint};

// ---------------------------------------------------------------------------
// hyperspherical coordinates

/// Standard angular chart of `S^m ⊂ R^{m+1}`.
///
/// `x_k = sin φ₀ ⋯ sin φ_{k−1} · cos φ_k` for `k < m` and
/// `x_m = sin φ₀ ⋯ sin φ_{m−1}`; the last angle is periodic.
#[derive(Clone, Copy, Debug)]
pub struct AngularSphere {
    pub m: usize,
}

#[derive(Clone, Copy)]
enum Factor {
    One,
    Sin,
    Cos,
}

impl Factor {
    fn eval(self, x: f64, order: usize) -> f64 {
        match (self, order % 4) {
            (Factor::One, 0) => 1.0,
            (Factor::One, _) => 0.0,
            (Factor::Sin, 0) => x.sin(),
            (Factor::Sin, 1) => x.cos(),
            (Factor::Sin, 2) => -x.sin(),
            (Factor::Sin, _) => -x.cos(),
            (Factor::Cos, 0) => x.cos(),
            (Factor::Cos, 1) => -x.sin(),
            (Factor::Cos, 2) => -x.cos(),
            (Factor::Cos, _) => x.sin(),
        }
    }
}

impl AngularSphere {
    fn factor(&self, component: usize, angle: usize) -> Factor {
        use std::cmp::Ordering::*;
        match angle.cmp(&component) {
            Less => Factor::Sin,
            Equal if component < self.m => Factor::Cos,
            _ => Factor::One,
        }
    }

    pub fn domain(&self) -> ParamBox {
        let m = self.m;
        let mut hi = vec![PI; m];
        hi[m - 1] = 2.0 * PI;
        let mut periodic = vec![false; m];
        periodic[m - 1] = true;
        ParamBox { lo: vec![0.0; m], hi, periodic }
    }

    /// Value, Jacobian and Hessian (`hess[i]` has columns `∂ᵢ∂ⱼx`).
    pub fn derivatives(&self, phi: &[f64]) -> (DVector<f64>, DMatrix<f64>, Vec<DMatrix<f64>>) {
        let m = self.m;
        let dim = m + 1;
        let mut x = DVector::zeros(dim);
        let mut jac = DMatrix::zeros(dim, m);
        let mut hess = vec![DMatrix::zeros(dim, m); m];
        for k in 0..dim {
            let fac: Vec<Factor> = (0..m).map(|a| self.factor(k, a)).collect();
            let prod = |orders: &[usize]| -> f64 { (0..m).map(|a| fac[a].eval(phi[a], orders[a])).product() };
            let mut ord = vec![0usize; m];
            x[k] = prod(&ord);
            for i in 0..m {
                ord[i] += 1;
                jac[(k, i)] = prod(&ord);
                for j in 0..m {
                    ord[j] += 1;
                    hess[i][(k, j)] = prod(&ord);
                    ord[j] -= 1;
                }
                ord[i] -= 1;
            }
        }
        (x, jac, hess)
    }
}

// ---------------------------------------------------------------------------
// geodesic spheres

#[derive(Debug)]
struct GeodesicSphereMap {
    center: DVector<f64>,
    basis: DMatrix<f64>,
    rho: f64,
    param: AngularSphere,
}

impl ChartMap for GeodesicSphereMap {
    fn param_dim(&self) -> usize {
        self.param.m
    }
    fn ambient_dim(&self) -> usize {
        self.center.len()
    }
    fn eval(&self, u: &[f64]) -> DVector<f64> {
        let (x, _, _) = self.param.derivatives(u);
        &self.center * self.rho.cos() + &self.basis * x * self.rho.sin()
    }
    fn jacobian(&self, u: &[f64]) -> Option<DMatrix<f64>> {
        let (_, j, _) = self.param.derivatives(u);
        Some(&self.basis * j * self.rho.sin())
    }
    fn hessian(&self, u: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        let (_, _, h) = self.param.derivatives(u);
        Some(h.into_iter().map(|hi| &self.basis * hi * self.rho.sin()).collect())
    }
}

/// Geodesic sphere `{exp_c(ρ·u)}` of dimension `n`, normal pointing toward the center.
///
/// The parametrization handedness is chosen so the orientation sign is `+1`;
/// principal curvatures are all `cot ρ`.
pub fn geodesic_sphere(center: &SpherePoint, rho: f64, n: usize) -> Result<ImmersionChart> {
    if n < 1 {
        return Err(Error::BadDimension("geodesic sphere needs n >= 1".into()));
    }
    if center.ambient_dim() != n + 2 {
        return Err(Error::DimensionMismatch { expected: n + 2, got: center.ambient_dim() });
    }
    if !(rho > 0.0 && rho < PI) {
        return Err(Error::InvalidArgument(format!("radius {rho} outside (0, pi)")));
    }
    let c = center.coords().clone();
    let cols = complement_basis(&c);
    let mut basis = DMatrix::from_columns(&cols);
    let param = AngularSphere { m: n };
    let domain = param.domain();
    let info = ChartInfo {
        name: format!("sphere:rho={rho},n={n}"),
        analytic_curvatures: Some(vec![1.0 / rho.tan(); n]),
        analytic_area: Some(unit_sphere_volume(n) * rho.sin().powi(n as i32)),
        topology: format!("S^{n}"),
        sheets: 1,
        notes: vec![],
    };
    let probe: Vec<f64> = domain.lo.iter().zip(&domain.hi).map(|(a, b)| a + 0.37 * (b - a)).collect();
    for attempt in 0..2 {
        let map = GeodesicSphereMap { center: c.clone(), basis: basis.clone(), rho, param };
        let (x, _, _) = param.derivatives(&probe);
        let inward = &c * rho.sin() - &basis * x * rho.cos();
        let chart = ImmersionChart::new(Arc::new(map), domain.clone(), info.clone())?.oriented_toward(&probe, &inward)?;
        if chart.orientation_sign() > 0.0 || attempt == 1 {
            return Ok(chart);
        }
        // mirror the parametrization so the determinant normal is already inward
        let neg = -basis.column(0);
        basis.set_column(0, &neg);
    }
    unreachable!()
}

/// Totally geodesic equator `{⟨x, p⟩ = 0}` with normal `p`.
pub fn equator(pole: &SpherePoint, n: usize) -> Result<ImmersionChart> {
    let mut chart = geodesic_sphere(pole, std::f64::consts::FRAC_PI_2, n)?;
    chart.info_mut().name = format!("equator:n={n}");
    chart.info_mut().analytic_curvatures = Some(vec![0.0; n]);
    Ok(chart)
}

// ---------------------------------------------------------------------------
// products of spheres

#[derive(Debug)]
struct CliffordMap {
    r: f64,
    s: f64,
    first: AngularSphere,
    second: AngularSphere,
}

impl CliffordMap {
    fn split<'a>(&self, u: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        u.split_at(self.first.m)
    }
}

impl ChartMap for CliffordMap {
    fn param_dim(&self) -> usize {
        self.first.m + self.second.m
    }
    fn ambient_dim(&self) -> usize {
        self.first.m + self.second.m + 2
    }
    fn eval(&self, u: &[f64]) -> DVector<f64> {
        let (a, b) = self.split(u);
        let (x, _, _) = self.first.derivatives(a);
        let (y, _, _) = self.second.derivatives(b);
        let mut out = DVector::zeros(self.ambient_dim());
        out.rows_mut(0, x.len()).copy_from(&(x * self.r));
        out.rows_mut(self.first.m + 1, y.len()).copy_from(&(y * self.s));
        out
    }
    fn jacobian(&self, u: &[f64]) -> Option<DMatrix<f64>> {
        let (a, b) = self.split(u);
        let (_, jx, _) = self.first.derivatives(a);
        let (_, jy, _) = self.second.derivatives(b);
        let (j, k) = (self.first.m, self.second.m);
        let mut out = DMatrix::zeros(j + k + 2, j + k);
        out.view_mut((0, 0), (j + 1, j)).copy_from(&(jx * self.r));
        out.view_mut((j + 1, j), (k + 1, k)).copy_from(&(jy * self.s));
        Some(out)
    }
    fn hessian(&self, u: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        let (a, b) = self.split(u);
        let (_, _, hx) = self.first.derivatives(a);
        let (_, _, hy) = self.second.derivatives(b);
        let (j, k) = (self.first.m, self.second.m);
        let mut out = vec![DMatrix::zeros(j + k + 2, j + k); j + k];
        for (i, h) in hx.iter().enumerate() {
            out[i].view_mut((0, 0), (j + 1, j)).copy_from(&(h * self.r));
        }
        for (i, h) in hy.iter().enumerate() {
            out[j + i].view_mut((j + 1, j), (k + 1, k)).copy_from(&(h * self.s));
        }
        Some(out)
    }
}

/// `S^j(r) × S^k(s) ⊂ S^{j+k+1}`, `s = √(1 − r²)`, with normal `(s·x, −r·y)`.
///
/// Principal curvatures: `−s/r` with multiplicity `j`, `r/s` with multiplicity `k`.
pub fn clifford_torus(r: f64, j: usize, k: usize) -> Result<ImmersionChart> {
    if j < 1 || k < 1 {
        return Err(Error::BadDimension(format!("clifford torus needs j, k >= 1 (got j={j}, k={k})")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!("clifford radius {r} outside (0, 1)")));
    }
    let s = (1.0 - r * r).sqrt();
    let first = AngularSphere { m: j };
    let second = AngularSphere { m: k };
    let (d1, d2) = (first.domain(), second.domain());
    let domain = ParamBox {
        lo: [d1.lo, d2.lo].concat(),
        hi: [d1.hi, d2.hi].concat(),
        periodic: [d1.periodic, d2.periodic].concat(),
    };
    let mut curv = vec![-s / r; j];
    curv.extend(vec![r / s; k]);
    curv.sort_by(f64::total_cmp);
    let info = ChartInfo {
        name: format!("clifford:r={r},j={j},k={k}"),
        analytic_curvatures: Some(curv),
        analytic_area: Some(unit_sphere_volume(j) * r.powi(j as i32) * unit_sphere_volume(k) * s.powi(k as i32)),
        topology: format!("S^{j} x S^{k}"),
        sheets: 1,
        notes: vec![],
    };
    let map = CliffordMap { r, s, first, second };
    let probe: Vec<f64> = domain.lo.iter().zip(&domain.hi).map(|(a, b)| a + 0.37 * (b - a)).collect();
    let p = map.eval(&probe);
    let mut desired = DVector::zeros(j + k + 2);
    for i in 0..=j {
        desired[i] = s * p[i] / r;
    }
    for i in j + 1..j + k + 2 {
        desired[i] = -r * p[i] / s;
    }
    ImmersionChart::new(Arc::new(map), domain, info)?.oriented_toward(&probe, &desired)
}

// ---------------------------------------------------------------------------
// Cartan's isoparametric family

/// A traceless symmetric 3×3 matrix stored by its five coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracelessSym3 {
    pub coords: [f64; 5],
}

fn v_basis() -> [Matrix3<f64>; 5] {
    let r3 = 3f64.sqrt();
    [
        Matrix3::new(2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0),
        Matrix3::new(0.0, 0.0, 0.0, 0.0, r3, 0.0, 0.0, 0.0, -r3),
        Matrix3::new(0.0, r3, 0.0, r3, 0.0, 0.0, 0.0, 0.0, 0.0),
        Matrix3::new(0.0, 0.0, r3, 0.0, 0.0, 0.0, r3, 0.0, 0.0),
        Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, r3, 0.0, r3, 0.0),
    ]
}

/// Inner product `tr(ab)/6` on `V`.
fn v_inner(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    (a * b).trace() / 6.0
}

impl TracelessSym3 {
    pub fn basis() -> [Matrix3<f64>; 5] {
        v_basis()
    }

    /// Rejects matrices that are not symmetric or not traceless (1e-12).
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        if (m - m.transpose()).abs().max() > 1e-12 {
            return Err(Error::InvalidArgument("matrix is not symmetric".into()));
        }
        if m.trace().abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("matrix trace {} is not zero", m.trace())));
        }
        Ok(Self::project(m))
    }

    fn project(m: &Matrix3<f64>) -> Self {
        let b = v_basis();
        let mut coords = [0.0; 5];
        for (c, e) in coords.iter_mut().zip(b.iter()) {
            *c = v_inner(m, e);
        }
        TracelessSym3 { coords }
    }

    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        let coords: [f64; 5] = coords
            .try_into()
            .map_err(|_| Error::DimensionMismatch { expected: 5, got: coords.len() })?;
        Ok(TracelessSym3 { coords })
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        v_basis().iter().zip(self.coords.iter()).fold(Matrix3::zeros(), |acc, (e, c)| acc + e * *c)
    }
}

/// `(Q, C) = (tr(m²)/6, det(m)/2)`.
pub fn cartan_invariants(m: &TracelessSym3) -> (f64, f64) {
    let mat = m.to_matrix();
    (v_inner(&mat, &mat), mat.determinant() / 2.0)
}

fn rot_z(a: f64, order: usize) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    match order {
        0 => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        1 => Matrix3::new(-s, -c, 0.0, c, -s, 0.0, 0.0, 0.0, 0.0),
        _ => Matrix3::new(-c, s, 0.0, -s, -c, 0.0, 0.0, 0.0, 0.0),
    }
}

fn rot_y(b: f64, order: usize) -> Matrix3<f64> {
    let (s, c) = b.sin_cos();
    match order {
        0 => Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        1 => Matrix3::new(-s, 0.0, c, 0.0, 0.0, 0.0, -c, 0.0, -s),
        _ => Matrix3::new(-c, 0.0, -s, 0.0, 0.0, 0.0, s, 0.0, -c),
    }
}

#[derive(Debug)]
struct CartanMap {
    diag: Matrix3<f64>,
}

impl CartanMap {
    /// `∂^orders (Rz(a) Ry(b) Rz(c))`.
    fn rotation(u: &[f64], orders: [usize; 3]) -> Matrix3<f64> {
        rot_z(u[0], orders[0]) * rot_y(u[1], orders[1]) * rot_z(u[2], orders[2])
    }

    fn coords_of(m: &Matrix3<f64>) -> DVector<f64> {
        DVector::from_column_slice(&TracelessSym3::project(m).coords)
    }

    fn unit(i: usize) -> [usize; 3] {
        let mut o = [0; 3];
        o[i] = 1;
        o
    }
}

impl ChartMap for CartanMap {
    fn param_dim(&self) -> usize {
        3
    }
    fn ambient_dim(&self) -> usize {
        5
    }
    fn eval(&self, u: &[f64]) -> DVector<f64> {
        let a = Self::rotation(u, [0; 3]);
        Self::coords_of(&(a * self.diag * a.transpose()))
    }
    fn jacobian(&self, u: &[f64]) -> Option<DMatrix<f64>> {
        let a = Self::rotation(u, [0; 3]);
        let mut j = DMatrix::zeros(5, 3);
        for i in 0..3 {
            let ai = Self::rotation(u, Self::unit(i));
            let dm = ai * self.diag * a.transpose() + a * self.diag * ai.transpose();
            j.set_column(i, &Self::coords_of(&dm));
        }
        Some(j)
    }
    fn hessian(&self, u: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        let a = Self::rotation(u, [0; 3]);
        let first: Vec<Matrix3<f64>> = (0..3).map(|i| Self::rotation(u, Self::unit(i))).collect();
        let mut out = vec![DMatrix::zeros(5, 3); 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut ord = [0usize; 3];
                ord[i] += 1;
                ord[j] += 1;
                let aij = Self::rotation(u, ord);
                let d = self.diag;
                let m = aij * d * a.transpose()
                    + first[i] * d * first[j].transpose()
                    + first[j] * d * first[i].transpose()
                    + a * d * aij.transpose();
                out[i].set_column(j, &Self::coords_of(&m));
            }
        }
        Some(out)
    }
}

/// Margin kept from the Euler-angle singularities `b ∈ {0, π}`.
pub const CARTAN_EULER_MARGIN: f64 = 1e-3;

/// The diagonal representative `diag(2cos θ, 2cos(θ+2π/3), 2cos(θ−2π/3))`.
pub fn cartan_diagonal(theta: f64) -> Matrix3<f64> {
    let t = 2.0 * FRAC_PI_3;
    Matrix3::from_diagonal(&nalgebra::Vector3::new(
        2.0 * theta.cos(),
        2.0 * (theta + t).cos(),
        2.0 * (theta - t).cos(),
    ))
}

/// The `SO(3)` orbit `{C = cos 3θ}` in the unit sphere of `V`, `θ ∈ (0, π/6)`.
///
/// Parametrized by ZYZ Euler angles, which cover the orbit four times
/// (the stabilizer of the diagonal representative has order 4). The normal
/// points toward decreasing `θ`; with that choice the principal curvatures
/// are `cot(θ − π/3) < 0 < cot(θ + π/3) < cot θ`.
pub fn cartan_hypersurface(theta: f64) -> Result<ImmersionChart> {
    if !(theta > 0.0 && theta < FRAC_PI_6) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    let diag = cartan_diagonal(theta);
    let domain = ParamBox {
        lo: vec![0.0, CARTAN_EULER_MARGIN, 0.0],
        hi: vec![2.0 * PI, PI - CARTAN_EULER_MARGIN, 2.0 * PI],
        periodic: vec![true, false, true],
    };
    let mut curv = vec![(theta - FRAC_PI_3).tan().recip(), theta.tan().recip(), (theta + FRAC_PI_3).tan().recip()];
    curv.sort_by(f64::total_cmp);
    let info = ChartInfo {
        name: format!("cartan:theta={theta}"),
        analytic_curvatures: Some(curv),
        analytic_area: None,
        topology: "SO(3)/D, D = Z2+Z2; 8-fold covered by S^3".into(),
        sheets: 4,
        notes: vec![
            "euler chart covers the orbit 4 times".into(),
            "normal oriented toward decreasing theta (focal set theta = 0); curvature signs: one negative, two positive".into(),
        ],
    };
    let map = CartanMap { diag };
    let probe = [1.1, 1.3, 0.7];
    let a = CartanMap::rotation(&probe, [0; 3]);
    let t = 2.0 * FRAC_PI_3;
    let d_theta = Matrix3::from_diagonal(&nalgebra::Vector3::new(
        -2.0 * theta.sin(),
        -2.0 * (theta + t).sin(),
        -2.0 * (theta - t).sin(),
    ));
    let desired = -CartanMap::coords_of(&(a * d_theta * a.transpose()));
    ImmersionChart::new(Arc::new(map), domain, info)?.oriented_toward(&probe, &desired)
}

// ---------------------------------------------------------------------------
// isometric images

#[derive(Debug)]
struct TransformedMap {
    inner: Arc<dyn ChartMap>,
    matrix: DMatrix<f64>,
}

impl ChartMap for TransformedMap {
    fn param_dim(&self) -> usize {
        self.inner.param_dim()
    }
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }
    fn eval(&self, u: &[f64]) -> DVector<f64> {
        &self.matrix * self.inner.eval(u)
    }
    fn jacobian(&self, u: &[f64]) -> Option<DMatrix<f64>> {
        self.inner.jacobian(u).map(|j| &self.matrix * j)
    }
    fn hessian(&self, u: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        self.inner.hessian(u).map(|h| h.into_iter().map(|m| &self.matrix * m).collect())
    }
}

/// Image of `chart` under an orthogonal matrix, with normal `g·η`.
pub fn transformed(chart: &ImmersionChart, g: &DMatrix<f64>, label: &str) -> Result<ImmersionChart> {
    let map = TransformedMap { inner: chart.map().clone(), matrix: g.clone() };
    let mut info = chart.info().clone();
    info.name = format!("{label}({})", info.name);
    // det[g f | g J | g η] = det(g) det[f | J | η]
    let sign = chart.orientation_sign() * g.determinant().signum();
    Ok(ImmersionChart::new(Arc::new(map), chart.domain().clone(), info)?.with_orientation(sign))
}

// ---------------------------------------------------------------------------
// textual chart specs

/// Parses an angle given in radians or as a multiple/fraction of pi
/// (`0.5236`, `pi/6`, `3pi/4`, `2*pi/3`, `-pi`).
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase().replace(' ', "");
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let bad = || Error::Config(format!("cannot parse angle '{text}'"));
    let Some(pos) = t.find("pi") else {
        // plain fraction like 1/3
        let (a, b) = t.split_once('/').ok_or_else(bad)?;
        return Ok(a.parse::<f64>().map_err(|_| bad())? / b.parse::<f64>().map_err(|_| bad())?);
    };
    let before = t[..pos].trim_end_matches('*');
    let after = &t[pos + 2..];
    let mult = match before {
        "" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().map_err(|_| bad())?,
    };
    let div = if after.is_empty() {
        1.0
    } else {
        after.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?
    };
    Ok(mult * PI / div)
}

/// Parsed form of `kind:key=value,...`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartSpec {
    pub kind: String,
    pub params: Vec<(String, String)>,
}

impl ChartSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut params = Vec::new();
        for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("chart parameter '{item}' is not key=value")))?;
            params.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(ChartSpec { kind: kind.trim().to_ascii_lowercase(), params })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub(crate) fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.params {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown parameter '{k}' for chart kind '{}'", self.kind)));
            }
        }
        Ok(())
    }

    pub fn angle(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(parse_angle).transpose()
    }

    pub fn int(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| v.parse::<usize>().map_err(|_| Error::Config(format!("'{key}' must be an integer, got '{v}'"))))
            .transpose()
    }

    pub fn real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                if let Some(rest) = v.strip_prefix("1/sqrt") {
                    let x: f64 = rest.trim_matches(|c| c == '(' || c == ')').parse().map_err(|_| {
                        Error::Config(format!("cannot parse '{v}'"))
                    })?;
                    return Ok(1.0 / x.sqrt());
                }
                v.parse::<f64>().or_else(|_| parse_angle(v))
            })
            .transpose()
    }

    /// Optional `center=x0;x1;...` list.
    pub fn point(&self, key: &str, dim: usize) -> Result<Option<SpherePoint>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                let coords = parse_coords(v)?;
                if coords.len() != dim {
                    return Err(Error::Config(format!("'{key}' needs {dim} coordinates, got {}", coords.len())));
                }
                Ok(Some(SpherePoint::from_slice(&coords)?))
            }
        }
    }
}

/// Parses `a;b;c` or `a b c` (also accepts `[a,b,c]` when not nested in a chart spec).
pub fn parse_coords(text: &str) -> Result<Vec<f64>> {
    text.trim_matches(|c| c == '[' || c == ']')
        .split(|c| c == ';' || c == ',' || c == ' ')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad coordinate '{s}'"))))
        .collect()
}

/// Builds a gallery chart from a spec string such as `clifford:r=0.6,j=1,k=2`.
///
/// Kinds: `sphere` (`rho`, `n`, `center`), `equator` (`n`), `clifford`
/// (`r`, `j`, `k`), `cartan` (`theta`). Sphere centers default to the north pole.
pub fn chart_from_spec(text: &str) -> Result<ImmersionChart> {
    let spec = ChartSpec::parse(text)?;
    let mut chart = match spec.kind.as_str() {
        "sphere" => {
            spec.check_keys(&["rho", "n", "center"])?;
            let n = spec.int("n")?.unwrap_or(2);
            let rho = spec.angle("rho")?.ok_or_else(|| Error::Config("sphere needs rho".into()))?;
            let center = spec.point("center", n + 2)?.unwrap_or_else(|| SpherePoint::north_pole(n + 2));
            geodesic_sphere(&center, rho, n)?
        }
        "equator" => {
            spec.check_keys(&["n"])?;
            let n = spec.int("n")?.unwrap_or(2);
            equator(&SpherePoint::north_pole(n + 2), n)?
        }
        "clifford" => {
            spec.check_keys(&["r", "j", "k"])?;
            let r = spec.real("r")?.ok_or_else(|| Error::Config("clifford needs r".into()))?;
            clifford_torus(r, spec.int("j")?.unwrap_or(1), spec.int("k")?.unwrap_or(1))?
        }
        "cartan" => {
            spec.check_keys(&["theta"])?;
            let theta = spec.angle("theta")?.ok_or_else(|| Error::Config("cartan needs theta".into()))?;
            cartan_hypersurface(theta)?
        }
        "off-pole" => {
            spec.check_keys(&["rho", "tilt", "n"])?;
            let rho = spec.angle("rho")?.unwrap_or(PI / 4.0);
            let tilt = spec.angle("tilt")?.unwrap_or(PI / 8.0);
            crate::beltrami::off_pole_sphere(rho, tilt, spec.int("n")?.unwrap_or(2))?
        }
        other => return Err(Error::Config(format!("unknown chart kind '{other}'"))),
    };
    chart.info_mut().name = text.to_string();
    Ok(chart)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn angular_sphere_derivatives_match_differences() {
        let param = AngularSphere { m: 3 };
        let phi = [0.7, 1.9, 4.0];
        let (x, j, h) = param.derivatives(&phi);
        assert_abs_diff_eq!(x.norm(), 1.0, epsilon = 1e-15);
        let step = 1e-5;
        for i in 0..3 {
            let mut p = phi;
            p[i] += step;
            let (xp, jp, _) = param.derivatives(&p);
            p[i] -= 2.0 * step;
            let (xm, jm, _) = param.derivatives(&p);
            let dj = (xp - xm) / (2.0 * step);
            assert_abs_diff_eq!((dj - j.column(i)).norm(), 0.0, epsilon = 1e-9);
            let dh = (jp - jm) / (2.0 * step);
            assert_abs_diff_eq!((dh - &h[i]).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn cartan_hessian_matches_differences() {
        let map = CartanMap { diag: cartan_diagonal(0.2) };
        let u = [0.4, 1.2, 2.5];
        let j = map.jacobian(&u).unwrap();
        let h = map.hessian(&u).unwrap();
        let step = 1e-5;
        for i in 0..3 {
            let mut p = u;
            p[i] += step;
            let (fp, jp) = (map.eval(&p), map.jacobian(&p).unwrap());
            p[i] -= 2.0 * step;
            let (fm, jm) = (map.eval(&p), map.jacobian(&p).unwrap());
            assert_abs_diff_eq!(((fp - fm) / (2.0 * step) - j.column(i)).norm(), 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(((jp - jm) / (2.0 * step) - &h[i]).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn basis_of_v_is_orthonormal_and_traceless() {
        let b = TracelessSym3::basis();
        for (i, bi) in b.iter().enumerate() {
            assert_abs_diff_eq!(bi.trace(), 0.0, epsilon = 1e-15);
            for (j, bj) in b.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(v_inner(bi, bj), want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cartan_invariant_examples() {
        let m = TracelessSym3::from_matrix(&Matrix3::from_diagonal(&nalgebra::Vector3::new(2.0, -1.0, -1.0))).unwrap();
        let (q, c) = cartan_invariants(&m);
        assert_abs_diff_eq!(q, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-14);

        let theta = PI / 12.0;
        let m = TracelessSym3::from_matrix(&cartan_diagonal(theta)).unwrap();
        let (q, c) = cartan_invariants(&m);
        assert_abs_diff_eq!(q, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c, (PI / 4.0).cos(), epsilon = 1e-14);
    }

    #[test]
    fn cartan_invariants_are_conjugation_invariant() {
        let m = TracelessSym3::from_coords(&[0.3, -0.5, 0.2, 0.7, -0.1]).unwrap();
        let a = CartanMap::rotation(&[0.3, 1.1, -2.0], [0; 3]);
        let conj = TracelessSym3::from_matrix(&(a * m.to_matrix() * a.transpose())).unwrap();
        let (q0, c0) = cartan_invariants(&m);
        let (q1, c1) = cartan_invariants(&conj);
        assert_abs_diff_eq!(q0, q1, epsilon = 1e-13);
        assert_abs_diff_eq!(c0, c1, epsilon = 1e-13);
    }

    #[test]
    fn traceless_rejects_bad_input() {
        assert!(TracelessSym3::from_matrix(&Matrix3::identity()).is_err());
        let mut m = Matrix3::zeros();
        m[(0, 1)] = 1.0;
        assert!(TracelessSym3::from_matrix(&m).is_err());
    }

    #[test]
    fn theta_range_enforced() {
        assert!(matches!(cartan_hypersurface(0.0), Err(Error::ThetaOutOfRange(_))));
        assert!(matches!(cartan_hypersurface(FRAC_PI_6), Err(Error::ThetaOutOfRange(_))));
    }

    #[test]
    fn clifford_dimension_errors() {
        assert!(matches!(clifford_torus(0.5, 0, 2), Err(Error::BadDimension(_))));
        assert!(clifford_torus(1.2, 1, 1).is_err());
    }

    #[test]
    fn parse_angles() {
        assert_abs_diff_eq!(parse_angle("pi/6").unwrap(), PI / 6.0);
        assert_abs_diff_eq!(parse_angle("3pi/4").unwrap(), 0.75 * PI);
        assert_abs_diff_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_abs_diff_eq!(parse_angle("-pi").unwrap(), -PI);
        assert_abs_diff_eq!(parse_angle("0.5236").unwrap(), 0.5236);
        assert!(parse_angle("pie").is_err());
    }

    #[test]
    fn spec_parsing() {
        let c = chart_from_spec("clifford:r=0.6,j=1,k=2").unwrap();
        assert_eq!(c.param_dim(), 3);
        assert_eq!(c.ambient_dim(), 5);
        let c = chart_from_spec("sphere:rho=pi/6").unwrap();
        assert_eq!(c.param_dim(), 2);
        let c = chart_from_spec("clifford:r=1/sqrt2").unwrap();
        assert_abs_diff_eq!(c.info().analytic_curvatures.as_ref().unwrap()[1], 1.0, epsilon = 1e-14);
        assert!(matches!(chart_from_spec("sphere:rho=1,q=2"), Err(Error::Config(_))));
        assert!(matches!(chart_from_spec("torus:r=1"), Err(Error::Config(_))));
    }

    fn assert_curvatures(chart: &ImmersionChart, probes: &[Vec<f64>], tol: f64) {
        let want = chart.info().analytic_curvatures.clone().unwrap();
        for u in probes {
            let got = chart.principal_curvatures(u).unwrap();
            for (g, w) in got.iter().zip(&want) {
                assert_abs_diff_eq!(g, w, epsilon = tol);
            }
        }
    }

    #[test]
    fn geodesic_sphere_curvature_and_orientation() {
        for n in [1, 2, 3] {
            let c = SpherePoint::from_slice(&vec![0.3; n + 2]).unwrap();
            let chart = geodesic_sphere(&c, 0.4, n).unwrap();
            assert_eq!(chart.orientation_sign(), 1.0);
            let probes = vec![vec![0.8; n], vec![2.1; n]];
            assert_curvatures(&chart, &probes, 1e-10);
            let u = &probes[0];
            let p = chart.eval(u);
            assert_abs_diff_eq!(crate::sphere::geodesic_distance(&p, &c), 0.4, epsilon = 1e-12);
            // normal points toward the center
            assert!(chart.unit_normal(u).unwrap().vec.dot(c.coords()) > 0.0);
        }
    }

    #[test]
    fn clifford_curvatures() {
        let chart = clifford_torus(0.6, 1, 2).unwrap();
        assert_curvatures(&chart, &[vec![0.3, 1.0, 2.0], vec![5.0, 2.5, 4.0]], 1e-10);
        let want = chart.info().analytic_curvatures.clone().unwrap();
        assert_abs_diff_eq!(want[0], -0.8 / 0.6, epsilon = 1e-14);
        assert_abs_diff_eq!(want[2], 0.6 / 0.8, epsilon = 1e-14);
    }

    #[test]
    fn cartan_curvatures_at_pi_over_12() {
        let chart = cartan_hypersurface(PI / 12.0).unwrap();
        let want = chart.info().analytic_curvatures.clone().unwrap();
        let r3 = 3f64.sqrt();
        assert_abs_diff_eq!(want[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(want[1], 2.0 - r3, epsilon = 1e-12);
        assert_abs_diff_eq!(want[2], 2.0 + r3, epsilon = 1e-12);
        assert_curvatures(&chart, &[vec![1.1, 1.3, 0.7], vec![4.0, 0.5, 5.5], vec![0.1, 2.9, 3.3]], 1e-9);
        let m = TracelessSym3::from_coords(chart.eval(&[2.0, 1.0, 0.5]).coords().as_slice()).unwrap();
        let (q, c) = cartan_invariants(&m);
        assert_abs_diff_eq!(q, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(c, (PI / 4.0).cos(), epsilon = 1e-13);
    }

    #[test]
    fn transformed_chart_keeps_curvature() {
        let c = SpherePoint::north_pole(4);
        let chart = geodesic_sphere(&c, 0.5, 2).unwrap();
        let g = -DMatrix::<f64>::identity(4, 4);
        let img = transformed(&chart, &g, "neg").unwrap();
        let u = [0.9, 1.7];
        let k = img.principal_curvatures(&u).unwrap();
        assert_abs_diff_eq!(k[0], 1.0 / 0.5f64.tan(), epsilon = 1e-10);
        let n0 = chart.unit_normal(&u).unwrap().vec;
        let n1 = img.unit_normal(&u).unwrap().vec;
        assert_abs_diff_eq!((n1 + n0).norm(), 0.0, epsilon = 1e-12);
    }
}

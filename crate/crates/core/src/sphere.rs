//! Closed-form geometry of the unit sphere `S^{n+1} ⊂ R^{n+2}`.
//!
//! Points are unit vectors and tangent vectors carry their base point. The
//! dimension is a runtime quantity: every value knows its ambient length.
//! Parallel transport uses the closed formula along the minimizing great
//! circle,
//!
//! ```text
//! τ_p^q(v) = v − ⟨v, q⟩ / (1 + ⟨p, q⟩) · (p + q),
//! ```
//!
//! which is undefined for antipodal pairs; those are rejected with
//! [`Error::AntipodalPoints`] once `1 + ⟨p, q⟩` drops below [`TOL_ANTIPODAL`].

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cutoff on `1 + ⟨p, q⟩` below which two points count as antipodal.
pub const TOL_ANTIPODAL: f64 = 1e-9;

/// A point of the unit sphere, stored as a unit vector of the ambient space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpherePoint(DVector<f64>);

impl SpherePoint {
    /// Normalizes `coords` onto the sphere. Zero or non-finite input is rejected.
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        let norm = coords.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidPoint(format!("cannot normalize vector of norm {norm}")));
        }
        if coords.len() < 2 {
            return Err(Error::BadDimension("sphere points need at least 2 coordinates".into()));
        }
        Ok(SpherePoint(coords / norm))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    /// The `i`-th standard basis vector of `R^dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        SpherePoint(v)
    }

    /// The last standard basis vector, used as the north pole.
    pub fn north_pole(dim: usize) -> Self {
        Self::basis(dim, dim - 1)
    }

    pub(crate) fn from_unit_unchecked(v: DVector<f64>) -> Self {
        SpherePoint(v)
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.0
    }

    /// Length of the coordinate vector (`n + 2` for `S^{n+1}`).
    pub fn ambient_dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint(-&self.0)
    }
}

impl TryFrom<Vec<f64>> for SpherePoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SpherePoint::new(DVector::from_vec(v))
    }
}

impl From<SpherePoint> for Vec<f64> {
    fn from(p: SpherePoint) -> Self {
        p.0.as_slice().to_vec()
    }
}

/// A vector tangent to the sphere at `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: SpherePoint,
    pub vec: DVector<f64>,
}

impl TangentVector {
    /// Checks tangency (relative 1e-8) and removes the residual normal component.
    pub fn new(base: SpherePoint, vec: DVector<f64>) -> Result<Self> {
        check_dim(base.ambient_dim(), vec.len())?;
        let radial = vec.dot(base.coords());
        if radial.abs() > 1e-8 * vec.norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "vector is not tangent: <v, p> = {radial:e}"
            )));
        }
        Ok(Self::project(base, vec))
    }

    /// Orthogonal projection of an arbitrary ambient vector onto `T_base`.
    pub fn project(base: SpherePoint, vec: DVector<f64>) -> Self {
        let radial = vec.dot(base.coords());
        let vec = vec - base.coords() * radial;
        TangentVector { base, vec }
    }

    pub fn zero(base: SpherePoint) -> Self {
        let dim = base.ambient_dim();
        TangentVector { base, vec: DVector::zeros(dim) }
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

fn check_not_antipodal(p: &SpherePoint, q: &SpherePoint, context: &str) -> Result<f64> {
    check_dim(p.ambient_dim(), q.ambient_dim())?;
    let gap = 1.0 + p.dot(q);
    if gap <= TOL_ANTIPODAL {
        return Err(Error::AntipodalPoints { context: context.to_string(), gap });
    }
    Ok(gap)
}

/// Great-circle distance in `[0, π]`.
///
/// Evaluated as `atan2(|q − ⟨p,q⟩p|, ⟨p,q⟩)`, which stays accurate for
/// nearly coincident and nearly antipodal pairs where `acos` loses digits.
pub fn geodesic_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    if p.coords() == q.coords() {
        return 0.0;
    }
    let c = p.dot(q);
    let s = (q.coords() - p.coords() * c).norm();
    s.atan2(c)
}

/// Parallel transport of `v ∈ T_p` to `T_q` along the minimizing geodesic.
pub fn parallel_transport(p: &SpherePoint, q: &SpherePoint, v: &TangentVector) -> Result<TangentVector> {
    check_dim(p.ambient_dim(), v.vec.len())?;
    let gap = check_not_antipodal(p, q, "parallel transport p -> q")?;
    let coef = v.vec.dot(q.coords()) / gap;
    let vec = &v.vec - (p.coords() + q.coords()) * coef;
    Ok(TangentVector { base: q.clone(), vec })
}

/// Raw-vector form of [`parallel_transport`], for callers holding bare coordinates.
pub(crate) fn transport_vec(p: &DVector<f64>, q: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let gap = 1.0 + p.dot(q);
    if gap <= TOL_ANTIPODAL {
        return Err(Error::AntipodalPoints { context: "parallel transport p -> q".into(), gap });
    }
    Ok(v - (p + q) * (v.dot(q) / gap))
}

/// Riemannian exponential: `cos|v|·p + sin|v|·v/|v|`.
pub fn exp_map(v: &TangentVector) -> SpherePoint {
    let t = v.vec.norm();
    if t < 1e-300 {
        return v.base.clone();
    }
    let out = v.base.coords() * t.cos() + &v.vec * (t.sin() / t);
    // renormalize against rounding
    SpherePoint::new(out).unwrap_or_else(|_| v.base.clone())
}

/// Inverse of [`exp_map`] on the complement of the antipode.
pub fn log_map(p: &SpherePoint, q: &SpherePoint) -> Result<TangentVector> {
    check_not_antipodal(p, q, "log map")?;
    let c = p.dot(q);
    let w = q.coords() - p.coords() * c;
    let s = w.norm();
    if s < 1e-300 {
        return Ok(TangentVector::zero(p.clone()));
    }
    let d = s.atan2(c);
    Ok(TangentVector { base: p.clone(), vec: w * (d / s) })
}

/// The extension `ṽ(q) = τ_{p₀}^q ∘ τ_p^{p₀}(v)` of a tangent vector at `p`.
pub fn tilde_field(v: &TangentVector, basepoint: &SpherePoint, q: &SpherePoint) -> Result<TangentVector> {
    let at_base = parallel_transport(&v.base, basepoint, v).map_err(|e| rename(e, "tilde field leg p -> p0"))?;
    parallel_transport(basepoint, q, &at_base).map_err(|e| rename(e, "tilde field leg p0 -> q"))
}

fn rename(e: Error, context: &str) -> Error {
    match e {
        Error::AntipodalPoints { gap, .. } => Error::AntipodalPoints { context: context.into(), gap },
        other => other,
    }
}

/// Distance from `x` to the great sphere `{y : ⟨y, p₀⟩ = 0}`, i.e. `asin|⟨x, p₀⟩|`.
pub fn distance_to_great_sphere(x: &SpherePoint, basepoint: &SpherePoint) -> f64 {
    x.dot(basepoint).abs().min(1.0).asin()
}

/// Orthonormal basis of the orthogonal complement of `p` (columns, `dim − 1` of them).
pub fn complement_basis(p: &DVector<f64>) -> Vec<DVector<f64>> {
    let dim = p.len();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(dim - 1);
    // Gram–Schmidt over the standard basis, skipping the axis most aligned with p.
    let skip = p.iamax();
    for i in 0..dim {
        if i == skip {
            continue;
        }
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        for _ in 0..2 {
            v -= p * p.dot(&v);
            for b in &out {
                v -= b * b.dot(&v);
            }
        }
        let n = v.norm();
        out.push(v / n);
    }
    out
}

/// Volume of the unit sphere `S^n ⊂ R^{n+1}`.
pub fn unit_sphere_volume(n: usize) -> f64 {
    use std::f64::consts::PI;
    // vol(S^n) = 2π/(n−1) · vol(S^{n−2})
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * unit_sphere_volume(n - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

    fn e(dim: usize, i: usize) -> SpherePoint {
        SpherePoint::basis(dim, i)
    }

    #[test]
    fn distance_basic_cases() {
        let p = SpherePoint::from_slice(&[0.3, -0.2, 0.9, 0.1]).unwrap();
        assert_abs_diff_eq!(geodesic_distance(&p, &p), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(geodesic_distance(&e(3, 0), &e(3, 1)), FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(geodesic_distance(&p, &p.antipode()), PI, epsilon = 1e-15);
    }

    #[test]
    fn construction_normalizes() {
        let p = SpherePoint::from_slice(&[3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(p.coords().norm(), 1.0, epsilon = 1e-15);
        assert!(SpherePoint::from_slice(&[0.0, 0.0, 0.0]).is_err());
        assert!(SpherePoint::from_slice(&[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn transport_identity_and_quarter_turn() {
        let p = SpherePoint::from_slice(&[0.1, 0.7, -0.2, 0.3]).unwrap();
        let v = TangentVector::project(p.clone(), DVector::from_vec(vec![1.0, -0.5, 0.2, 0.4]));
        let same = parallel_transport(&p, &p, &v).unwrap();
        assert_abs_diff_eq!((same.vec - &v.vec).norm(), 0.0, epsilon = 1e-15);

        // e1 -> e2 carries e2 to -e1
        let v = TangentVector::new(e(3, 0), e(3, 1).into_coords()).unwrap();
        let out = parallel_transport(&e(3, 0), &e(3, 1), &v).unwrap();
        assert_abs_diff_eq!((out.vec - (-e(3, 0).into_coords())).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn transport_rejects_antipodes() {
        let p = e(4, 2);
        let v = TangentVector::zero(p.clone());
        match parallel_transport(&p, &p.antipode(), &v) {
            Err(Error::AntipodalPoints { .. }) => {}
            other => panic!("expected AntipodalPoints, got {other:?}"),
        }
    }

    #[test]
    fn exp_examples() {
        let p = e(3, 0);
        assert_eq!(exp_map(&TangentVector::zero(p.clone())), p);
        let v = TangentVector::new(p.clone(), e(3, 1).into_coords() * FRAC_PI_2).unwrap();
        assert_abs_diff_eq!((exp_map(&v).into_coords() - e(3, 1).into_coords()).norm(), 0.0, epsilon = 1e-15);
        let v = TangentVector::new(p.clone(), e(3, 2).into_coords() * PI).unwrap();
        assert_abs_diff_eq!((exp_map(&v).into_coords() + p.coords()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn log_examples() {
        let p = e(3, 0);
        assert_abs_diff_eq!(log_map(&p, &p).unwrap().norm(), 0.0);
        let l = log_map(&e(3, 0), &e(3, 1)).unwrap();
        assert_abs_diff_eq!((l.vec - e(3, 1).into_coords() * FRAC_PI_2).norm(), 0.0, epsilon = 1e-15);
        assert!(log_map(&p, &p.antipode()).is_err());
    }

    #[test]
    fn tilde_field_at_basepoint_is_identity() {
        let p = SpherePoint::from_slice(&[0.2, 0.1, 0.9, -0.3]).unwrap();
        let v = TangentVector::project(p.clone(), DVector::from_vec(vec![0.5, 1.0, 0.0, 0.3]));
        let out = tilde_field(&v, &p, &p).unwrap();
        assert_abs_diff_eq!((out.vec - &v.vec).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn tilde_field_names_failing_leg() {
        let p0 = e(3, 2);
        let q = p0.antipode();
        let v = TangentVector::zero(e(3, 0));
        match tilde_field(&v, &p0, &q) {
            Err(Error::AntipodalPoints { context, .. }) => assert!(context.contains("p0 -> q")),
            other => panic!("unexpected {other:?}"),
        }
        match tilde_field(&TangentVector::zero(q.clone()), &p0, &e(3, 0)) {
            Err(Error::AntipodalPoints { context, .. }) => assert!(context.contains("p -> p0")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn great_sphere_distance() {
        let p0 = e(4, 3);
        assert_abs_diff_eq!(distance_to_great_sphere(&e(4, 0), &p0), 0.0);
        assert_abs_diff_eq!(distance_to_great_sphere(&p0, &p0), FRAC_PI_2);
        let x = SpherePoint::from_slice(&[(0.75f64).sqrt(), 0.0, 0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(distance_to_great_sphere(&x, &p0), FRAC_PI_6, epsilon = 1e-15);
    }

    #[test]
    fn great_sphere_distance_matches_dense_minimization() {
        // x with <x,p0> = 1/2, minimize d(x, y) over y on a dense sample of T = {y3 = 0} ⊂ S^2
        let p0 = e(3, 2);
        let x = SpherePoint::from_slice(&[(0.75f64).sqrt(), 0.0, 0.5]).unwrap();
        let best = (0..100_000)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 100_000.0;
                let y = SpherePoint::from_slice(&[a.cos(), a.sin(), 0.0]).unwrap();
                geodesic_distance(&x, &y)
            })
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(best, distance_to_great_sphere(&x, &p0), epsilon = 1e-8);
    }

    #[test]
    fn complement_basis_is_orthonormal() {
        let p = SpherePoint::from_slice(&[0.3, -0.4, 0.5, 0.6, 0.2]).unwrap();
        let b = complement_basis(p.coords());
        assert_eq!(b.len(), 4);
        for (i, bi) in b.iter().enumerate() {
            assert_abs_diff_eq!(bi.dot(p.coords()), 0.0, epsilon = 1e-14);
            for (j, bj) in b.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(bi.dot(bj), want, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn sphere_volumes() {
        assert_abs_diff_eq!(unit_sphere_volume(1), 2.0 * PI);
        assert_abs_diff_eq!(unit_sphere_volume(2), 4.0 * PI, epsilon = 1e-14);
        assert_abs_diff_eq!(unit_sphere_volume(3), 2.0 * PI * PI, epsilon = 1e-13);
        assert_abs_diff_eq!(unit_sphere_volume(4), 8.0 * PI * PI / 3.0, epsilon = 1e-13);
    }
}

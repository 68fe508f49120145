//! Finite groups of isometries acting freely on `S^{n+1}`, Dirichlet
//! fundamental domains, cut-locus distances in the quotient, and the
//! curvature checks for hypersurfaces of spherical space forms.
//!
//! Hypersurfaces of the quotient are handled through their lifts: a
//! [`MeshSet`] of chart pieces whose union is invariant under the group.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::sphere_grid;
use crate::error::{Error, Result};
use crate::gallery::{geodesic_sphere, transformed};
use crate::gauss_map::{round_degree, scan_dets, shifted_det, DegreeOptions};
use crate::immersion::{HypersurfaceMesh, ImmersionChart};
use crate::rigidity::{
    config_string, hypothesis_margin, inputs_digest, ComponentScan, QuotientSummary, RigidityReport, TheoremId,
};
use crate::sphere::{complement_basis, geodesic_distance, unit_sphere_volume, SpherePoint, TOL_ANTIPODAL};

const ORTHO_TOL: f64 = 1e-10;
const CLOSURE_TOL: f64 = 1e-8;
const FREE_TOL: f64 = 1e-6;

/// A finite group of orthogonal matrices, identity first.
#[derive(Clone, Debug, PartialEq)]
pub struct IsometryGroup {
    elements: Vec<DMatrix<f64>>,
    name: String,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.abs().max()
}

impl IsometryGroup {
    /// Validates orthogonality, identity-first ordering, closure and freeness.
    pub fn new(elements: Vec<DMatrix<f64>>, name: &str) -> Result<Self> {
        let first = elements.first().ok_or(Error::TrivialGroup)?;
        let dim = first.nrows();
        if dim < 2 {
            return Err(Error::BadDimension(format!("group acts on R^{dim}")));
        }
        let id = DMatrix::<f64>::identity(dim, dim);
        for (i, g) in elements.iter().enumerate() {
            if g.nrows() != dim || g.ncols() != dim {
                return Err(Error::InvalidGroup { index: i, reason: format!("expected {dim}x{dim}, got {}x{}", g.nrows(), g.ncols()) });
            }
            let err = max_abs(&(g.transpose() * g - &id));
            if err > ORTHO_TOL {
                return Err(Error::InvalidGroup { index: i, reason: format!("not orthogonal (|g^T g - I| = {err:e})") });
            }
        }
        if max_abs(&(first - &id)) > ORTHO_TOL {
            return Err(Error::InvalidGroup { index: 0, reason: "first element must be the identity".into() });
        }
        let find = |m: &DMatrix<f64>| elements.iter().position(|h| max_abs(&(h - m)) < CLOSURE_TOL);
        for (i, g) in elements.iter().enumerate() {
            if find(&g.transpose()).is_none() {
                return Err(Error::InvalidGroup { index: i, reason: "inverse missing from the list".into() });
            }
            for h in &elements {
                if find(&(g * h)).is_none() {
                    return Err(Error::InvalidGroup { index: i, reason: "product with another element missing".into() });
                }
            }
            for (j, h) in elements.iter().enumerate().skip(i + 1) {
                if max_abs(&(g - h)) < CLOSURE_TOL {
                    return Err(Error::InvalidGroup { index: j, reason: format!("duplicate of element {i}") });
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let probes: Vec<DVector<f64>> = (0..256)
            .map(|_| {
                let v = DVector::from_fn(dim, |_, _| rng.random::<f64>() - 0.5);
                let n = v.norm();
                v / n
            })
            .collect();
        for (i, g) in elements.iter().enumerate().skip(1) {
            // a +1 eigenvector would be a fixed point on the sphere
            let smin = (g - &id).svd(false, false).singular_values.min();
            if smin < FREE_TOL {
                return Err(Error::InvalidGroup { index: i, reason: format!("has a fixed point (sigma_min(g - I) = {smin:e})") });
            }
            if let Some(p) = probes.iter().find(|p| (g * *p - *p).norm() <= FREE_TOL) {
                return Err(Error::InvalidGroup { index: i, reason: format!("moves probe {p:?} by less than {FREE_TOL:e}") });
            }
        }
        Ok(IsometryGroup { elements, name: name.to_string() })
    }

    /// Closure of the generators under multiplication (at most 10 000 elements).
    pub fn from_generators(gens: &[DMatrix<f64>], name: &str) -> Result<Self> {
        let dim = gens.first().ok_or(Error::TrivialGroup)?.nrows();
        let mut elements = vec![DMatrix::identity(dim, dim)];
        let mut frontier = elements.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for a in &frontier {
                for g in gens {
                    let p = g * a;
                    if !elements.iter().any(|h| max_abs(&(h - &p)) < CLOSURE_TOL) {
                        elements.push(p.clone());
                        next.push(p);
                    }
                }
            }
            if elements.len() > 10_000 {
                return Err(Error::InvalidGroup { index: 0, reason: "generated group is too large (infinite?)".into() });
            }
            frontier = next;
        }
        Self::new(elements, name)
    }

    /// `{I, −I}` on `R^dim`.
    pub fn antipodal(dim: usize) -> Result<Self> {
        let id = DMatrix::identity(dim, dim);
        Self::new(vec![id.clone(), -id], "antipodal")
    }

    /// Cyclic group of order `k` on `R⁴` generated by rotating the planes
    /// `(e₀, e₁)` and `(e₂, e₃)` by `2π/k` and `2πq/k`.
    pub fn lens(k: usize, q: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::TrivialGroup);
        }
        let a = 2.0 * PI / k as f64;
        let b = a * q as f64;
        let mut g = DMatrix::zeros(4, 4);
        g[(0, 0)] = a.cos();
        g[(0, 1)] = -a.sin();
        g[(1, 0)] = a.sin();
        g[(1, 1)] = a.cos();
        g[(2, 2)] = b.cos();
        g[(2, 3)] = -b.sin();
        g[(3, 2)] = b.sin();
        g[(3, 3)] = b.cos();
        Self::from_generators(&[g], &format!("lens({k},{q})"))
    }

    /// Lens group with `q = 1`: a fixed-point-free Clifford translation.
    pub fn cyclic(k: usize) -> Result<Self> {
        Self::lens(k, 1)
    }

    /// Parses `[[row, ...], ...]` matrices, either as a bare list or under `"elements"`.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("group json: {e}")))?;
        let list = match &value {
            serde_json::Value::Array(a) => a.clone(),
            serde_json::Value::Object(o) => o
                .get("elements")
                .and_then(|v| v.as_array())
                .cloned()
                .ok_or_else(|| Error::Config("group json needs an 'elements' array".into()))?,
            _ => return Err(Error::Config("group json must be an array of matrices".into())),
        };
        let mut elements = Vec::with_capacity(list.len());
        for (i, m) in list.iter().enumerate() {
            let rows: Vec<Vec<f64>> = serde_json::from_value(m.clone())
                .map_err(|e| Error::InvalidGroup { index: i, reason: format!("not a matrix of numbers: {e}") })?;
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidGroup { index: i, reason: "matrix is not square".into() });
            }
            elements.push(DMatrix::from_fn(n, n, |a, b| rows[a][b]));
        }
        Self::new(elements, "custom")
    }

    /// Group given as `antipodal:dim=4`, `lens:k=5,q=2` or `cyclic:k=3`.
    pub fn from_spec(text: &str) -> Result<Self> {
        let spec = crate::gallery::ChartSpec::parse(text)?;
        match spec.kind.as_str() {
            "antipodal" => Self::antipodal(spec.int("dim")?.unwrap_or(4)),
            "lens" => Self::lens(spec.int("k")?.unwrap_or(3), spec.int("q")?.unwrap_or(1)),
            "cyclic" => Self::cyclic(spec.int("k")?.unwrap_or(3)),
            other => Err(Error::Config(format!("unknown group kind '{other}'"))),
        }
    }

    pub fn to_json(&self) -> String {
        let mats: Vec<Vec<Vec<f64>>> = self
            .elements
            .iter()
            .map(|g| (0..g.nrows()).map(|i| g.row(i).iter().cloned().collect()).collect())
            .collect();
        serde_json::json!({ "elements": mats }).to_string()
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    pub fn apply(&self, index: usize, p: &SpherePoint) -> SpherePoint {
        SpherePoint::from_unit_unchecked(&self.elements[index] * p.coords())
    }

    fn check_point(&self, p: &SpherePoint) -> Result<()> {
        if p.ambient_dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.ambient_dim() });
        }
        Ok(())
    }
}

/// Basepoint with its separation `r = min_{g≠e} d(p, g p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalDomainProbe {
    pub basepoint: SpherePoint,
    pub r: f64,
}

impl FundamentalDomainProbe {
    pub fn new(group: &IsometryGroup, p: &SpherePoint) -> Result<Self> {
        Ok(FundamentalDomainProbe { basepoint: p.clone(), r: separation(group, p)? })
    }
}

pub fn separation(group: &IsometryGroup, p: &SpherePoint) -> Result<f64> {
    group.check_point(p)?;
    if group.order() < 2 {
        return Err(Error::TrivialGroup);
    }
    Ok((1..group.order()).map(|i| geodesic_distance(p, &group.apply(i, p))).fold(f64::INFINITY, f64::min))
}

/// Strictly nearer to `p` than to every other orbit point.
pub fn in_fundamental_domain(group: &IsometryGroup, p: &SpherePoint, x: &SpherePoint) -> bool {
    in_fundamental_domain_with(group, p, x, 0.0)
}

pub fn in_fundamental_domain_with(group: &IsometryGroup, p: &SpherePoint, x: &SpherePoint, strict_tol: f64) -> bool {
    let d = geodesic_distance(p, x);
    (1..group.order()).all(|i| d < geodesic_distance(&group.apply(i, p), x) - strict_tol)
}

/// Indices `g ≠ e` with `|d(p, x) − d(g p, x)| < tol`.
pub fn bisector_membership(group: &IsometryGroup, p: &SpherePoint, x: &SpherePoint, tol: f64) -> Vec<usize> {
    let d = geodesic_distance(p, x);
    (1..group.order()).filter(|&i| (d - geodesic_distance(&group.apply(i, p), x)).abs() < tol).collect()
}

/// `min_g d(x, g y)`.
pub fn quotient_distance(group: &IsometryGroup, x: &SpherePoint, y: &SpherePoint) -> f64 {
    (0..group.order()).map(|i| geodesic_distance(x, &group.apply(i, y))).fold(f64::INFINITY, f64::min)
}

struct Face {
    normal: DVector<f64>,
    samples: Vec<f64>,
}

/// Sampled boundary of the Dirichlet domain `Δ_p`, one face per bisector.
pub struct DirichletBoundary {
    group: IsometryGroup,
    basepoint: DVector<f64>,
    images: Vec<DVector<f64>>,
    faces: Vec<Face>,
    spacing: f64,
}

impl DirichletBoundary {
    /// `density` is the number of grid points per full bisector great sphere.
    pub fn new(group: &IsometryGroup, p: &SpherePoint, density: usize) -> Result<Self> {
        group.check_point(p)?;
        if group.order() < 2 {
            return Err(Error::TrivialGroup);
        }
        let dim = group.dim();
        let base = p.coords().clone();
        let images: Vec<DVector<f64>> = group.elements().iter().map(|g| g * &base).collect();
        let (grid, spacing) = sphere_grid(dim - 1, density.max(16));
        let mut faces = Vec::new();
        for img in images.iter().skip(1) {
            let mut normal = &base - img;
            normal /= normal.norm();
            let basis = complement_basis(&normal);
            let mut samples = Vec::new();
            for q in &grid {
                let x = basis.iter().zip(q).fold(DVector::zeros(dim), |acc, (b, c)| acc + b * *c);
                if closure_ok(&base, &images, &x, 1e-9) {
                    samples.extend(x.iter());
                }
            }
            faces.push(Face { normal, samples });
        }
        if faces.iter().all(|f| f.samples.is_empty()) {
            return Err(Error::SamplingTooCoarse);
        }
        Ok(DirichletBoundary { group: group.clone(), basepoint: base, images, faces, spacing })
    }

    /// Grid spacing of the face samples (error scale where exact projection is unavailable).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn sample_count(&self) -> usize {
        self.faces.iter().map(|f| f.samples.len() / self.basepoint.len()).sum()
    }

    /// All boundary samples as points.
    pub fn samples(&self) -> Vec<SpherePoint> {
        let d = self.basepoint.len();
        self.faces
            .iter()
            .flat_map(|f| f.samples.chunks(d).map(|c| SpherePoint::from_unit_unchecked(DVector::from_column_slice(c))))
            .collect()
    }

    /// Distance from `z` to `∂Δ_p` in the sphere.
    ///
    /// Faces are visited in order of their great-sphere distance; when the
    /// orthogonal projection onto a face lies in the domain's closure it is
    /// exact, otherwise the face samples bound the distance.
    pub fn distance_upstairs(&self, z: &DVector<f64>) -> f64 {
        let d = z.len();
        let mut order: Vec<(f64, usize)> = self
            .faces
            .iter()
            .enumerate()
            .map(|(i, f)| (z.dot(&f.normal).abs().min(1.0).asin(), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut best = f64::INFINITY;
        for (lower, i) in order {
            if lower >= best {
                break;
            }
            let f = &self.faces[i];
            let proj = z - &f.normal * z.dot(&f.normal);
            let pn = proj.norm();
            if pn > 1e-12 && closure_ok(&self.basepoint, &self.images, &(&proj / pn), 1e-12) {
                best = best.min(lower);
                continue;
            }
            let mut top = f64::NEG_INFINITY;
            for c in f.samples.chunks(d) {
                let dot: f64 = c.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
                top = top.max(dot);
            }
            if top > f64::NEG_INFINITY {
                best = best.min(top.clamp(-1.0, 1.0).acos());
            }
        }
        best
    }

    /// `min_{y ∈ ∂Δ_p} d_Γ(x, y) = min_g dist(g x, ∂Δ_p)`.
    pub fn cut_locus_distance(&self, x: &SpherePoint) -> f64 {
        self.group
            .elements()
            .iter()
            .map(|g| self.distance_upstairs(&(g * x.coords())))
            .fold(f64::INFINITY, f64::min)
    }
}

fn closure_ok(base: &DVector<f64>, images: &[DVector<f64>], x: &DVector<f64>, tol: f64) -> bool {
    let own = x.dot(base);
    images.iter().skip(1).all(|img| own >= x.dot(img) - tol)
}

/// Default number of grid points per bisector great sphere.
pub const DEFAULT_BOUNDARY_DENSITY: usize = 20_000;

/// Distance in the quotient from `x` to the cut locus of `p₀`.
pub fn cut_locus_distance(group: &IsometryGroup, p0: &SpherePoint, x: &SpherePoint) -> Result<f64> {
    group.check_point(x)?;
    Ok(DirichletBoundary::new(group, p0, DEFAULT_BOUNDARY_DENSITY)?.cut_locus_distance(x))
}

/// `tan((π − r/2 + R)/2)` and `cot((r − 2R)/4)`, equal whenever defined.
pub fn theorem2_bounds(r: f64, radius: f64) -> (f64, f64) {
    (((PI - r / 2.0 + radius) / 2.0).tan(), 1.0 / ((r - 2.0 * radius) / 4.0).tan())
}

// ---------------------------------------------------------------------------
// invariant meshes

/// A lifted hypersurface given as a union of sampled chart pieces.
#[derive(Clone, Debug)]
pub struct MeshSet {
    pub pieces: Vec<HypersurfaceMesh>,
}

/// Sorted-by-first-coordinate index for near-coincidence queries.
struct PointIndex {
    entries: Vec<(f64, usize, usize)>,
    coords: Vec<Vec<DVector<f64>>>,
}

impl PointIndex {
    fn new(set: &MeshSet) -> Self {
        let coords: Vec<Vec<DVector<f64>>> =
            set.pieces.iter().map(|m| m.samples.iter().map(|s| s.point.coords().clone()).collect()).collect();
        let mut entries: Vec<(f64, usize, usize)> = coords
            .iter()
            .enumerate()
            .flat_map(|(p, pts)| pts.iter().enumerate().map(move |(i, x)| (x[0], p, i)))
            .collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        PointIndex { entries, coords }
    }

    /// Nearest indexed point within `tol`, if any.
    fn nearest(&self, q: &DVector<f64>, tol: f64) -> Option<(usize, usize, f64)> {
        let start = self.entries.partition_point(|e| e.0 < q[0] - tol);
        let mut best: Option<(usize, usize, f64)> = None;
        for &(x0, p, i) in &self.entries[start..] {
            if x0 > q[0] + tol {
                break;
            }
            let d = (&self.coords[p][i] - q).norm();
            if d <= tol && best.is_none_or(|b| d < b.2) {
                best = Some((p, i, d));
            }
        }
        best
    }

    fn any_other_piece(&self, q: &DVector<f64>, own: usize, tol: f64) -> Vec<usize> {
        let start = self.entries.partition_point(|e| e.0 < q[0] - tol);
        let mut out = Vec::new();
        for &(x0, p, i) in &self.entries[start..] {
            if x0 > q[0] + tol {
                break;
            }
            if p != own && (&self.coords[p][i] - q).norm() <= tol && !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut a = a;
        while self.0[a] != r {
            let next = self.0[a];
            self.0[a] = r;
            a = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
    fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut root_of: Vec<Option<usize>> = vec![None; n];
        for i in 0..n {
            let r = self.find(i);
            match root_of[r] {
                Some(k) => out[k].push(i),
                None => {
                    root_of[r] = Some(out.len());
                    out.push(vec![i]);
                }
            }
        }
        out
    }
}

impl MeshSet {
    pub fn new(pieces: Vec<HypersurfaceMesh>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::EmptyInput);
        }
        let dim = pieces[0].chart.ambient_dim();
        if let Some(p) = pieces.iter().find(|p| p.chart.ambient_dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: p.chart.ambient_dim() });
        }
        Ok(MeshSet { pieces })
    }

    pub fn len(&self) -> usize {
        self.pieces.iter().map(|p| p.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ambient_dim(&self) -> usize {
        self.pieces[0].chart.ambient_dim()
    }

    pub fn points(&self) -> Vec<SpherePoint> {
        self.pieces.iter().flat_map(|p| p.points()).collect()
    }

    pub fn min_abs_curvature(&self) -> f64 {
        self.pieces.iter().map(|p| p.min_abs_curvature()).fold(f64::INFINITY, f64::min)
    }

    /// Samples one chart at `resolution` and adds its images under every group element.
    pub fn orbit(group: &IsometryGroup, chart: &ImmersionChart, resolution: &[usize]) -> Result<Self> {
        let pieces = group
            .elements()
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let c = if i == 0 { chart.clone() } else { transformed(chart, g, &format!("g{i}"))? };
                c.sample_mesh(resolution)
            })
            .collect::<Result<Vec<_>>>()?;
        MeshSet::new(pieces)
    }

    /// Checks every `g`-image of every sample lies within `tol` of a sample.
    pub fn check_invariance(&self, group: &IsometryGroup, tol: f64) -> Result<f64> {
        let index = PointIndex::new(self);
        let mut worst: f64 = 0.0;
        for (gi, g) in group.elements().iter().enumerate().skip(1) {
            for piece in &self.pieces {
                for s in &piece.samples {
                    let img = g * s.point.coords();
                    match index.nearest(&img, tol) {
                        Some((_, _, d)) => worst = worst.max(d),
                        None => {
                            let d = self
                                .pieces
                                .iter()
                                .flat_map(|p| p.samples.iter())
                                .map(|t| (t.point.coords() - &img).norm())
                                .fold(f64::INFINITY, f64::min);
                            return Err(Error::NotInvariant { element: gi, distance: d });
                        }
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Connected components upstairs: pieces are glued where samples coincide within `tol`.
    pub fn components(&self, tol: f64) -> Vec<Vec<usize>> {
        let index = PointIndex::new(self);
        let mut uf = UnionFind::new(self.pieces.len());
        for (a, piece) in self.pieces.iter().enumerate() {
            for s in &piece.samples {
                for b in index.any_other_piece(s.point.coords(), a, tol) {
                    uf.union(a, b);
                }
            }
        }
        uf.classes()
    }

    /// Components of the projection to the quotient: upstairs components glued by the group.
    pub fn components_downstairs(&self, group: &IsometryGroup, tol: f64) -> Vec<Vec<usize>> {
        let index = PointIndex::new(self);
        let mut uf = UnionFind::new(self.pieces.len());
        for class in self.components(tol) {
            for w in class.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        for (a, piece) in self.pieces.iter().enumerate() {
            let Some(s) = piece.samples.first() else { continue };
            for g in group.elements().iter().skip(1) {
                if let Some((b, _, _)) = index.nearest(&(g * s.point.coords()), tol) {
                    uf.union(a, b);
                }
            }
        }
        uf.classes()
    }
}

/// Two latitude spheres at distance `c` on either side of the equator of `p₀`.
///
/// The upper leaf is the geodesic sphere of radius `π/2 − c` about `p₀`
/// (normal toward `p₀`); the lower leaf is its image under `−I`.
pub fn latitude_pair(p0: &SpherePoint, c: f64, resolution: &[usize]) -> Result<MeshSet> {
    if !(c > 0.0 && c < PI / 2.0) {
        return Err(Error::InvalidArgument(format!("latitude {c} outside (0, pi/2)")));
    }
    let n = p0.ambient_dim() - 2;
    let upper = geodesic_sphere(p0, PI / 2.0 - c, n)?;
    let group = IsometryGroup::antipodal(p0.ambient_dim())?;
    MeshSet::orbit(&group, &upper, resolution)
}

/// A small sphere centered on the equator of `p₀` together with its antipodal image.
pub fn equatorial_sphere_pair(p0: &SpherePoint, rho: f64, resolution: &[usize]) -> Result<MeshSet> {
    let n = p0.ambient_dim() - 2;
    let q = complement_basis(p0.coords()).remove(0);
    let chart = geodesic_sphere(&SpherePoint::new(q)?, rho, n)?;
    MeshSet::orbit(&IsometryGroup::antipodal(p0.ambient_dim())?, &chart, resolution)
}

/// Orbit of a small sphere centered at the midpoint of `p₀` and its nearest translate.
pub fn boundary_sphere_orbit(group: &IsometryGroup, p0: &SpherePoint, rho: f64, resolution: &[usize]) -> Result<MeshSet> {
    group.check_point(p0)?;
    let r = separation(group, p0)?;
    let nearest = (1..group.order())
        .find(|&i| (geodesic_distance(p0, &group.apply(i, p0)) - r).abs() < 1e-12)
        .ok_or(Error::TrivialGroup)?;
    let mid = SpherePoint::new(p0.coords() + group.apply(nearest, p0).coords())?;
    let chart = geodesic_sphere(&mid, rho, p0.ambient_dim() - 2)?;
    MeshSet::orbit(group, &chart, resolution)
}

/// Mesh sets by name: `latitude:c=5pi/12`, `sphere-pair:rho=pi/12`,
/// `boundary-orbit:rho=0.1`, `equator`.
pub fn mesh_set_from_spec(text: &str, group: &IsometryGroup, p0: &SpherePoint, resolution: Option<&[usize]>) -> Result<MeshSet> {
    let spec = crate::gallery::ChartSpec::parse(text)?;
    let n = p0.ambient_dim() - 2;
    let res = resolution.map(<[usize]>::to_vec).unwrap_or_else(|| crate::immersion::default_resolution(n));
    match spec.kind.as_str() {
        "latitude" => latitude_pair(p0, spec.angle("c")?.ok_or_else(|| Error::Config("latitude needs c".into()))?, &res),
        "sphere-pair" => {
            equatorial_sphere_pair(p0, spec.angle("rho")?.ok_or_else(|| Error::Config("sphere-pair needs rho".into()))?, &res)
        }
        "boundary-orbit" => boundary_sphere_orbit(
            group,
            p0,
            spec.angle("rho")?.ok_or_else(|| Error::Config("boundary-orbit needs rho".into()))?,
            &res,
        ),
        "equator" => MeshSet::new(vec![crate::gallery::equator(p0, n)?.sample_mesh(&res)?]),
        _ => MeshSet::new(vec![crate::gallery::chart_from_spec(text)?.sample_mesh(&res)?]),
    }
}

// ---------------------------------------------------------------------------
// checks

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientConfig {
    /// Hausdorff tolerance for invariance.
    pub mesh_tol: f64,
    /// Samples closer than this glue pieces together.
    pub link_tol: f64,
    pub boundary_density: usize,
    pub degree: DegreeOptions,
}

impl Default for QuotientConfig {
    fn default() -> Self {
        QuotientConfig { mesh_tol: 1e-6, link_tol: 1e-8, boundary_density: DEFAULT_BOUNDARY_DENSITY, degree: DegreeOptions::default() }
    }
}

fn mesh_set_digest(set: &MeshSet, cfg: &str) -> String {
    let parts: Vec<String> = set.pieces.iter().map(|p| inputs_digest(p, cfg)).collect();
    let joined = parts.join(":");
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(joined.as_bytes()))
}

/// Gauss scan of one component at basepoint `b`: pieces summed with their own orientation and sheet count.
fn component_scan(set: &MeshSet, pieces: &[usize], b: &SpherePoint, opts: &DegreeOptions) -> Result<ComponentScan> {
    let mut dets = Vec::new();
    let mut raw = 0.0;
    let mut count = 0;
    for &pi in pieces {
        let mesh = &set.pieces[pi];
        let sigma = mesh.chart.orientation_sign();
        let sheets = mesh.chart.info().sheets.max(1) as f64;
        let n = mesh.param_dim();
        for s in &mesh.samples {
            let gap = 1.0 + s.point.dot(b);
            if gap <= TOL_ANTIPODAL {
                return Err(Error::AntipodalPoints { context: "component meets the antipode of the scan basepoint".into(), gap });
            }
            let c = s.normal.vec.dot(b.coords()) / gap;
            let d = sigma * shifted_det(&s.shape, c);
            raw += s.weight * d / unit_sphere_volume(n) / sheets;
            dets.push(d);
            count += 1;
        }
    }
    let scan = scan_dets(dets.into_iter(), opts.singular_tol);
    let (degree, residual) = if scan.nonsingular {
        match round_degree(raw, opts.residual_tol) {
            Ok((d, r)) => (Some(d), Some(r)),
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    Ok(ComponentScan {
        pieces: pieces.to_vec(),
        samples: count,
        gauss_map_nonsingular: scan.nonsingular,
        min_abs_jacobian: scan.min_abs_det,
        degree,
        degree_residual: residual,
    })
}

struct QuotientInputs<'a> {
    theorem_id: TheoremId,
    group: &'a IsometryGroup,
    p0: &'a SpherePoint,
    set: &'a MeshSet,
    cfg: &'a QuotientConfig,
    r: f64,
    radius: f64,
    notes: Vec<String>,
}

fn finish_quotient(q: QuotientInputs) -> Result<RigidityReport> {
    let QuotientInputs { theorem_id, group, p0, set, cfg, r, radius, mut notes } = q;
    if radius >= r / 2.0 {
        return Err(Error::RTooLarge { radius, half_separation: r / 2.0 });
    }
    let (tan_form, cot_form) = theorem2_bounds(r, radius);
    let bound = cot_form;
    notes.push(format!("bound identity residual |tan((pi - r/2 + R)/2) - cot((r - 2R)/4)| = {:.3e}", (tan_form - cot_form).abs()));
    let min_abs = set.min_abs_curvature();
    let (margin, holds) = hypothesis_margin(min_abs, bound);

    let comps = set.components(cfg.link_tol);
    let down = set.components_downstairs(group, cfg.link_tol);
    let k = comps.len();
    let multiplicity = if group.order() % k == 0 { Some(group.order() / k) } else { None };
    if multiplicity.is_none() {
        notes.push(format!("component count {k} does not divide the group order {}", group.order()));
    }

    let inner = r / 2.0 - radius;
    let avoids = set.points().iter().all(|x| geodesic_distance(x, p0) >= inner - 1e-12);
    if holds && !avoids {
        notes.push(format!("some sample lies inside B(p0, r/2 - R = {inner:.6})"));
    }
    let scan_base = p0.antipode();
    let scans = comps
        .iter()
        .map(|c| component_scan(set, c, &scan_base, &cfg.degree))
        .collect::<Result<Vec<_>>>()?;
    let all_certified = scans.iter().all(|s| s.gauss_map_nonsingular && s.degree.map(i64::abs) == Some(1));
    let nonsingular = scans.iter().all(|s| s.gauss_map_nonsingular);
    let min_det = scans.iter().map(|s| s.min_abs_jacobian).fold(f64::INFINITY, f64::min);

    let (label, label_basis) = if theorem_id == TheoremId::Corollary {
        let name = match k {
            2 => Some("S^n"),
            1 => Some("RP^n"),
            _ => None,
        };
        if holds {
            (name.map(String::from), Some("hypothesis".to_string()))
        } else if all_certified && min_abs > cfg.degree.singular_tol {
            (name.map(String::from), Some("gauss-scan".to_string()))
        } else {
            notes.push("topology label withheld: neither the hypothesis nor the per-component scan certifies it".into());
            (None, None)
        }
    } else if holds || all_certified {
        (Some(format!("each component S^n; quotient covered {}-to-one", multiplicity.unwrap_or(0))), Some(if holds { "hypothesis" } else { "gauss-scan" }.to_string()))
    } else {
        (None, None)
    };
    if !holds {
        notes.push("hypothesis fails; the condition is sufficient, not necessary".into());
    }
    let conclusion = match (holds, all_certified) {
        (true, true) => "hypothesis holds; every component has nonsingular dγ and |degree| = 1".to_string(),
        (true, false) => "FALSIFICATION: hypothesis holds but a component failed the gauss map check".to_string(),
        (false, true) => "hypothesis fails; every component nonetheless passes the gauss map check".to_string(),
        (false, false) => "hypothesis fails; no conclusion".to_string(),
    };
    let degree = if scans.len() == 1 { scans[0].degree } else { None };
    let mut report = RigidityReport {
        theorem_id,
        inputs_digest: mesh_set_digest(set, &format!("{}|{}|{}", config_string(cfg), group.to_json(), config_string(p0))),
        radius,
        bound,
        min_abs_curvature: min_abs,
        margin,
        hypothesis_holds: holds,
        gauss_map_nonsingular: nonsingular,
        degree,
        degree_residual: if scans.len() == 1 { scans[0].degree_residual } else { None },
        min_abs_jacobian: min_det,
        basepoint: p0.clone(),
        strip_width: None,
        ball_certified_gap: None,
        quotient: Some(QuotientSummary {
            group_order: group.order(),
            separation: r,
            components: k,
            components_downstairs: down.len(),
            multiplicity,
            label,
            label_basis,
            component_scans: scans,
        }),
        falsification: false,
        conclusion,
        notes,
    };
    report.falsification = report.is_falsification();
    Ok(report)
}

/// Curvature check for a `Γ`-invariant lifted hypersurface: `min |λ| > cot((r − 2R)/4)`.
pub fn check_theorem2(group: &IsometryGroup, p0: &SpherePoint, set: &MeshSet, cfg: &QuotientConfig) -> Result<RigidityReport> {
    group.check_point(p0)?;
    set.check_invariance(group, cfg.mesh_tol)?;
    let r = separation(group, p0)?;
    let boundary = DirichletBoundary::new(group, p0, cfg.boundary_density)?;
    let points = set.points();
    let dists: Vec<f64> = points.par_iter().map(|x| boundary.cut_locus_distance(x)).collect();
    let radius = dists.iter().cloned().fold(0.0, f64::max);
    let notes = vec![format!(
        "cut-locus distances exact where a face projection applies, else within the boundary grid spacing {:.2e}",
        boundary.spacing()
    )];
    finish_quotient(QuotientInputs { theorem_id: TheoremId::T2, group, p0, set, cfg, r, radius, notes })
}

/// Antipodal specialization: `r = π`, cut-locus distance `arcsin |⟨x, p₀⟩|`, bound `tan((π/2 + R)/2)`.
pub fn check_corollary(p0: &SpherePoint, set: &MeshSet, cfg: &QuotientConfig) -> Result<RigidityReport> {
    let group = IsometryGroup::antipodal(p0.ambient_dim())?;
    set.check_invariance(&group, cfg.mesh_tol)?;
    let radius = set.points().iter().map(|x| x.dot(p0).abs().min(1.0).asin()).fold(0.0, f64::max);
    finish_quotient(QuotientInputs { theorem_id: TheoremId::Corollary, group: &group, p0, set, cfg, r: PI, radius, notes: vec![] })
}

/// Uniform-direction random point at distance `< radius` from `p`.
pub fn random_point_in_ball(rng: &mut impl Rng, p: &SpherePoint, radius: f64) -> SpherePoint {
    let dim = p.ambient_dim();
    loop {
        let v = DVector::from_fn(dim, |_, _| 2.0 * rng.random::<f64>() - 1.0);
        let t = &v - p.coords() * v.dot(p.coords());
        let n = t.norm();
        if n > 1e-6 && v.norm() <= 1.0 {
            let d = radius * rng.random::<f64>();
            return SpherePoint::from_unit_unchecked(p.coords() * d.cos() + t * (d.sin() / n));
        }
    }
}

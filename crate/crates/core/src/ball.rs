//! Smallest enclosing and largest empty geodesic balls of a finite point set
//! on the sphere.
//!
//! The two problems are dual: the ball of radius `R` about `c` encloses the
//! points exactly when the ball of radius `π − R` about `−c` is empty of them.
//! Both are nonsmooth, and nonconvex once the points leave a hemisphere.
//!
//! The solver is a Riemannian subgradient method with diminishing steps,
//! restarted from several points, whose best iterate is polished by a compass
//! search. It is then compared with an exact candidate where one is cheap:
//!
//! - points in an open hemisphere: the enclosing center is the normalized
//!   minimum-norm point of the convex hull (Wolfe's algorithm);
//! - small clouds otherwise: the largest empty cap is cut off by a facet of the
//!   convex hull, found by enumerating point subsets.
//!
//! An independent grid search with local refinement serves as the oracle.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{complement_basis, geodesic_distance, unit_sphere_volume, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallObjective {
    /// Minimize the largest distance to the points.
    Enclosing,
    /// Maximize the smallest distance to the points.
    Empty,
}

impl std::str::FromStr for BallObjective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "enclosing" | "enclose" | "smallest" => Ok(BallObjective::Enclosing),
            "empty" | "largest" => Ok(BallObjective::Empty),
            other => Err(Error::Config(format!("unknown ball objective '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallConfig {
    pub multistarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Initial step `a` of the `a/k` schedule.
    pub step: f64,
    pub tie_tol: f64,
    pub move_tol: f64,
    /// Run the grid oracle and fill in `certified_gap`.
    pub oracle: bool,
    pub oracle_density: usize,
}

impl Default for BallConfig {
    fn default() -> Self {
        BallConfig {
            multistarts: 16,
            seed: 0,
            max_iters: 2000,
            step: PI / 4.0,
            tie_tol: 1e-6,
            move_tol: 1e-10,
            oracle: false,
            oracle_density: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallResult {
    pub objective: BallObjective,
    pub center: SpherePoint,
    pub radius: f64,
    /// Points at distance within `1e-6` of the radius.
    pub achiever_indices: Vec<usize>,
    /// Iterations of the winning start.
    pub iterations: usize,
    /// Suboptimality relative to the oracle (positive: the oracle did better).
    pub certified_gap: Option<f64>,
    pub oracle_value: Option<f64>,
}

/// Largest dimension the grid oracle accepts.
pub const ORACLE_MAX_DIM: usize = 5;

/// Separated grid minima polished by the oracle.
const ORACLE_CANDIDATES: usize = 64;

/// Points flattened row-major for fast inner products.
struct Cloud {
    dim: usize,
    data: Vec<f64>,
}

impl Cloud {
    fn new(points: &[SpherePoint]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let dim = first.ambient_dim();
        let mut data = Vec::with_capacity(dim * points.len());
        for p in points {
            if p.ambient_dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.ambient_dim() });
            }
            data.extend(p.coords().iter());
        }
        Ok(Cloud { dim, data })
    }

    fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn dot(&self, i: usize, c: &[f64]) -> f64 {
        self.row(i).iter().zip(c).map(|(a, b)| a * b).sum()
    }

    /// Extreme inner product: smallest for the enclosing problem (farthest
    /// point), largest for the empty problem (nearest point).
    fn extreme_dot(&self, c: &[f64], objective: BallObjective) -> f64 {
        let it = (0..self.len()).map(|i| self.dot(i, c));
        match objective {
            BallObjective::Enclosing => it.fold(f64::INFINITY, f64::min),
            BallObjective::Empty => it.fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Objective at `c` if it beats `current`, with early exit on the first
    /// point that rules it out.
    fn improves(&self, c: &[f64], objective: BallObjective, current: f64, hot: &mut Vec<usize>) -> Option<f64> {
        let limit = current.cos();
        // enclosing: every dot must exceed cos(current); empty: every dot must stay below it
        let fails = |d: f64| match objective {
            BallObjective::Enclosing => d <= limit,
            BallObjective::Empty => d >= limit,
        };
        if hot.iter().any(|&i| fails(self.dot(i, c))) {
            return None;
        }
        for i in 0..self.len() {
            if fails(self.dot(i, c)) {
                if hot.len() >= 32 {
                    hot.remove(0);
                }
                hot.push(i);
                return None;
            }
        }
        let v = self.value(c, objective);
        better(objective, v, current).then_some(v)
    }

    fn value(&self, c: &[f64], objective: BallObjective) -> f64 {
        self.extreme_dot(c, objective).clamp(-1.0, 1.0).acos()
    }
}

/// `true` if `a` is a better objective value than `b`.
fn better(objective: BallObjective, a: f64, b: f64) -> bool {
    match objective {
        BallObjective::Enclosing => a < b,
        BallObjective::Empty => a > b,
    }
}

fn normalize(v: &mut [f64]) -> bool {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(n > 1e-300) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

/// Moves `c` a distance `t` along the unit tangent direction `dir`.
fn step_along(c: &mut [f64], dir: &[f64], t: f64) {
    let (s, co) = t.sin_cos();
    for (x, d) in c.iter_mut().zip(dir) {
        *x = co * *x + s * d;
    }
    normalize(c);
}

struct Run {
    center: Vec<f64>,
    value: f64,
    iterations: usize,
}

/// Iterations without improvement after which a start is abandoned.
const STALL_ITERS: usize = 300;

fn subgradient_run(cloud: &Cloud, start: Vec<f64>, objective: BallObjective, cfg: &BallConfig, salt: u64) -> Run {
    let dim = cloud.dim;
    let mut c = start;
    let mut best = Run { value: f64::NAN, center: c.clone(), iterations: 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut dir = vec![0.0; dim];
    let mut dots = vec![0.0; cloud.len()];
    let mut last_gain = 0;
    for k in 1..=cfg.max_iters {
        for (i, d) in dots.iter_mut().enumerate() {
            *d = cloud.dot(i, &c);
        }
        let ext = match objective {
            BallObjective::Enclosing => dots.iter().cloned().fold(f64::INFINITY, f64::min),
            BallObjective::Empty => dots.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
        .clamp(-1.0, 1.0);
        let dist = ext.acos();
        if best.value.is_nan() || better(objective, dist, best.value) {
            if best.value.is_nan() || (dist - best.value).abs() > 1e-12 {
                last_gain = k;
            }
            best.value = dist;
            best.center.copy_from_slice(&c);
        } else if k - last_gain > STALL_ITERS {
            break;
        }
        best.iterations = k;
        // dot-product window equivalent to |d_i - dist| < tie_tol
        let (lo, hi) = match objective {
            BallObjective::Enclosing => (f64::NEG_INFINITY, (dist - cfg.tie_tol).max(0.0).cos()),
            BallObjective::Empty => ((dist + cfg.tie_tol).min(PI).cos(), f64::INFINITY),
        };
        dir.iter_mut().for_each(|x| *x = 0.0);
        let mut active = 0usize;
        for (i, &d) in dots.iter().enumerate() {
            if d < lo || d > hi {
                continue;
            }
            // unit tangent at c pointing toward x_i
            let x = cloud.row(i);
            let mut u: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - d * b).collect();
            if !normalize(&mut u) {
                // x_i = ±c: any direction works; pick a random tangent one
                u = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
                let r: f64 = u.iter().zip(&c).map(|(a, b)| a * b).sum();
                u.iter_mut().zip(&c).for_each(|(a, b)| *a -= r * b);
                normalize(&mut u);
            }
            dir.iter_mut().zip(&u).for_each(|(a, b)| *a += b);
            active += 1;
        }
        if active == 0 {
            break;
        }
        let sign = match objective {
            BallObjective::Enclosing => 1.0,
            BallObjective::Empty => -1.0,
        };
        dir.iter_mut().for_each(|x| *x *= sign / active as f64);
        let g = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let t = cfg.step / k as f64 * g;
        if t < cfg.move_tol {
            break;
        }
        dir.iter_mut().for_each(|x| *x /= g);
        step_along(&mut c, &dir, t);
    }
    if best.value.is_nan() {
        best.value = cloud.value(&c, objective);
    }
    best
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 && normalize(&mut v) {
            return v;
        }
    }
}

fn starts(cloud: &Cloud, objective: BallObjective, cfg: &BallConfig) -> Vec<Vec<f64>> {
    let dim = cloud.dim;
    let mut out = Vec::new();
    let mut mean = vec![0.0; dim];
    for i in 0..cloud.len() {
        mean.iter_mut().zip(cloud.row(i)).for_each(|(a, b)| *a += b);
    }
    if normalize(&mut mean) {
        if objective == BallObjective::Empty {
            out.push(mean.iter().map(|x| -x).collect());
        }
        out.push(mean);
    }
    if objective == BallObjective::Empty {
        for i in 0..dim {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; dim];
                e[i] = s;
                out.push(e);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.multistarts {
        out.push(random_unit(&mut rng, dim));
    }
    out
}

fn solve(points: &[SpherePoint], objective: BallObjective, cfg: &BallConfig) -> Result<BallResult> {
    let cloud = Cloud::new(points)?;
    let (center, iterations) = if cloud.len() == 1 {
        let p = points[0].coords().as_slice().to_vec();
        match objective {
            BallObjective::Enclosing => (p, 0),
            BallObjective::Empty => (p.iter().map(|x| -x).collect(), 0),
        }
    } else {
        let starts = starts(&cloud, objective, cfg);
        let runs: Vec<Run> = starts
            .into_par_iter()
            .enumerate()
            .map(|(i, s)| subgradient_run(&cloud, s, objective, cfg, i as u64 + 1))
            .collect();
        let mut best = 0;
        for (i, r) in runs.iter().enumerate() {
            if better(objective, r.value, runs[best].value) {
                best = i;
            }
        }
        let r = &runs[best];
        // the a/k schedule leaves the iterate within ~a/k_max of a kink; polish it
        let (mut c, value) = compass_refine(&cloud, r.center.clone(), r.value, objective, 1e-3);
        if let Some(exact) = exact_center(&cloud, objective) {
            if !better(objective, value, cloud.value(&exact, objective)) {
                c = exact;
            }
        }
        (c, r.iterations)
    };
    let center = match (cloud.len(), objective) {
        (1, BallObjective::Enclosing) => points[0].clone(),
        (1, BallObjective::Empty) => points[0].antipode(),
        _ => SpherePoint::from_slice(&center)?,
    };
    let radius = accurate_value(points, &center, objective);
    if objective == BallObjective::Enclosing && radius >= PI - 1e-6 {
        return Err(Error::DegenerateEnclosure { radius });
    }
    let achiever_indices = (0..cloud.len())
        .filter(|&i| (geodesic_distance(&points[i], &center) - radius).abs() < 1e-6)
        .collect();
    let mut result = BallResult {
        objective,
        center,
        radius,
        achiever_indices,
        iterations,
        certified_gap: None,
        oracle_value: None,
    };
    if cfg.oracle {
        let (_, value) = oracle_on_cloud(&cloud, objective, cfg.oracle_density)?;
        result.oracle_value = Some(value);
        result.certified_gap = Some(match objective {
            BallObjective::Enclosing => radius - value,
            BallObjective::Empty => value - radius,
        });
    }
    Ok(result)
}

/// Objective value with the cancellation-free distance formula.
fn accurate_value(points: &[SpherePoint], center: &SpherePoint, objective: BallObjective) -> f64 {
    let d = points.iter().map(|p| geodesic_distance(p, center));
    match objective {
        BallObjective::Enclosing => d.fold(0.0, f64::max),
        BallObjective::Empty => d.fold(PI, f64::min),
    }
}

/// Smallest geodesic ball containing all points.
pub fn smallest_enclosing_ball(points: &[SpherePoint], cfg: &BallConfig) -> Result<BallResult> {
    solve(points, BallObjective::Enclosing, cfg)
}

/// Largest open geodesic ball containing none of the points.
pub fn largest_empty_ball(points: &[SpherePoint], cfg: &BallConfig) -> Result<BallResult> {
    solve(points, BallObjective::Empty, cfg)
}

/// Exhaustive grid evaluation of the objective followed by local refinement.
///
/// The grid has roughly `grid_density` points: a Fibonacci lattice on `S²`
/// and nested angular rings on `S³` and `S⁴`.
pub fn brute_force_ball_oracle(
    points: &[SpherePoint],
    objective: BallObjective,
    grid_density: usize,
) -> Result<(SpherePoint, f64)> {
    let cloud = Cloud::new(points)?;
    oracle_on_cloud(&cloud, objective, grid_density)
}

fn oracle_on_cloud(cloud: &Cloud, objective: BallObjective, density: usize) -> Result<(SpherePoint, f64)> {
    let dim = cloud.dim;
    if dim > ORACLE_MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, max: ORACLE_MAX_DIM });
    }
    if dim < 2 {
        return Err(Error::BadDimension(format!("ambient dimension {dim} too small")));
    }
    if cloud.len() == 1 {
        let p: Vec<f64> = cloud.row(0).to_vec();
        return Ok(match objective {
            BallObjective::Enclosing => (SpherePoint::from_slice(&p)?, 0.0),
            BallObjective::Empty => (SpherePoint::from_slice(&p.iter().map(|x| -x).collect::<Vec<_>>())?, PI),
        });
    }
    let (grid, spacing) = sphere_grid(dim, density.max(16));
    let values: Vec<f64> = grid.par_iter().map(|g| cloud.value(g, objective)).collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| {
        let ord = values[a].total_cmp(&values[b]);
        let ord = if objective == BallObjective::Enclosing { ord } else { ord.reverse() };
        ord.then(a.cmp(&b))
    });
    // near-optimal sets can be whole submanifolds with sampling ripples along
    // them, so refine many well-separated candidates rather than the top few
    let sep = (3.0 * spacing).cos();
    let mut picked: Vec<usize> = Vec::new();
    for &i in &order {
        if picked.len() >= ORACLE_CANDIDATES {
            break;
        }
        let near = picked.iter().any(|&j| grid[i].iter().zip(&grid[j]).map(|(a, b)| a * b).sum::<f64>() > sep);
        if !near {
            picked.push(i);
        }
    }
    let refined: Vec<(Vec<f64>, f64)> = picked
        .into_par_iter()
        .map(|i| compass_refine(cloud, grid[i].clone(), values[i], objective, spacing))
        .collect();
    let mut best = 0;
    for (i, r) in refined.iter().enumerate() {
        if better(objective, r.1, refined[best].1) {
            best = i;
        }
    }
    let (c, v) = refined[best].clone();
    Ok((SpherePoint::from_slice(&c)?, v))
}

/// Pattern search along an orthonormal tangent frame, halving the step on failure.
/// Facet enumeration is skipped above this many point subsets.
const FACET_SUBSET_LIMIT: u64 = 200_000;

/// Exact optimal center when the hemisphere or small-cloud shortcut applies.
fn exact_center(cloud: &Cloud, objective: BallObjective) -> Option<Vec<f64>> {
    let empty = match min_norm_point(cloud) {
        Some(mut q) => {
            normalize(&mut q);
            q.iter().map(|x| -x).collect()
        }
        None => facet_empty_cap(cloud)?,
    };
    Some(match objective {
        BallObjective::Empty => empty,
        BallObjective::Enclosing => empty.iter().map(|x| -x).collect(),
    })
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k as u64).fold(1u64, |acc, i| acc.saturating_mul(n as u64 - i) / (i + 1))
}

/// Center of the largest empty cap when the origin lies in the convex hull.
///
/// The cap about `n` with `cos` radius `h` is empty iff the hyperplane
/// `<n, x> = h` supports the hull, so the optimum is the supporting facet
/// hyperplane of smallest offset.
fn facet_empty_cap(cloud: &Cloud) -> Option<Vec<f64>> {
    let (dim, len) = (cloud.dim, cloud.len());
    if len < dim || binomial(len, dim) > FACET_SUBSET_LIMIT {
        return None;
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset: Vec<usize> = (0..dim).collect();
    loop {
        // normal to the affine hull of the subset, by cofactor expansion
        let diffs = DMatrix::from_fn(dim - 1, dim, |r, col| cloud.row(subset[r + 1])[col] - cloud.row(subset[0])[col]);
        let mut normal: Vec<f64> = (0..dim)
            .map(|j| {
                let minor = diffs.clone().remove_column(j);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * minor.determinant()
            })
            .collect();
        if normalize(&mut normal) {
            for s in [1.0, -1.0] {
                let n: Vec<f64> = normal.iter().map(|x| s * x).collect();
                let h = cloud.dot(subset[0], &n);
                let supports = (0..len).all(|i| cloud.dot(i, &n) <= h + 1e-12);
                if supports && best.as_ref().is_none_or(|(bh, _)| h < *bh) {
                    best = Some((h, n));
                }
            }
        }
        // next combination in lexicographic order
        let mut i = dim;
        while i > 0 && subset[i - 1] == len - dim + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        subset[i - 1] += 1;
        for j in i..dim {
            subset[j] = subset[j - 1] + 1;
        }
    }
    best.map(|(_, n)| n)
}

/// Minimum-norm point of the convex hull (Wolfe's algorithm), or `None` when
/// the hull contains the origin to working precision.
fn min_norm_point(cloud: &Cloud) -> Option<Vec<f64>> {
    const EPS: f64 = 1e-12;
    let dim = cloud.dim;
    let combine = |set: &[usize], w: &[f64]| {
        let mut x = vec![0.0; dim];
        for (&i, &wi) in set.iter().zip(w) {
            x.iter_mut().zip(cloud.row(i)).for_each(|(a, b)| *a += wi * b);
        }
        x
    };
    let mut set = vec![0usize];
    let mut weights = vec![1.0];
    for _ in 0..10_000 {
        let x = combine(&set, &weights);
        let norm2: f64 = x.iter().map(|a| a * a).sum();
        if norm2 < 1e-18 {
            return None;
        }
        let (j, d) = (0..cloud.len()).map(|i| (i, cloud.dot(i, &x))).fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if norm2 - d <= EPS || set.contains(&j) || set.len() > dim {
            return Some(x);
        }
        set.push(j);
        weights.push(0.0);
        loop {
            // affine minimizer over the corral: [G 1; 1' 0] [a; mu] = [0; 1]
            let k = set.len();
            let mut m = DMatrix::zeros(k + 1, k + 1);
            for a in 0..k {
                for b in 0..k {
                    m[(a, b)] = cloud.row(set[a]).iter().zip(cloud.row(set[b])).map(|(u, v)| u * v).sum::<f64>();
                }
                m[(a, k)] = 1.0;
                m[(k, a)] = 1.0;
            }
            let mut rhs = DVector::zeros(k + 1);
            rhs[k] = 1.0;
            let alpha = m.svd(true, true).solve(&rhs, 1e-14).ok()?;
            if (0..k).all(|a| alpha[a] > EPS) {
                weights = (0..k).map(|a| alpha[a]).collect();
                break;
            }
            let theta = (0..k)
                .filter(|&a| alpha[a] <= EPS)
                .map(|a| weights[a] / (weights[a] - alpha[a]))
                .fold(1.0, f64::min);
            for a in 0..k {
                weights[a] = theta * alpha[a] + (1.0 - theta) * weights[a];
            }
            let keep: Vec<bool> = weights.iter().map(|&w| w > EPS).collect();
            let mut idx = 0;
            set.retain(|_| {
                idx += 1;
                keep[idx - 1]
            });
            weights.retain(|&w| w > EPS);
            if set.is_empty() {
                return None;
            }
        }
    }
    None
}

fn compass_refine(cloud: &Cloud, mut c: Vec<f64>, mut value: f64, objective: BallObjective, spacing: f64) -> (Vec<f64>, f64) {
    let mut step = spacing;
    let mut evals = 0usize;
    // points that recently decided a comparison; checking them first rejects most trials cheaply
    let mut hot: Vec<usize> = Vec::new();
    while step > 1e-10 && evals < 20_000 {
        let basis = complement_basis(&DVector::from_column_slice(&c));
        let mut moved = false;
        'dirs: for b in &basis {
            for s in [1.0, -1.0] {
                let dir: Vec<f64> = b.iter().map(|x| s * x).collect();
                let mut trial = c.clone();
                step_along(&mut trial, &dir, step);
                evals += 1;
                if let Some(v) = cloud.improves(&trial, objective, value, &mut hot) {
                    c = trial;
                    value = v;
                    moved = true;
                    break 'dirs;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (c, value)
}

/// Quasi-uniform grid on `S^{dim-1}` with about `density` points, and its spacing.
pub(crate) fn sphere_grid(dim: usize, density: usize) -> (Vec<Vec<f64>>, f64) {
    let m = dim - 1;
    if m == 2 {
        let golden = PI * (3.0 - 5f64.sqrt());
        let pts = (0..density)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / density as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                vec![r * phi.cos(), r * phi.sin(), z]
            })
            .collect();
        return (pts, (4.0 * PI / density as f64).sqrt());
    }
    let spacing = (unit_sphere_volume(m) / density as f64).powf(1.0 / m as f64);
    let mut out = Vec::new();
    let mut angles = vec![0.0; m];
    rings(m, 0, 1.0, spacing, &mut angles, &mut out);
    (out, spacing)
}

fn rings(m: usize, level: usize, scale: f64, spacing: f64, angles: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
    let last = level + 1 == m;
    let span = if last { 2.0 * PI } else { PI };
    let count = ((span * scale / spacing).ceil() as usize).max(1);
    for i in 0..count {
        angles[level] = (i as f64 + 0.5) * span / count as f64;
        if last {
            let mut x = vec![0.0; m + 1];
            let mut prod = 1.0;
            for k in 0..m {
                x[k] = prod * angles[k].cos();
                prod *= angles[k].sin();
            }
            x[m] = prod;
            out.push(x);
        } else {
            let s = angles[level].sin();
            rings(m, level + 1, scale * s, spacing, angles, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn e(dim: usize, i: usize) -> SpherePoint {
        SpherePoint::basis(dim, i)
    }

    #[test]
    fn single_point_cases() {
        let p = SpherePoint::from_slice(&[0.3, 0.4, 0.5]).unwrap();
        let enc = smallest_enclosing_ball(std::slice::from_ref(&p), &BallConfig::default()).unwrap();
        assert_eq!(enc.radius, 0.0);
        let emp = largest_empty_ball(std::slice::from_ref(&p), &BallConfig::default()).unwrap();
        assert_abs_diff_eq!(emp.radius, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(emp.center.dot(&p), -1.0, epsilon = 1e-12);
        let (_, v) = brute_force_ball_oracle(std::slice::from_ref(&p), BallObjective::Enclosing, 1000).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn two_orthogonal_points() {
        let pts = [e(3, 0), e(3, 1)];
        let r = smallest_enclosing_ball(&pts, &BallConfig::default()).unwrap();
        assert_abs_diff_eq!(r.radius, PI / 4.0, epsilon = 1e-6);
        let want = SpherePoint::from_slice(&[1.0, 1.0, 0.0]).unwrap();
        assert!(crate::sphere::geodesic_distance(&r.center, &want) < 1e-4);
        assert_eq!(r.achiever_indices.len(), 2);
        let (_, v) = brute_force_ball_oracle(&pts, BallObjective::Enclosing, 1_000_000).unwrap();
        assert_abs_diff_eq!(v, PI / 4.0, epsilon = 2e-3);
    }

    #[test]
    fn empty_input_and_large_dimension() {
        assert!(matches!(smallest_enclosing_ball(&[], &BallConfig::default()), Err(Error::EmptyInput)));
        let pts = [e(6, 0), e(6, 1)];
        assert!(matches!(
            brute_force_ball_oracle(&pts, BallObjective::Empty, 100),
            Err(Error::DimensionTooLarge { dim: 6, max: 5 })
        ));
    }

    #[test]
    fn hemispheric_enclosing_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let pts: Vec<SpherePoint> = (0..7)
                .map(|_| {
                    let mut v = random_unit(&mut rng, 3);
                    v[2] = v[2].abs() + 0.05;
                    SpherePoint::from_slice(&v).unwrap()
                })
                .collect();
            let cfg = BallConfig { multistarts: 4, oracle: true, oracle_density: 20_000, ..BallConfig::default() };
            let r = smallest_enclosing_ball(&pts, &cfg).unwrap();
            let q = min_norm_point(&Cloud::new(&pts).unwrap()).unwrap();
            let empty = largest_empty_ball(&pts, &cfg).unwrap();
            assert_abs_diff_eq!(empty.radius, PI - r.radius, epsilon = 1e-12);
            let norm = q.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert_abs_diff_eq!(r.radius.cos(), norm, epsilon = 1e-12);
            assert!(r.certified_gap.unwrap() < 1e-9, "{:?}", r.certified_gap);
        }
    }

    #[test]
    fn small_clouds_around_the_origin_are_exact() {
        // three points on a great circle surrounding the origin and two on one side
        let raw = [
            [0.6877618985809131, 0.0, 0.7259363407767776],
            [0.45962203750616765, -0.8881146224664241, 0.0],
            [0.0, 0.0, -1.0],
            [-0.726709021085618, 0.0, -0.6869454117124467],
            [0.4749442806315646, -0.47503417692421607, 0.7407904299120623],
        ];
        let pts: Vec<SpherePoint> = raw.iter().map(|v| SpherePoint::from_slice(v).unwrap()).collect();
        let r = smallest_enclosing_ball(&pts, &BallConfig::default()).unwrap();
        assert_abs_diff_eq!(r.radius, PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.center.coords()[1], -1.0, epsilon = 1e-12);

        // regular tetrahedron: largest empty cap is centered on a face normal
        let s = 1.0 / 3f64.sqrt();
        let tet = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
        let pts: Vec<SpherePoint> = tet.iter().map(|v| SpherePoint::from_slice(v).unwrap()).collect();
        let e = largest_empty_ball(&pts, &BallConfig::default()).unwrap();
        assert_abs_diff_eq!(e.radius.cos(), 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!(e.achiever_indices.len(), 3);
    }

    #[test]
    fn clifford_radii_are_dual() {
        let mesh = crate::gallery::clifford_torus(0.6, 1, 1).unwrap().sample_mesh(&[64, 64]).unwrap();
        let pts = mesh.points();
        let cfg = BallConfig::default();
        let emp = largest_empty_ball(&pts, &cfg).unwrap();
        let enc = smallest_enclosing_ball(&pts, &cfg).unwrap();
        assert_abs_diff_eq!(emp.radius.cos(), 0.6, epsilon = 1e-3);
        assert_abs_diff_eq!(enc.radius, PI - emp.radius, epsilon = 5e-3);
    }

    #[test]
    fn grid_sizes_are_close_to_density() {
        for dim in [3, 4, 5] {
            let (g, _) = sphere_grid(dim, 20_000);
            assert!(g.len() > 10_000 && g.len() < 40_000, "dim {dim}: {}", g.len());
            for p in g.iter().step_by(97) {
                assert_abs_diff_eq!(p.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn feasibility_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<SpherePoint> =
            (0..40).map(|_| SpherePoint::from_slice(&random_unit(&mut rng, 4)).unwrap()).collect();
        let cfg = BallConfig { oracle: true, oracle_density: 20_000, ..BallConfig::default() };
        let enc = smallest_enclosing_ball(&pts, &cfg).unwrap();
        let emp = largest_empty_ball(&pts, &cfg).unwrap();
        for p in &pts {
            assert!(crate::sphere::geodesic_distance(p, &enc.center) <= enc.radius + 1e-8);
            assert!(crate::sphere::geodesic_distance(p, &emp.center) >= emp.radius - 1e-8);
        }
        assert!(enc.certified_gap.unwrap().abs() < 5e-3, "{:?}", enc.certified_gap);
        assert!(emp.certified_gap.unwrap().abs() < 5e-3, "{:?}", emp.certified_gap);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<SpherePoint> =
            (0..30).map(|_| SpherePoint::from_slice(&random_unit(&mut rng, 3)).unwrap()).collect();
        let a = smallest_enclosing_ball(&pts, &BallConfig::default()).unwrap();
        let b = smallest_enclosing_ball(&pts, &BallConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}

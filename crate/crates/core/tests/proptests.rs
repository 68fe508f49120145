use std::f64::consts::PI;

use hyperrig::ball::{largest_empty_ball, smallest_enclosing_ball, BallConfig};
use hyperrig::beltrami::{beltrami, beltrami_inverse, deform_point};
use hyperrig::quotient::{separation, DirichletBoundary, IsometryGroup, DEFAULT_BOUNDARY_DENSITY};
use hyperrig::sphere::{exp_map, geodesic_distance, log_map, parallel_transport};
use hyperrig::{SpherePoint, TangentVector};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn raw(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim).prop_filter("away from zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
}

fn point(dim: usize) -> impl Strategy<Value = SpherePoint> {
    raw(dim).prop_map(|v| SpherePoint::from_slice(&v).unwrap())
}

fn far_pair(dim: usize) -> impl Strategy<Value = (SpherePoint, SpherePoint)> {
    (point(dim), point(dim)).prop_filter("not near antipodal", |(p, q)| 1.0 + p.dot(q) > 1e-3)
}

fn rotation(dim: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim * dim).prop_filter_map("full rank", move |v| {
        let qr = DMatrix::from_vec(dim, dim, v).qr();
        let r = qr.r();
        (0..dim).all(|i| r[(i, i)].abs() > 1e-3).then(|| qr.q())
    })
}

fn rotate(m: &DMatrix<f64>, p: &SpherePoint) -> SpherePoint {
    SpherePoint::new(m * p.coords()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transport_is_an_isometry_and_reverses((p, q) in far_pair(4), a in raw(4), b in raw(4)) {
        let u = TangentVector::project(p.clone(), DVector::from_vec(a));
        let v = TangentVector::project(p.clone(), DVector::from_vec(b));
        let tu = parallel_transport(&p, &q, &u).unwrap();
        let tv = parallel_transport(&p, &q, &v).unwrap();
        prop_assert!(tu.vec.dot(q.coords()).abs() < 1e-9);
        prop_assert!((tu.vec.dot(&tv.vec) - u.vec.dot(&v.vec)).abs() < 1e-9);
        let back = parallel_transport(&q, &p, &tu).unwrap();
        prop_assert!((back.vec - &u.vec).norm() < 1e-8);
    }

    #[test]
    fn log_inverts_exp((p, q) in far_pair(5)) {
        let v = log_map(&p, &q).unwrap();
        prop_assert!((v.norm() - geodesic_distance(&p, &q)).abs() < 1e-10);
        let r = exp_map(&v);
        prop_assert!((r.coords() - q.coords()).norm() < 1e-9);
    }

    #[test]
    fn distance_is_a_metric(p in point(4), q in point(4), r in point(4)) {
        let (pq, qr, pr) = (geodesic_distance(&p, &q), geodesic_distance(&q, &r), geodesic_distance(&p, &r));
        prop_assert!((pq - geodesic_distance(&q, &p)).abs() < 1e-14);
        prop_assert!((0.0..=PI).contains(&pq));
        prop_assert!(pr <= pq + qr + 1e-12);
    }

    #[test]
    fn ball_radii_are_rotation_invariant(
        pts in prop::collection::vec(point(3), 5..12),
        m in rotation(3),
    ) {
        let cfg = BallConfig::default();
        let moved: Vec<SpherePoint> = pts.iter().map(|p| rotate(&m, p)).collect();
        let a = smallest_enclosing_ball(&pts, &cfg);
        let b = smallest_enclosing_ball(&moved, &cfg);
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!((a.radius - b.radius).abs() < 1e-9, "{} vs {}", a.radius, b.radius);
            let reach = pts.iter().map(|p| geodesic_distance(p, &a.center)).fold(0.0, f64::max);
            prop_assert!((reach - a.radius).abs() < 1e-9);
        }
        let a = largest_empty_ball(&pts, &cfg).unwrap();
        let b = largest_empty_ball(&moved, &cfg).unwrap();
        prop_assert!((a.radius - b.radius).abs() < 1e-9, "{} vs {}", a.radius, b.radius);
        let nearest = pts.iter().map(|p| geodesic_distance(p, &a.center)).fold(PI, f64::min);
        prop_assert!((nearest - a.radius).abs() < 1e-9);
    }

    #[test]
    fn beltrami_round_trip_and_composition(v in prop::collection::vec(-3.0f64..3.0, 3), s in 0.05f64..4.0, t in 0.05f64..4.0) {
        let x = DVector::from_vec(v);
        let p = beltrami_inverse(&x);
        prop_assert!((beltrami(&p).unwrap() - &x).norm() < 1e-12 * (1.0 + x.norm()));
        let two_steps = deform_point(&deform_point(&p, s).unwrap(), t).unwrap();
        let one_step = deform_point(&p, s * t).unwrap();
        prop_assert!(geodesic_distance(&two_steps, &one_step) < 1e-12);
    }

    #[test]
    fn separation_is_constant_on_orbits(p in point(4), k in 2usize..8, pick in 0usize..8) {
        let group = IsometryGroup::lens(k, 1).unwrap();
        let g = pick % k;
        let image = group.apply(g, &p);
        prop_assert!((separation(&group, &p).unwrap() - separation(&group, &image).unwrap()).abs() < 1e-12);
        prop_assert!((separation(&group, &p).unwrap() - 2.0 * PI / k as f64).abs() < 1e-12);
    }

    #[test]
    fn cut_locus_distance_is_orbit_invariant_and_lipschitz(x in point(4), pick in 0usize..5, step in raw(4)) {
        let group = IsometryGroup::lens(5, 2).unwrap();
        let p0 = SpherePoint::from_slice(&[0.6, 0.1, 0.7, -0.3]).unwrap();
        let boundary = DirichletBoundary::new(&group, &p0, DEFAULT_BOUNDARY_DENSITY).unwrap();
        let r = separation(&group, &p0).unwrap();
        prop_assert!((boundary.cut_locus_distance(&p0) - r / 2.0).abs() < 1e-12);
        let d = boundary.cut_locus_distance(&x);
        prop_assert!(d >= 0.0);
        prop_assert!((d - boundary.cut_locus_distance(&group.apply(pick, &x))).abs() < 1e-9);
        let v = TangentVector::project(x.clone(), DVector::from_vec(step));
        let y = exp_map(&TangentVector { vec: v.vec * 0.05, ..v });
        let slack = geodesic_distance(&x, &y) + 2.0 * boundary.spacing();
        prop_assert!((d - boundary.cut_locus_distance(&y)).abs() <= slack);
    }
}

//! Property tests for geometric, numerical and bookkeeping invariants.

use std::time::Instant;

use hotspots::experiments::{fit_envelopes, GaussianSample, LemmaId, Relation, VerificationReport};
use hotspots::geometry::{
    all_diameter_pairs, ball_volume, convex_hull, diameter, inradius_incenter, normalize, ConvexDomain, DomainSpec,
    Provenance,
};
use hotspots::mesh::triangulate;
use hotspots::spectral::{assemble, solve_mesh};
use hotspots::stochastic::rng::{path_rng, sub_seed};
use hotspots::stochastic::{simulate, EdgeIndex, StepEvents};
use hotspots::{Domain, Point};
use proptest::prelude::*;
use rand::Rng;

/// Random convex polygons: hulls of 4 to 24 points in a box of random shape.
fn domain() -> impl Strategy<Value = Domain> {
    (prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 4..24), 0.3..12.0f64, 0.0..3.2f64).prop_filter_map(
        "degenerate hull",
        |(pts, len, angle)| {
            let (c, s) = (angle.cos(), angle.sin());
            let pts: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(len * x * c - y * s, len * x * s + y * c)).collect();
            let hull = convex_hull(&pts);
            let d = ConvexDomain::new(hull, Provenance::Polygon).ok()?;
            (d.area() > 1e-2 && inradius_incenter(&d).ok()?.0 > 1e-2).then_some(d)
        },
    )
}

/// Interior point as a random convex combination of the vertices.
fn interior(d: &Domain, w: &[f64]) -> Point {
    let total: f64 = w.iter().take(d.len()).sum();
    d.vertices().iter().zip(w).fold(Point::new(0.0, 0.0), |s, (&v, &wi)| s + v * (wi / total))
}

fn brute_diameter(d: &Domain) -> f64 {
    let v = d.vertices();
    v.iter().flat_map(|a| v.iter().map(move |b| a.dist(*b))).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn calipers_diameter_equals_brute_force(d in domain()) {
        let (a, b, dist) = diameter(&d);
        prop_assert!((dist - brute_diameter(&d)).abs() <= 1e-12 * dist);
        prop_assert!((a.dist(b) - dist).abs() <= 1e-12 * dist);
    }

    #[test]
    fn near_diameter_pairs_equal_brute_force(d in domain(), tol in 1e-6..1e-3f64) {
        let set = all_diameter_pairs(&d, tol).unwrap();
        let v = d.vertices();
        let thr = (1.0 - tol) * set.diameter;
        let mut brute = Vec::new();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if v[i].dist(v[j]) >= thr {
                    brute.push((i, j));
                }
            }
        }
        let mut got: Vec<(usize, usize)> = set.pairs.iter().map(|p| (p.i, p.j)).collect();
        got.sort();
        prop_assert_eq!(got, brute);
    }

    #[test]
    fn incenter_maximizes_boundary_distance(d in domain(), w in prop::collection::vec(0.01..1.0f64, 24)) {
        let (r, c) = inradius_incenter(&d).unwrap();
        prop_assert!(d.contains(c));
        prop_assert!((d.distance_to_boundary(c) - r).abs() < 1e-9);
        let p = interior(&d, &w);
        prop_assert!(d.distance_to_boundary(p) <= r + 1e-9);
    }

    #[test]
    fn normalization_fixes_scale_and_orientation(d in domain()) {
        let (nd, rep) = normalize(&d).unwrap();
        let (r, _) = inradius_incenter(&nd).unwrap();
        prop_assert!((r - 1.0).abs() < 1e-9);
        prop_assert!((nd.area() - d.area() * rep.scale * rep.scale).abs() < 1e-9 * nd.area());
        prop_assert!((diameter(&nd).2 - rep.aspect_n).abs() < 1e-9 * rep.aspect_n);
        let (lo, hi) = nd.bbox();
        prop_assert!((hi.y - lo.y - rep.min_width).abs() < 1e-9 * rep.min_width);
        prop_assert!(hi.x - lo.x >= hi.y - lo.y - 1e-9);
        // A second pass is the identity up to rounding.
        let (_, again) = normalize(&nd).unwrap();
        prop_assert!((again.scale - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ball_volume_is_monotone_and_bounded(d in domain(), w in prop::collection::vec(0.01..1.0f64, 24), r in 0.01..5.0f64) {
        let c = interior(&d, &w);
        let v1 = ball_volume(&d, c, r).unwrap();
        let v2 = ball_volume(&d, c, 1.5 * r).unwrap();
        prop_assert!(v1 <= v2 + 1e-12);
        prop_assert!(v1 <= std::f64::consts::PI * r * r * (1.0 + 1e-12));
        prop_assert!(v2 <= d.area() * (1.0 + 1e-12));
        let full = ball_volume(&d, c, 2.0 * brute_diameter(&d)).unwrap();
        prop_assert!((full - d.area()).abs() < 1e-9 * d.area());
        if d.distance_to_boundary(c) >= r {
            prop_assert!((v1 - std::f64::consts::PI * r * r).abs() < 1e-9 * v1);
        }
    }

    #[test]
    fn reflected_steps_stay_inside(d in domain(), seed in any::<u64>()) {
        let (r, c) = inradius_incenter(&d).unwrap();
        let index = EdgeIndex::new(&d, 0.5 * r).unwrap();
        let mut rng = path_rng(seed, 0);
        let mut ev = StepEvents::default();
        let mut x = c;
        let scale = brute_diameter(&d);
        for _ in 0..200 {
            let step = Point::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * scale * rng.random::<f64>();
            x = index.advance(x, x + step, &mut ev);
            prop_assert!(d.contains_tol(x, 1e-9 * scale), "{x:?}");
        }
    }

    #[test]
    fn envelope_fit_has_no_violations(
        pts in prop::collection::vec((0.0..30.0f64, -3.0..3.0f64), 2..60),
        b in 0.05..2.0f64,
    ) {
        let samples: Vec<GaussianSample> = pts.iter().map(|&(s, z)| GaussianSample { s, ratio: (z - b * s).exp() }).collect();
        let f = fit_envelopes(&samples).unwrap();
        prop_assert_eq!(f.violation_count, 0);
        prop_assert!(f.c1 > 0.0 && f.c1 <= f.c3 && f.c4 <= f.c2);
        for g in &samples {
            prop_assert!(g.ratio >= f.c1 * (-f.c2 * g.s).exp() * (1.0 - 1e-9));
            prop_assert!(g.ratio <= f.c3 * (-f.c4 * g.s).exp() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn report_verdict_is_recomputable(vals in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, 0..4u8), 1..6)) {
        let mut r = VerificationReport::new(LemmaId::MainTheorem, "p", serde_json::Value::Null, 0);
        let mut expect = true;
        for (i, &(v, t, rel)) in vals.iter().enumerate() {
            let (rel, ok) = match rel {
                0 => (Relation::Le, v <= t),
                1 => (Relation::Ge, v >= t),
                2 => (Relation::Lt, v < t),
                _ => (Relation::Gt, v > t),
            };
            expect &= ok;
            r.require(&format!("c{i}"), v, rel, &format!("t{i}"), t);
        }
        let r = r.finish(Instant::now());
        prop_assert_eq!(r.pass, expect);
        let back: VerificationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(back.audit(), expect);
    }

    #[test]
    fn sub_seeds_are_distinct(master in any::<u64>(), a in 0..1000u64, b in 0..1000u64) {
        prop_assume!(a != b);
        prop_assert_ne!(sub_seed(master, a), sub_seed(master, b));
        prop_assert_eq!(sub_seed(master, a), sub_seed(master, a));
    }

    #[test]
    fn domain_spec_round_trips(len in 1.0..30.0f64, h in 0.2..3.0f64, k in 8usize..512, seed in any::<u64>()) {
        for spec in [
            DomainSpec::rectangle(len, h),
            DomainSpec::ellipse(len, h).with_k(k),
            DomainSpec::stadium(len, h).with_k(k),
            DomainSpec::random_hull(12, len, h, seed),
        ] {
            let back = DomainSpec::from_json(&serde_json::to_string(&spec).unwrap()).unwrap();
            prop_assert_eq!(&back, &spec);
            let (a, b) = (spec.build().unwrap(), back.build().unwrap());
            prop_assert_eq!(a.vertices(), b.vertices());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mesh_tiles_the_domain(d in domain()) {
        let (r, _) = inradius_incenter(&d).unwrap();
        let m = triangulate(&d, 0.5 * r).unwrap();
        prop_assert!((m.total_area() - d.area()).abs() < 1e-9 * d.area());
        for t in 0..m.n_triangles() {
            prop_assert!(m.triangle_area(t) > 0.0);
            let (found, bary) = m.locate(m.triangle_centroid(t)).unwrap();
            prop_assert!(bary.iter().all(|&l| l > -1e-9));
            prop_assert!(found == t || bary.iter().any(|&l| l.abs() < 1e-9));
        }
    }

    #[test]
    fn eigenpair_is_mean_free_rayleigh_quotient(d in domain()) {
        let (r, _) = inradius_incenter(&d).unwrap();
        let m = triangulate(&d, 0.6 * r).unwrap();
        let pair = solve_mesh(&m, 1e-9).unwrap();
        let (k, mass) = assemble(&m);
        let ones = vec![1.0; m.n_nodes()];
        let norm = mass.form(&pair.phi, &pair.phi);
        prop_assert!((norm - 1.0).abs() < 1e-6);
        prop_assert!(mass.form(&pair.phi, &ones).abs() < 1e-6 * d.area().sqrt());
        prop_assert!((pair.rayleigh_quotient(&k, &mass) - pair.mu1).abs() < 1e-6 * pair.mu1);
        prop_assert!(pair.mu1 > 0.0 && pair.mu2 >= pair.mu1 * (1.0 - 1e-9));
    }

    #[test]
    fn ensembles_do_not_depend_on_worker_count(seed in any::<u64>()) {
        let d = ConvexDomain::rectangle(3.0, 1.0).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                simulate(&d, Point::new(1.0, 0.5), 0.05, 2.5e-4, 64, seed).unwrap().endpoints
            })
        };
        prop_assert_eq!(run(1), run(3));
    }
}

use cat0lab::space::busemann::busemann_numeric;
use cat0lab::space::{BusemannDirection, Edge, MetricTree, Point, Space, TreePoint, WeightedPointSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spaces() -> Vec<Space> {
    let line = MetricTree::new(
        2,
        vec![
            Edge { from: 0, to: Some(1), length: 2.0 },
            Edge { from: 0, to: None, length: f64::INFINITY },
            Edge { from: 1, to: None, length: f64::INFINITY },
        ],
    )
    .unwrap();
    vec![
        Space::euclidean(3),
        Space::tree(MetricTree::star(4, 1.5).unwrap()),
        Space::tree(line),
        Space::HyperbolicPlane,
        Space::Product(vec![Space::euclidean(1), Space::HyperbolicPlane]),
        Space::HyperbolicPlane.rescale(2.5).unwrap(),
    ]
}

fn triple(space: &Space, seed: u64) -> (Point, Point, Point) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        space.sample_point(&mut rng, 3.0),
        space.sample_point(&mut rng, 3.0),
        space.sample_point(&mut rng, 3.0),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn metric_axioms_and_cn(k in 0usize..6, seed in any::<u64>(), t in 0.0f64..=1.0) {
        let s = &spaces()[k];
        let (x, y, z) = triple(s, seed);
        let d = |a: &Point, b: &Point| s.distance(a, b).unwrap();
        prop_assert!(d(&x, &x) <= 1e-12);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-12 * (1.0 + d(&x, &y)));
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-9);
        let p = s.geodesic_point(&x, &y, t).unwrap();
        let dxy = d(&x, &y);
        prop_assert!((d(&x, &p) - t * dxy).abs() <= 1e-9 * (1.0 + dxy));
        prop_assert!((d(&p, &y) - (1.0 - t) * dxy).abs() <= 1e-9 * (1.0 + dxy));
        // CN(t): d(p,z)² ≤ (1-t)d(x,z)² + t d(y,z)² - t(1-t)d(x,y)²
        let rhs = (1.0 - t) * d(&x, &z).powi(2) + t * d(&y, &z).powi(2) - t * (1.0 - t) * dxy * dxy;
        prop_assert!(d(&p, &z).powi(2) <= rhs + 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn busemann_cocycle_and_limit(seed in any::<u64>(), a in -3.0f64..3.0, u in -1.0f64..1.0) {
        let cases = [
            (Space::euclidean(2), BusemannDirection::Euclidean { direction: vec![u, 1.0] }),
            (Space::HyperbolicPlane, BusemannDirection::HyperbolicInfinity),
            (Space::HyperbolicPlane, BusemannDirection::HyperbolicReal { a }),
            (spaces()[2].clone(), BusemannDirection::TreeRay { edge: 2 }),
        ];
        for (s, xi) in &cases {
            let (x, y, z) = triple(s, seed);
            let b = |p: &Point, q: &Point| s.busemann_value(xi, p, q).unwrap();
            prop_assert!((b(&x, &y) + b(&y, &z) - b(&x, &z)).abs() <= 1e-9);
            prop_assert!(b(&x, &y).abs() <= s.distance(&x, &y).unwrap() + 1e-9);
            let (lim, _) = busemann_numeric(s, xi, &x, &y, 1e-7).unwrap();
            prop_assert!((lim - b(&x, &y)).abs() <= 1e-6, "{} vs {}", lim, b(&x, &y));
        }
    }

    #[test]
    fn tree_barycenter_minimizes(seed in any::<u64>(), w in prop::collection::vec(0.05f64..1.0, 3)) {
        let tree = MetricTree::star(3, 2.0).unwrap();
        let s = Space::tree(tree.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Point> = (0..3).map(|_| s.sample_point(&mut rng, 2.0)).collect();
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|a| a / total).collect();
        let ws = WeightedPointSet::new(pts.clone(), w.clone()).unwrap();
        let b = s.barycenter(&ws, 1e-12).unwrap();
        let f = |p: &Point| -> f64 {
            pts.iter().zip(&w).map(|(q, a)| a * s.distance(p, q).unwrap().powi(2)).sum()
        };
        let fb = f(&b);
        // oracle: a fine grid over every leg
        for e in 0..3 {
            for i in 0..=400 {
                let p = Point::Tree(TreePoint { edge: e, offset: 2.0 * i as f64 / 400.0 });
                prop_assert!(fb <= f(&p) + 1e-9);
            }
        }
    }
}

#[test]
fn hyperbolic_closed_form_distance() {
    let s = Space::HyperbolicPlane;
    for y in [0.25, 1.0, 4.0, 100.0] {
        let d = s.distance(&Point::hyperbolic(0.0, y), &Point::hyperbolic(1.0, y)).unwrap();
        assert!((d - (1.0 + 1.0 / (2.0 * y * y)).acosh()).abs() < 1e-12);
    }
    let d = s.distance(&Point::hyperbolic(0.0, 1.0), &Point::hyperbolic(0.0, 1f64.exp())).unwrap();
    assert!((d - 1.0).abs() < 1e-12);
}

#[test]
fn rescaled_distances_scale() {
    let base = Space::tree(MetricTree::rooted_binary(3, 1.0).unwrap());
    let scaled = base.rescale(3.0).unwrap();
    let (x, y, _) = triple(&base, 4);
    let d0 = base.distance(&x, &y).unwrap();
    assert!((scaled.distance(&x, &y).unwrap() - 3.0 * d0).abs() < 1e-12);
    assert!(base.rescale(0.0).is_err());
}

#[test]
fn invalid_points_are_rejected() {
    let s = Space::HyperbolicPlane;
    assert!(s.point_from_json(&serde_json::json!([0.0, -1.0])).is_err());
    let e = Space::euclidean(2);
    assert!(e.point_from_json(&serde_json::json!([0.0])).is_err());
}

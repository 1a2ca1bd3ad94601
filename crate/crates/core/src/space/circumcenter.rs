//! Circumcenters: the minimizer of `y ↦ max_i d(y, x_i)` and the minimax radius.

use super::barycenter::{barycenter, WeightedPointSet};
use super::minimax::{minimize_max, Evaluation, MinimaxOptions};
use super::{Point, Space};
use crate::error::{domain, Error, Result};

/// Iterations of the geodesic core-set scheme used on products with tree factors.
pub const CORESET_ITER: usize = 20_000;

/// Exact on trees; surrogate-plus-minimax descent on Riemannian spaces; the
/// Bădoiu–Clarkson scheme `c ← [c, farthest point]_{1/(k+1)}` on products with
/// tree factors, whose radius error decays like `1/√k`.
pub fn circumcenter(space: &Space, points: &[Point], tol: f64) -> Result<(Point, f64)> {
    if points.is_empty() {
        return domain("circumcenter of an empty set");
    }
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    for p in points {
        space.check(p)?;
    }
    solve(space, points, tol)
}

fn radius(space: &Space, c: &Point, points: &[Point]) -> f64 {
    points.iter().map(|x| space.dist(c, x)).fold(0.0, f64::max)
}

fn solve(space: &Space, points: &[Point], tol: f64) -> Result<(Point, f64)> {
    if points.iter().all(|p| space.dist(p, &points[0]) == 0.0) {
        return Ok((points[0].clone(), 0.0));
    }
    match space {
        Space::Tree(t) => {
            let pts: Vec<_> = points
                .iter()
                .map(|p| match p {
                    Point::Tree(q) => *q,
                    _ => unreachable!("checked"),
                })
                .collect();
            let (c, r) = t.circumcenter(&pts);
            Ok((Point::Tree(c), r))
        }
        Space::Rescaled { base, lambda } => {
            let (c, r) = solve(base, points, tol)?;
            Ok((c, lambda * r))
        }
        _ if space.chart_dim().is_some() => riemannian(space, points, tol),
        _ => Ok(coreset(space, points)),
    }
}

fn riemannian(space: &Space, points: &[Point], tol: f64) -> Result<(Point, f64)> {
    let start = WeightedPointSet::uniform(points.to_vec())
        .and_then(|ws| barycenter(space, &ws, 1e-10))
        .unwrap_or_else(|_| points[0].clone());
    let eval = |y: &Point| -> Result<Evaluation> {
        let mut values = Vec::with_capacity(points.len());
        let mut grads = Vec::with_capacity(points.len());
        for x in points {
            let v = space.log(y, x)?;
            let d = space.dist(y, x);
            values.push(d);
            grads.push(if d > 0.0 {
                v.iter().map(|c| -c / d).collect()
            } else {
                vec![0.0; v.len()]
            });
        }
        Ok(Evaluation { values, grads })
    };
    let value = |y: &Point| Ok(radius(space, y, points));
    let opts = MinimaxOptions {
        smoothing: true,
        ..MinimaxOptions::new(tol, 20_000)
    };
    let out = minimize_max(space, start, eval, value, &opts)?;
    if !out.converged {
        return Err(Error::Convergence {
            message: format!("circumcenter descent stopped after {} iterations", out.iterations),
            last_iterate: format!("{:?}", out.point),
            gradient_norm: out.subgradient_norm,
        });
    }
    Ok((out.point, out.value))
}

fn coreset(space: &Space, points: &[Point]) -> (Point, f64) {
    let mut c = points[0].clone();
    let mut best = (radius(space, &c, points), c.clone());
    for k in 1..=CORESET_ITER {
        let far = points
            .iter()
            .max_by(|a, b| space.dist(&c, a).total_cmp(&space.dist(&c, b)))
            .expect("nonempty");
        c = space.geo(&c, far, 1.0 / (k as f64 + 1.0));
        let r = radius(space, &c, points);
        if r < best.0 {
            best = (r, c.clone());
        }
    }
    (best.1, best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MetricTree;

    #[test]
    fn single_point_and_square() {
        let e = Space::euclidean(2);
        let p = Point::Euclidean(vec![1.0, 2.0]);
        assert_eq!(circumcenter(&e, &[p.clone()], 1e-9).unwrap(), (p, 0.0));
        let corners: Vec<Point> = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .map(|&(x, y)| Point::Euclidean(vec![x, y]))
            .collect();
        let (c, r) = circumcenter(&e, &corners, 1e-10).unwrap();
        let c = c.as_euclidean().unwrap().to_vec();
        assert!(c[0].abs() < 1e-9 && c[1].abs() < 1e-9);
        assert!((r - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn obtuse_triangle_uses_long_side() {
        let e = Space::euclidean(2);
        let pts = vec![
            Point::Euclidean(vec![-1.0, 0.0]),
            Point::Euclidean(vec![1.0, 0.0]),
            Point::Euclidean(vec![0.0, 0.2]),
        ];
        let (c, r) = circumcenter(&e, &pts, 1e-10).unwrap();
        let c = c.as_euclidean().unwrap().to_vec();
        assert!(c[0].abs() < 1e-8 && c[1].abs() < 1e-8, "{c:?}");
        assert!((r - 1.0).abs() < 1e-8);
    }

    #[test]
    fn product_with_tree_factor() {
        let t = Space::tree(MetricTree::star(4, 1.0).unwrap());
        let tr = t.tree_ref().unwrap();
        let s = Space::Product(vec![t.clone(), Space::euclidean(1)]);
        let pts: Vec<Point> = (1..=4)
            .map(|i| {
                Point::Product(vec![
                    Point::Tree(tr.vertex(i).unwrap()),
                    Point::Euclidean(vec![if i % 2 == 0 { 1.0 } else { -1.0 }]),
                ])
            })
            .collect();
        let (_, r) = circumcenter(&s, &pts, 1e-6).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-2, "{r}");
    }
}

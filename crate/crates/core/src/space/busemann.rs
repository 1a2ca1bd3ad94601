//! Busemann functions `b_ξ(x, y) = lim_{t→∞} d(x, γ(t)) − d(y, γ(t))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Point, Space};
use crate::error::{domain, Error, Result};

/// A unit-speed geodesic ray, described per space kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BusemannDirection {
    /// `γ(t) = t·u / |u|` in Euclidean space.
    Euclidean { direction: Vec<f64> },
    /// `γ(t) = i·e^t`.
    HyperbolicInfinity,
    /// `γ(t) = a + i·e^{−t}`.
    HyperbolicReal { a: f64 },
    /// `γ(t)` = the point at offset `t` on a ray edge of a tree.
    TreeRay { edge: usize },
    /// `γ(t) = (γ_k(w_k t))_k` with `Σ w_k² = 1` (weights are normalized).
    Product {
        weights: Vec<f64>,
        factors: Vec<BusemannDirection>,
    },
}

impl BusemannDirection {
    /// Validates the direction against a space (ignoring rescaling).
    pub fn check(&self, space: &Space) -> Result<()> {
        match (self, space) {
            (_, Space::Rescaled { base, .. }) => self.check(base),
            (BusemannDirection::Euclidean { direction }, Space::Euclidean { dim }) => {
                if direction.len() != *dim {
                    return domain("direction has the wrong dimension");
                }
                let n = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
                if !(n.is_finite() && n > 0.0) {
                    return domain("direction must be a nonzero finite vector");
                }
                Ok(())
            }
            (BusemannDirection::HyperbolicInfinity, Space::HyperbolicPlane) => Ok(()),
            (BusemannDirection::HyperbolicReal { a }, Space::HyperbolicPlane) => {
                if a.is_finite() {
                    Ok(())
                } else {
                    domain("boundary point must be finite")
                }
            }
            (BusemannDirection::TreeRay { edge }, Space::Tree(t)) => match t.edges().get(*edge) {
                Some(e) if e.is_ray() => Ok(()),
                _ => domain(format!("edge {edge} is not a ray")),
            },
            (BusemannDirection::Product { weights, factors }, Space::Product(fs)) => {
                if weights.len() != fs.len() || factors.len() != fs.len() {
                    return domain("product direction needs one weight and factor per factor space");
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return domain("product weights must be nonnegative");
                }
                if weights.iter().all(|w| *w == 0.0) {
                    return domain("product weights must not all vanish");
                }
                factors
                    .iter()
                    .zip(fs)
                    .zip(weights)
                    .filter(|(_, w)| **w > 0.0)
                    .try_for_each(|((d, f), _)| d.check(f))
            }
            _ => domain(format!("direction {self:?} does not fit {}", space.name())),
        }
    }

    fn unit_weights(weights: &[f64]) -> Vec<f64> {
        let n = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        weights.iter().map(|w| w / n).collect()
    }
}

/// Closed-form Busemann function.
pub fn busemann_value(space: &Space, xi: &BusemannDirection, x: &Point, y: &Point) -> Result<f64> {
    space.check(x)?;
    space.check(y)?;
    xi.check(space)?;
    Ok(closed_form(space, xi, x, y))
}

fn closed_form(space: &Space, xi: &BusemannDirection, x: &Point, y: &Point) -> f64 {
    match (space, xi, x, y) {
        (Space::Rescaled { base, lambda }, _, _, _) => lambda * closed_form(base, xi, x, y),
        (
            Space::Euclidean { .. },
            BusemannDirection::Euclidean { direction },
            Point::Euclidean(a),
            Point::Euclidean(b),
        ) => {
            let n = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
            a.iter()
                .zip(b)
                .zip(direction)
                .map(|((p, q), u)| (q - p) * u / n)
                .sum()
        }
        (Space::HyperbolicPlane, BusemannDirection::HyperbolicInfinity, Point::Hyperbolic(z), Point::Hyperbolic(w)) => {
            (w.im / z.im).ln()
        }
        (Space::HyperbolicPlane, BusemannDirection::HyperbolicReal { a }, Point::Hyperbolic(z), Point::Hyperbolic(w)) => {
            // the height function of the horoball family at a is Im(−1/(z − a))
            let h = |p: Complex64| p.im / (p - a).norm_sqr();
            (h(*w) / h(*z)).ln()
        }
        (Space::Tree(t), BusemannDirection::TreeRay { edge }, Point::Tree(p), Point::Tree(q)) => {
            let root = t.edges()[*edge].from;
            let h = |r: &super::TreePoint| {
                if r.edge == *edge {
                    -r.offset
                } else {
                    t.distance_to_vertex(r, root)
                }
            };
            h(p) - h(q)
        }
        (
            Space::Product(fs),
            BusemannDirection::Product { weights, factors },
            Point::Product(ps),
            Point::Product(qs),
        ) => {
            let w = BusemannDirection::unit_weights(weights);
            fs.iter()
                .zip(factors)
                .zip(ps.iter().zip(qs))
                .zip(&w)
                .filter(|(_, w)| **w > 0.0)
                .map(|(((f, d), (p, q)), w)| w * closed_form(f, d, p, q))
                .sum()
        }
        _ => f64::NAN,
    }
}

/// `γ(t)` for the ray of `xi`.
pub fn ray_point(space: &Space, xi: &BusemannDirection, t: f64) -> Result<Point> {
    xi.check(space)?;
    Ok(ray(space, xi, t))
}

fn ray(space: &Space, xi: &BusemannDirection, t: f64) -> Point {
    match (space, xi) {
        (Space::Rescaled { base, lambda }, _) => ray(base, xi, t / lambda),
        (Space::Euclidean { .. }, BusemannDirection::Euclidean { direction }) => {
            let n = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
            Point::Euclidean(direction.iter().map(|u| t * u / n).collect())
        }
        (_, BusemannDirection::HyperbolicInfinity) => Point::hyperbolic(0.0, t.exp()),
        (_, BusemannDirection::HyperbolicReal { a }) => Point::hyperbolic(*a, (-t).exp()),
        (Space::Tree(tr), BusemannDirection::TreeRay { edge }) => Point::Tree(tr.canonical(*edge, t)),
        (Space::Product(fs), BusemannDirection::Product { weights, factors }) => {
            let w = BusemannDirection::unit_weights(weights);
            Point::Product(
                fs.iter()
                    .zip(factors)
                    .zip(&w)
                    .map(|((f, d), w)| {
                        if *w > 0.0 {
                            ray(f, d, w * t)
                        } else {
                            // a zero weight keeps that factor at the ray's base point
                            ray_base(f, d)
                        }
                    })
                    .collect(),
            )
        }
        _ => unreachable!("direction checked"),
    }
}

fn ray_base(space: &Space, xi: &BusemannDirection) -> Point {
    match (space, xi) {
        (Space::Euclidean { dim }, _) => Point::Euclidean(vec![0.0; *dim]),
        (Space::HyperbolicPlane, _) => Point::hyperbolic(0.0, 1.0),
        (Space::Tree(t), _) => Point::Tree(t.vertex(0).expect("nonempty tree")),
        (Space::Rescaled { base, .. }, _) => ray_base(base, xi),
        (Space::Product(fs), BusemannDirection::Product { factors, .. }) => {
            Point::Product(fs.iter().zip(factors).map(|(f, d)| ray_base(f, d)).collect())
        }
        (Space::Product(fs), _) => {
            Point::Product(fs.iter().map(|f| ray_base(f, xi)).collect())
        }
    }
}

/// Limit of `d(x, γ(t)) − d(y, γ(t))` along `t = 2^k`.
///
/// Euclidean rays converge like `1/t`, so each value is Richardson-extrapolated
/// (`2f(2t) − f(t)`); exponentially converging rays are unaffected. Stops once
/// two successive extrapolants differ by less than `tol/4`. Returns the value
/// and the last difference.
pub fn busemann_numeric(
    space: &Space,
    xi: &BusemannDirection,
    x: &Point,
    y: &Point,
    tol: f64,
) -> Result<(f64, f64)> {
    space.check(x)?;
    space.check(y)?;
    xi.check(space)?;
    let eval = |t: f64| {
        let g = ray(space, xi, t);
        space.dist(x, &g) - space.dist(y, &g)
    };
    let mut f_prev = eval(1.0);
    let mut r_prev = f64::NAN;
    let mut best = (f64::NAN, f64::INFINITY);
    for k in 1..=50 {
        let f = eval(2f64.powi(k));
        let r = 2.0 * f - f_prev;
        let diff = (r - r_prev).abs();
        if diff < best.1 {
            best = (r, diff);
        }
        if diff < tol / 4.0 {
            return Ok((r, diff));
        }
        // cancellation in the difference grows like ε·t; past the floor the
        // best extrapolant so far is the answer
        if diff > 1e3 * best.1 && best.1 < tol {
            return Ok(best);
        }
        f_prev = f;
        r_prev = r;
    }
    Err(Error::Convergence {
        message: "Busemann limit did not settle along t = 2^k, k ≤ 50".into(),
        last_iterate: format!("{}", best.0),
        gradient_norm: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Edge, MetricTree};

    #[test]
    fn closed_forms() {
        let h = Space::HyperbolicPlane;
        let b = busemann_value(
            &h,
            &BusemannDirection::HyperbolicInfinity,
            &Point::hyperbolic(0.0, 1.0),
            &Point::hyperbolic(0.0, 2.0),
        )
        .unwrap();
        assert!((b - 2f64.ln()).abs() < 1e-15);
        let e = Space::euclidean(2);
        let b = busemann_value(
            &e,
            &BusemannDirection::Euclidean { direction: vec![1.0, 0.0] },
            &Point::Euclidean(vec![0.0, 0.0]),
            &Point::Euclidean(vec![3.0, 4.0]),
        )
        .unwrap();
        assert_eq!(b, 3.0);
    }

    #[test]
    fn numeric_matches_closed_form() {
        let h = Space::HyperbolicPlane;
        let pts = [Point::hyperbolic(0.0, 1.0), Point::hyperbolic(0.7, 2.0), Point::hyperbolic(-3.0, 0.4)];
        for xi in [
            BusemannDirection::HyperbolicInfinity,
            BusemannDirection::HyperbolicReal { a: 0.5 },
        ] {
            for x in &pts {
                for y in &pts {
                    let exact = busemann_value(&h, &xi, x, y).unwrap();
                    let (num, _) = busemann_numeric(&h, &xi, x, y, 1e-8).unwrap();
                    assert!((exact - num).abs() < 1e-7, "{xi:?} {exact} {num}");
                }
            }
        }
        let t = Space::tree(
            MetricTree::new(
                3,
                vec![
                    Edge { from: 0, to: Some(1), length: 1.0 },
                    Edge { from: 1, to: Some(2), length: 2.0 },
                    Edge { from: 1, to: None, length: f64::INFINITY },
                ],
            )
            .unwrap(),
        );
        let tr = t.tree_ref().unwrap();
        let xi = BusemannDirection::TreeRay { edge: 2 };
        let x = Point::Tree(tr.vertex(2).unwrap());
        let y = Point::Tree(tr.canonical(2, 3.0));
        assert_eq!(busemann_value(&t, &xi, &x, &y).unwrap(), 5.0);
        let (num, _) = busemann_numeric(&t, &xi, &x, &y, 1e-9).unwrap();
        assert!((num - 5.0).abs() < 1e-9);
    }

    #[test]
    fn wrong_direction_rejected() {
        let h = Space::HyperbolicPlane;
        let x = Point::hyperbolic(0.0, 1.0);
        assert!(busemann_value(&h, &BusemannDirection::TreeRay { edge: 0 }, &x, &x).is_err());
        let e = Space::euclidean(2);
        let o = Point::Euclidean(vec![0.0, 0.0]);
        let zero = BusemannDirection::Euclidean { direction: vec![0.0, 0.0] };
        assert!(busemann_value(&e, &zero, &o, &o).is_err());
    }
}

//! Barycenters: minimizers of `y ↦ Σ α_i d(x_i, y)²`.

use super::{Point, Space};
use crate::error::{domain, Error, Result};

pub const MAX_ITER: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPointSet {
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl WeightedPointSet {
    /// Weights must be nonnegative and sum to 1 within `1e-9`; they are then
    /// rescaled to sum to 1.
    pub fn new(points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return domain("weighted point set must be nonempty");
        }
        if points.len() != weights.len() {
            return domain(format!("{} points but {} weights", points.len(), weights.len()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return domain("weights must be finite and nonnegative");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return domain(format!("weights sum to {total}, not 1"));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { points, weights })
    }

    pub fn uniform(points: Vec<Point>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Projection onto product factor `k`.
    fn factor(&self, k: usize) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| match p {
                    Point::Product(ps) => ps[k].clone(),
                    other => other.clone(),
                })
                .collect(),
            weights: self.weights.clone(),
        }
    }
}

/// `Σ α_i d(x_i, y)²`.
pub fn objective(space: &Space, ws: &WeightedPointSet, y: &Point) -> f64 {
    ws.points
        .iter()
        .zip(&ws.weights)
        .map(|(x, a)| {
            let d = space.dist(x, y);
            a * d * d
        })
        .sum()
}

/// Closed form on Euclidean space, exact per-edge minimization on trees,
/// damped Karcher iteration `y ← exp_y(θ Σ α_i log_y x_i)` on the hyperbolic
/// plane, factor by factor on products. Rescaling does not move the minimizer.
///
/// Iterative solves stop once `|Σ α_i log_y x_i| < tol` (half the gradient
/// norm of the objective) and fail after [`MAX_ITER`] iterations.
pub fn barycenter(space: &Space, ws: &WeightedPointSet, tol: f64) -> Result<Point> {
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    for p in &ws.points {
        space.check(p)?;
    }
    solve(space, ws, tol)
}

fn solve(space: &Space, ws: &WeightedPointSet, tol: f64) -> Result<Point> {
    match space {
        Space::Euclidean { dim } => {
            let mut out = vec![0.0; *dim];
            for (p, a) in ws.points.iter().zip(&ws.weights) {
                if let Point::Euclidean(v) = p {
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += a * x;
                    }
                }
            }
            Ok(Point::Euclidean(out))
        }
        Space::Tree(t) => {
            let pts: Vec<_> = ws
                .points
                .iter()
                .map(|p| match p {
                    Point::Tree(q) => *q,
                    _ => unreachable!("checked"),
                })
                .collect();
            Ok(Point::Tree(t.barycenter(&pts, &ws.weights)))
        }
        Space::HyperbolicPlane => karcher(space, ws, tol),
        Space::Product(fs) => Ok(Point::Product(
            fs.iter()
                .enumerate()
                .map(|(k, f)| solve(f, &ws.factor(k), tol))
                .collect::<Result<_>>()?,
        )),
        Space::Rescaled { base, .. } => solve(base, ws, tol),
    }
}

/// Damped Riemannian gradient descent with Armijo backtracking.
pub(crate) fn karcher(space: &Space, ws: &WeightedPointSet, tol: f64) -> Result<Point> {
    let start = ws
        .weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("nonempty");
    let mut y = ws.points[start].clone();
    let mut f = objective(space, ws, &y);
    let mut theta = 1.0;
    let mut gnorm = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let g = half_gradient(space, ws, &y)?;
        gnorm = norm(&g);
        if gnorm < tol {
            return Ok(y);
        }
        let mut accepted = false;
        while theta > 1e-20 {
            let step: Vec<f64> = g.iter().map(|c| theta * c).collect();
            let cand = space.exp(&y, &step)?;
            let fc = objective(space, ws, &cand);
            let expected = 2e-4 * theta * gnorm * gnorm;
            // below the resolution of `f` the gradient norm is the only usable signal
            let ok = if expected > 1e-13 * f.max(1e-300) {
                fc <= f - expected
            } else {
                norm(&half_gradient(space, ws, &cand)?) < gnorm
            };
            if ok {
                y = cand;
                f = fc;
                accepted = true;
                break;
            }
            theta *= 0.5;
        }
        if !accepted {
            // no representable decrease left: stationary to working precision
            if gnorm <= 1e-9 * (1.0 + f.sqrt()) {
                return Ok(y);
            }
            break;
        }
        theta = (2.0 * theta).min(1.0);
    }
    Err(Error::Convergence {
        message: "barycenter iteration did not reach the tolerance".into(),
        last_iterate: format!("{y:?}"),
        gradient_norm: gnorm,
    })
}

/// `Σ α_i log_y x_i`, minus half the gradient of the objective.
pub(crate) fn half_gradient(space: &Space, ws: &WeightedPointSet, y: &Point) -> Result<Vec<f64>> {
    let mut g: Vec<f64> = Vec::new();
    for (x, a) in ws.points.iter().zip(&ws.weights) {
        let v = space.log(y, x)?;
        if g.is_empty() {
            g = vec![0.0; v.len()];
        }
        for (gi, vi) in g.iter_mut().zip(&v) {
            *gi += a * vi;
        }
    }
    Ok(g)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

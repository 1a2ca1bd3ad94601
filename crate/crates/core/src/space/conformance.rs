//! Sampled conformance checks: metric axioms, the CN inequality and the
//! barycenter variance inequality.

use rand::Rng;
use serde::Serialize;

use super::{Point, Space, WeightedPointSet};
use crate::error::{domain, Result};
use crate::measure::walk::walk_rng;

/// Largest violations found. Each is divided by `max(1, D²)` for the
/// largest distance `D` in its sample, so the tolerance is scale-free.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformanceReport {
    pub space: String,
    pub triples: usize,
    pub identity: f64,
    pub symmetry: f64,
    pub triangle: f64,
    pub cn: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ConformanceReport {
    pub fn max_violation(&self) -> f64 {
        [self.identity, self.symmetry, self.triangle, self.cn]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// `d(m, z)² ≤ ½d(x, z)² + ½d(y, z)² − ¼d(x, y)²` for the midpoint `m` of `[x, y]`.
pub fn cn_defect(space: &Space, x: &Point, y: &Point, z: &Point) -> f64 {
    let m = space.geo(x, y, 0.5);
    let dxy = space.dist_sq(x, y);
    let lhs = space.dist_sq(&m, z);
    let rhs = 0.5 * space.dist_sq(x, z) + 0.5 * space.dist_sq(y, z) - 0.25 * dxy;
    lhs - rhs
}

/// Checks the metric axioms and the CN inequality on `triples` random triples.
pub fn check_space(space: &Space, triples: usize, scale: f64, seed: u64, tol: f64) -> Result<ConformanceReport> {
    if triples == 0 {
        return domain("need at least one triple");
    }
    let mut rng = walk_rng(seed, 0x5ace);
    let (mut identity, mut symmetry, mut triangle, mut cn) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..triples {
        let x = space.sample_point(&mut rng, scale);
        let y = space.sample_point(&mut rng, scale);
        let z = space.sample_point(&mut rng, scale);
        let (dxy, dyx, dyz, dxz) = (space.dist(&x, &y), space.dist(&y, &x), space.dist(&y, &z), space.dist(&x, &z));
        let norm = 1.0f64.max(dxy.max(dyz).max(dxz).powi(2));
        identity = identity.max(space.dist(&x, &x) / norm);
        symmetry = symmetry.max((dxy - dyx).abs() / norm);
        triangle = triangle.max((dxz - dxy - dyz) / norm);
        cn = cn.max(cn_defect(space, &x, &y, &z) / norm);
    }
    let mut report = ConformanceReport {
        space: space.name(),
        triples,
        identity,
        symmetry,
        triangle,
        cn,
        tol,
        pass: false,
    };
    report.pass = report.max_violation() <= tol;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceReport {
    pub samples: usize,
    /// Largest `Σ α_i d(x_i, b)² + d(y, b)² − Σ α_i d(x_i, y)²`, relative as above.
    pub max_defect: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Checks `Σ α_i d(x_i, b)² + d(y, b)² ≤ Σ α_i d(x_i, y)²` at sampled `y`.
pub fn check_variance_inequality(
    space: &Space,
    ws: &WeightedPointSet,
    samples: usize,
    scale: f64,
    seed: u64,
    tol: f64,
) -> Result<VarianceReport> {
    let b = space.barycenter(ws, 1e-10)?;
    let mut rng = walk_rng(seed, 0x7a5);
    let base: f64 = ws
        .points()
        .iter()
        .zip(ws.weights())
        .map(|(p, w)| w * space.dist_sq(p, &b))
        .sum();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..samples {
        // every fourth sample hugs the barycenter, where the inequality is tight
        let y = if i % 4 == 0 {
            let far = space.sample_point(&mut rng, scale);
            space.geo(&b, &far, rng.gen_range(0.0..0.05))
        } else {
            space.sample_point(&mut rng, scale)
        };
        let rhs: f64 = ws
            .points()
            .iter()
            .zip(ws.weights())
            .map(|(p, w)| w * space.dist_sq(p, &y))
            .sum();
        let defect = base + space.dist_sq(&y, &b) - rhs;
        worst = worst.max(defect / rhs.max(1.0));
    }
    Ok(VarianceReport {
        samples,
        max_defect: worst,
        tol,
        pass: worst <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MetricTree;

    #[test]
    fn model_spaces_conform() {
        let spaces = [
            Space::euclidean(3),
            Space::HyperbolicPlane,
            Space::tree(MetricTree::star(5, 1.5).unwrap()),
            Space::Product(vec![Space::euclidean(1), Space::HyperbolicPlane]),
        ];
        for s in &spaces {
            let r = check_space(s, 500, 2.0, 3, 1e-9).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn euclidean_cn_is_an_equality() {
        let s = Space::euclidean(2);
        let p = |a: f64, b: f64| Point::Euclidean(vec![a, b]);
        let d = cn_defect(&s, &p(0.0, 0.0), &p(2.0, 0.0), &p(1.0, 3.0));
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn variance_inequality_on_the_plane() {
        let s = Space::HyperbolicPlane;
        let ws = WeightedPointSet::new(
            vec![Point::hyperbolic(0.0, 1.0), Point::hyperbolic(2.0, 0.5), Point::hyperbolic(-1.0, 3.0)],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let r = check_variance_inequality(&s, &ws, 400, 2.0, 1, 1e-7).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

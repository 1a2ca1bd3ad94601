//! Sampling test for degenerate barycentric simplices: `σ(Δ) = σ(∂Δ)`,
//! where `σ` maps a weight vector to the barycenter of the weighted vertices.

use serde::{Deserialize, Serialize};

use super::barycenter::{barycenter, WeightedPointSet};
use super::{Point, Space};
use crate::error::{domain, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegeneracyConfig {
    /// Grid points per edge of the simplex, endpoints included.
    pub grid: usize,
    /// Interior image counts as matched within this distance of `σ(∂Δ)`.
    pub tol: f64,
    /// Largest number of vertices accepted.
    pub max_vertices: usize,
    /// Budget on interior plus boundary grid points.
    pub max_samples: usize,
    pub barycenter_tol: f64,
}

impl Default for DegeneracyConfig {
    fn default() -> Self {
        Self {
            grid: 21,
            tol: 1e-6,
            max_vertices: 6,
            max_samples: 200_000,
            barycenter_tol: 1e-13,
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let mut r: usize = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// All weight vectors `k / m` with `Σ k_i = m` over `parts` coordinates.
fn compositions(m: usize, parts: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>) {
    if cur.len() + 1 == parts {
        let used: usize = cur.iter().sum();
        cur.push(m - used);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    let used: usize = cur.iter().sum();
    for k in 0..=(m - used) {
        cur.push(k);
        compositions(m, parts, out, cur);
        cur.pop();
    }
}

/// Maps every interior grid weight through the barycenter and checks it lies
/// within `tol` of the image of the boundary. The boundary distance is found
/// by a facet grid followed by pattern search on each facet.
pub fn simplex_is_degenerate(space: &Space, points: &[Point], cfg: &DegeneracyConfig) -> Result<bool> {
    let k = points.len();
    if k < 2 {
        return domain("a simplex needs at least two vertices");
    }
    if k > cfg.max_vertices {
        return domain(format!("{k} vertices exceed the cap of {}", cfg.max_vertices));
    }
    if cfg.grid < 3 {
        return domain("grid needs at least 3 points per edge");
    }
    for p in points {
        space.check(p)?;
    }
    let m = cfg.grid - 1;
    let total = binomial(m + k - 1, k - 1);
    if total > cfg.max_samples {
        return Err(Error::Resource(format!(
            "{total} grid samples exceed the budget of {}",
            cfg.max_samples
        )));
    }
    let mut all = Vec::new();
    compositions(m, k, &mut all, &mut Vec::new());
    let sigma = |w: &[f64]| -> Result<Point> {
        let ws = WeightedPointSet::new(points.to_vec(), w.to_vec())?;
        barycenter(space, &ws, cfg.barycenter_tol)
    };
    let to_w = |c: &[usize]| -> Vec<f64> { c.iter().map(|&x| x as f64 / m as f64).collect() };
    let mut boundary: Vec<(Vec<f64>, Point)> = Vec::new();
    let mut interior: Vec<Vec<f64>> = Vec::new();
    for c in &all {
        let w = to_w(c);
        if c.contains(&0) {
            let img = sigma(&w)?;
            boundary.push((w, img));
        } else {
            interior.push(w);
        }
    }
    for w in &interior {
        let b = sigma(w)?;
        if !matched(space, &b, &boundary, &sigma, m, cfg.tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn matched(
    space: &Space,
    target: &Point,
    boundary: &[(Vec<f64>, Point)],
    sigma: &impl Fn(&[f64]) -> Result<Point>,
    m: usize,
    tol: f64,
) -> Result<bool> {
    let k = boundary[0].0.len();
    // best grid point on each facet {w_f = 0}
    let mut starts: Vec<Option<(f64, &Vec<f64>)>> = vec![None; k];
    for (w, img) in boundary {
        let d = space.dist(target, img);
        if d <= tol {
            return Ok(true);
        }
        for f in 0..k {
            if w[f] == 0.0 && starts[f].is_none_or(|(bd, _)| d < bd) {
                starts[f] = Some((d, w));
            }
        }
    }
    let mut order: Vec<(f64, usize)> = starts
        .iter()
        .enumerate()
        .filter_map(|(f, s)| s.map(|(d, _)| (d, f)))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (d0, f) in order {
        let mut w = starts[f].expect("present").1.clone();
        let mut d = d0;
        let free: Vec<usize> = (0..k).filter(|&i| i != f).collect();
        let mut step = 1.0 / m as f64;
        while step > 1e-13 && d > tol {
            let mut improved = false;
            for &i in &free {
                for &j in &free {
                    if i == j || w[j] < step {
                        continue;
                    }
                    let mut cand = w.clone();
                    cand[i] += step;
                    cand[j] -= step;
                    let dc = space.dist(target, &sigma(&cand)?);
                    if dc < d {
                        w = cand;
                        d = dc;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if d <= tol {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MetricTree;

    #[test]
    fn euclidean_cases() {
        let e = Space::euclidean(2);
        let cfg = DegeneracyConfig::default();
        let tri = [
            Point::Euclidean(vec![0.0, 0.0]),
            Point::Euclidean(vec![1.0, 0.0]),
            Point::Euclidean(vec![0.0, 1.0]),
        ];
        assert!(!simplex_is_degenerate(&e, &tri, &cfg).unwrap());
        let line = [
            Point::Euclidean(vec![0.0, 0.0]),
            Point::Euclidean(vec![1.0, 1.0]),
            Point::Euclidean(vec![3.0, 3.0]),
        ];
        assert!(simplex_is_degenerate(&e, &line, &cfg).unwrap());
    }

    #[test]
    fn tree_triangles_are_degenerate() {
        let t = Space::tree(MetricTree::star(3, 1.0).unwrap());
        let tr = t.tree_ref().unwrap();
        let pts: Vec<Point> = (1..=3).map(|i| Point::Tree(tr.vertex(i).unwrap())).collect();
        assert!(simplex_is_degenerate(&t, &pts, &DegeneracyConfig::default()).unwrap());
    }

    #[test]
    fn budget() {
        let e = Space::euclidean(5);
        let pts: Vec<Point> = (0..6)
            .map(|i| Point::Euclidean((0..5).map(|j| if i == j + 1 { 1.0 } else { 0.0 }).collect()))
            .collect();
        let cfg = DegeneracyConfig { max_samples: 100, ..Default::default() };
        assert!(matches!(simplex_is_degenerate(&e, &pts, &cfg), Err(Error::Resource(_))));
    }
}

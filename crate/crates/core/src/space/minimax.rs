//! Minimization of `F = max_i f_i` for geodesically convex `f_i` on spaces
//! with exponential charts.
//!
//! A softmax surrogate with decreasing temperature brings the iterate close;
//! then ε-steepest descent polishes: the search direction is minus the
//! min-norm element of the convex hull of the gradients of the ε-active
//! pieces, and ε shrinks whenever no decrease is found.

use super::barycenter::norm;
use super::{Point, Space};
use crate::error::Result;

/// Values and chart gradients of all pieces at one point.
pub(crate) struct Evaluation {
    pub values: Vec<f64>,
    pub grads: Vec<Vec<f64>>,
}

impl Evaluation {
    fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct MinimaxOptions {
    /// Stop once the min-norm subgradient of the `eps_min`-active set is below this.
    pub tol: f64,
    pub max_iter: usize,
    pub smoothing: bool,
    /// Keep iterates in the closed ball `(center, radius)`.
    pub ball: Option<(Point, f64)>,
    /// Return as soon as the value drops to this level.
    pub stop_below: f64,
}

impl MinimaxOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            smoothing: false,
            ball: None,
            stop_below: f64::NEG_INFINITY,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct MinimaxOutcome {
    pub point: Point,
    pub value: f64,
    pub subgradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn project(space: &Space, ball: &Option<(Point, f64)>, y: Point) -> Point {
    match ball {
        Some((c, r)) => {
            let d = space.dist(c, &y);
            if d <= *r {
                y
            } else {
                space.geo(c, &y, r / d)
            }
        }
        None => y,
    }
}

pub(crate) fn minimize_max<E, V>(
    space: &Space,
    start: Point,
    eval: E,
    value: V,
    opts: &MinimaxOptions,
) -> Result<MinimaxOutcome>
where
    E: Fn(&Point) -> Result<Evaluation>,
    V: Fn(&Point) -> Result<f64>,
{
    let mut y = project(space, &opts.ball, start);
    let done = |y: Point, f: f64, gnorm: f64, iterations, converged| MinimaxOutcome {
        point: y,
        value: f,
        subgradient_norm: gnorm,
        iterations,
        converged,
    };
    let mut f = value(&y)?;
    if f <= opts.stop_below {
        return Ok(done(y, f, f64::NAN, 0, true));
    }
    let mut iterations = 0;
    if opts.smoothing {
        let ev = eval(&y)?;
        let spread = ev.max().abs().max(1e-12);
        let mut temp = 0.25 * spread;
        while temp > 1e-9 * spread && iterations < opts.max_iter / 2 {
            for _ in 0..50 {
                iterations += 1;
                let ev = eval(&y)?;
                let (fs, g) = softmax(&ev, temp);
                let gn = norm(&g);
                if gn < 1e-3 * opts.tol {
                    break;
                }
                let mut step = temp.max(1e-12) / gn;
                let mut moved = false;
                while step * gn > 1e-14 * (1.0 + spread) {
                    let v: Vec<f64> = g.iter().map(|c| -step * c).collect();
                    let cand = project(space, &opts.ball, space.exp(&y, &v)?);
                    let (fc, _) = softmax(&eval(&cand)?, temp);
                    if fc < fs - 1e-4 * step * gn * gn {
                        y = cand;
                        moved = true;
                        break;
                    }
                    step *= 0.5;
                }
                if !moved {
                    break;
                }
                let fy = value(&y)?;
                if fy <= opts.stop_below {
                    return Ok(done(y, fy, f64::NAN, iterations, true));
                }
            }
            temp *= 0.2;
        }
        f = value(&y)?;
    }

    let mut eps = (0.1 * f.abs()).max(1e-6);
    let eps_min = 1e-15 * (1.0 + f.abs());
    let mut step = eps.max(1e-6);
    let mut gnorm = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        let ev = eval(&y)?;
        f = ev.max();
        let active: Vec<&Vec<f64>> = ev
            .values
            .iter()
            .zip(&ev.grads)
            .filter(|(v, _)| **v >= f - eps)
            .map(|(_, g)| g)
            .collect();
        let g = min_norm_point(&active);
        gnorm = norm(&g);
        if gnorm < opts.tol {
            if eps <= eps_min {
                return Ok(done(y, f, gnorm, iterations, true));
            }
            eps = (eps * 0.1).max(eps_min);
            continue;
        }
        let mut s = step.max(1e-3 * eps / gnorm);
        let mut accepted = false;
        while s * gnorm > 1e-16 * (1.0 + f.abs()) {
            let v: Vec<f64> = g.iter().map(|c| -s * c / gnorm).collect();
            let cand = project(space, &opts.ball, space.exp(&y, &v)?);
            let fc = value(&cand)?;
            if fc < f - 1e-12 * (1.0 + f.abs()) && fc < f - 1e-6 * s * gnorm {
                y = cand;
                f = fc;
                accepted = true;
                step = 2.0 * s;
                break;
            }
            s *= 0.5;
        }
        if accepted {
            if f <= opts.stop_below {
                return Ok(done(y, f, gnorm, iterations, true));
            }
        } else {
            if eps <= eps_min {
                // ε-stationary at the smallest ε we trust
                let converged = gnorm < opts.tol.sqrt();
                return Ok(done(y, f, gnorm, iterations, converged));
            }
            eps = (eps * 0.1).max(eps_min);
            step = eps.max(1e-12);
        }
    }
    Ok(done(y, f, gnorm, iterations, false))
}

/// Surrogate `T log Σ exp(f_i/T)` and its gradient.
fn softmax(ev: &Evaluation, temp: f64) -> (f64, Vec<f64>) {
    let m = ev.max();
    let ws: Vec<f64> = ev.values.iter().map(|v| ((v - m) / temp).exp()).collect();
    let z: f64 = ws.iter().sum();
    let dim = ev.grads.first().map_or(0, Vec::len);
    let mut g = vec![0.0; dim];
    for (w, gi) in ws.iter().zip(&ev.grads) {
        for (a, b) in g.iter_mut().zip(gi) {
            *a += w / z * b;
        }
    }
    (m + temp * z.ln(), g)
}

/// Minimum-norm point of the convex hull of `vs`.
///
/// The minimizer lies in the relative interior of a face spanned by at most
/// `dim + 1` of the vectors, so small faces are enumerated and solved exactly;
/// large instances fall back to Frank–Wolfe with away steps.
pub(crate) fn min_norm_point(vs: &[&Vec<f64>]) -> Vec<f64> {
    let k = vs.len();
    if k == 0 {
        return Vec::new();
    }
    let dim = vs[0].len();
    if k == 1 {
        return vs[0].clone();
    }
    let max_face = (dim + 1).min(k);
    let mut count: u64 = 0;
    for j in 1..=max_face {
        count = count.saturating_add(binomial(k as u64, j as u64));
    }
    if count > 50_000 {
        return frank_wolfe(vs);
    }
    let gram: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| dot(vs[i], vs[j])).collect())
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset = Vec::with_capacity(max_face);
    for size in 1..=max_face {
        enumerate(k, size, 0, &mut subset, &mut |s| {
            if let Some(lambda) = affine_min_norm(&gram, s) {
                let p = combine(vs, s, &lambda);
                let n = dot(&p, &p);
                if best.as_ref().is_none_or(|(bn, _)| n < *bn) {
                    best = Some((n, p));
                }
            }
        });
    }
    best.map(|(_, p)| p).unwrap_or_else(|| frank_wolfe(vs))
}

fn binomial(n: u64, k: u64) -> u64 {
    let mut r: u64 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

fn enumerate(n: usize, size: usize, from: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == size {
        f(cur);
        return;
    }
    for i in from..n {
        if n - i < size - cur.len() {
            break;
        }
        cur.push(i);
        enumerate(n, size, i + 1, cur, f);
        cur.pop();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(vs: &[&Vec<f64>], s: &[usize], lambda: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; vs[0].len()];
    for (&i, l) in s.iter().zip(lambda) {
        for (a, b) in p.iter_mut().zip(vs[i].iter()) {
            *a += l * b;
        }
    }
    p
}

/// Weights of the min-norm point of the affine hull of `s`, if they are all
/// positive and the face is nondegenerate. Solves the KKT system
/// `[G 1; 1ᵀ 0] [λ; ν] = [0; 1]`.
fn affine_min_norm(gram: &[Vec<f64>], s: &[usize]) -> Option<Vec<f64>> {
    let m = s.len();
    if m == 1 {
        return Some(vec![1.0]);
    }
    let n = m + 1;
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(n);
    for &i in s {
        let mut row: Vec<f64> = s.iter().map(|&j| gram[i][j]).collect();
        row.push(1.0);
        row.push(0.0);
        a.push(row);
    }
    let mut last = vec![1.0; m];
    last.push(0.0);
    last.push(1.0);
    a.push(last);
    let scale = s.iter().map(|&i| gram[i][i]).fold(1.0, f64::max);
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let factor = a[r][col] / a[col][col];
                if factor != 0.0 {
                    for c in col..=n {
                        a[r][c] -= factor * a[col][c];
                    }
                }
            }
        }
    }
    let lambda: Vec<f64> = (0..m).map(|r| a[r][n] / a[r][r]).collect();
    lambda.iter().all(|l| *l > 0.0).then_some(lambda)
}

fn frank_wolfe(vs: &[&Vec<f64>]) -> Vec<f64> {
    let k = vs.len();
    let mut lambda = vec![1.0 / k as f64; k];
    let idx: Vec<usize> = (0..k).collect();
    let mut p = combine(vs, &idx, &lambda);
    for _ in 0..5000 {
        let scores: Vec<f64> = vs.iter().map(|v| dot(v, &p)).collect();
        let (s, _) = scores
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let (a, _) = scores
            .iter()
            .enumerate()
            .filter(|(i, _)| lambda[*i] > 0.0)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let pp = dot(&p, &p);
        let fw_gap = pp - scores[s];
        if fw_gap < 1e-15 * (1.0 + pp) {
            break;
        }
        let away_gap = scores[a] - pp;
        let (dir, max_step, toward) = if fw_gap >= away_gap {
            let d: Vec<f64> = vs[s].iter().zip(&p).map(|(x, y)| x - y).collect();
            (d, 1.0, Some(s))
        } else {
            let d: Vec<f64> = p.iter().zip(vs[a].iter()).map(|(x, y)| x - y).collect();
            (d, lambda[a] / (1.0 - lambda[a]).max(1e-300), None)
        };
        let dd = dot(&dir, &dir);
        if dd == 0.0 {
            break;
        }
        let gamma = (-dot(&p, &dir) / dd).clamp(0.0, max_step);
        match toward {
            Some(s) => {
                lambda.iter_mut().for_each(|l| *l *= 1.0 - gamma);
                lambda[s] += gamma;
            }
            None => {
                lambda.iter_mut().for_each(|l| *l *= 1.0 + gamma);
                lambda[a] -= gamma;
                lambda[a] = lambda[a].max(0.0);
            }
        }
        for (pi, di) in p.iter_mut().zip(&dir) {
            *pi += gamma * di;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_norm_of_segment_and_triangle() {
        let a = vec![1.0, 1.0];
        let b = vec![-1.0, 1.0];
        let p = min_norm_point(&[&a, &b]);
        assert!((p[0]).abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
        let c = vec![0.0, -1.0];
        let p = min_norm_point(&[&a, &b, &c]);
        assert!(norm(&p) < 1e-15);
        let d = vec![3.0, 0.0];
        let p = min_norm_point(&[&d, &a]);
        // the line through (3,0), (1,1) is closest to the origin past (1,1)
        let q = [1.0, 1.0];
        assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
    }

    #[test]
    fn frank_wolfe_agrees_with_enumeration() {
        let vs: Vec<Vec<f64>> = vec![vec![2.0, 1.0, 0.5], vec![1.0, -1.0, 1.0], vec![1.5, 0.2, -1.0], vec![3.0, 3.0, 3.0]];
        let refs: Vec<&Vec<f64>> = vs.iter().collect();
        let exact = min_norm_point(&refs);
        let fw = frank_wolfe(&refs);
        assert!((norm(&exact) - norm(&fw)).abs() < 1e-6);
    }
}

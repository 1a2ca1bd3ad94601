//! Search for the small-displacement points `v_n` of the Shalom dichotomy.
//!
//! Starting from `w_1` with `δ(w_1) ≤ 1/(2n)`, stage `k` looks in the ball
//! `B(w_k, r)`, `r = 2^{-k}`, for a point with `δ ≤ r/(2n)`. A hit becomes
//! `w_{k+1}`; a miss certifies `(v_n, r_n) = (w_k, r)`. Since `δ` is convex
//! along geodesics, every new point is pulled back along the segment from the
//! previous one to where `δ` first reaches the target, which keeps `δ(w_k)`
//! close to its bound instead of overshooting.

use std::cell::Cell;

use rand::Rng;
use serde::Serialize;

use super::{IsometricAction, Isometry};
use crate::error::{domain, Error, Result};
use crate::group::GeneratingSet;
use crate::space::minimax::{minimize_max, Evaluation, MinimaxOptions};
use crate::space::{Point, Space};

/// Below this, displacement values are dominated by roundoff and a failed
/// ball search says nothing about the geometry.
const DELTA_RESOLUTION: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShalomOptions {
    /// Descents per ball, the center included.
    pub starts: usize,
    /// Uniform random points per ball added to the adversarial set.
    pub ball_samples: usize,
    pub descent_iter: usize,
    /// Budget on displacement evaluations.
    pub budget: usize,
    /// Halving stages before the sequence is declared Cauchy.
    pub max_stages: usize,
    pub seed: u64,
    /// Rays of trees are searched up to this offset.
    pub ray_cap: f64,
}

impl Default for ShalomOptions {
    fn default() -> Self {
        Self {
            starts: 32,
            ball_samples: 256,
            descent_iter: 200,
            budget: 5_000_000,
            max_stages: 48,
            seed: 0,
            ray_cap: 1e3,
        }
    }
}

/// `δ(v_n) ≤ r_n/n`, and no sampled point of `B(v_n, r_n)` has `δ < r_n/(2n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShalomCertificate {
    pub n: usize,
    pub v_n: Point,
    pub r_n: f64,
    pub delta_at_vn: f64,
    pub sampled_min_delta_in_ball: f64,
    pub samples: usize,
    pub stage: usize,
}

impl ShalomCertificate {
    /// `δ(v_n) ≤ r_n/n`, checked on the recorded numbers.
    pub fn bound_holds(&self) -> bool {
        self.delta_at_vn <= self.r_n / self.n as f64
    }

    /// `min δ ≥ r_n/(2n)` over the recorded sample set.
    pub fn sampled_holds(&self) -> bool {
        self.sampled_min_delta_in_ball >= self.r_n / (2.0 * self.n as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ShalomOutcome {
    Certificate(ShalomCertificate),
    /// `δ` vanished exactly, or the halving sequence ran through all stages or
    /// below the resolution at which `δ` can be evaluated.
    FixedPointFound { point: Point, delta: f64, stages: usize },
    /// The descent settled above `1/(2n)`.
    DeltaBoundedBelow { bound: f64, point: Point },
    Inconclusive { reason: String, best_delta: f64, evaluations: usize },
}

struct Search<'a> {
    action: &'a IsometricAction,
    isos: Vec<Isometry>,
    evals: Cell<usize>,
    opts: &'a ShalomOptions,
}

impl Search<'_> {
    fn space(&self) -> &Space {
        self.action.space()
    }

    fn pieces(&self, x: &Point) -> Vec<f64> {
        self.evals.set(self.evals.get() + 1);
        let s = self.space();
        self.isos.iter().map(|g| s.dist(x, &g.apply(s, x))).collect()
    }

    fn delta(&self, x: &Point) -> f64 {
        self.pieces(x).into_iter().fold(0.0, f64::max)
    }

    fn over_budget(&self) -> bool {
        self.evals.get() > self.opts.budget
    }

    /// Descent on `δ`, optionally confined to a ball, stopping at `stop_below`.
    /// Returns the end point, its displacement and whether the descent settled.
    fn descend(&self, from: &Point, ball: Option<(Point, f64)>, stop_below: f64, max_iter: usize) -> Result<(Point, f64, bool)> {
        match self.space().unscaled().0 {
            Space::Tree(_) => Ok(self.tree_search(from, ball, stop_below)),
            _ if self.space().chart_dim().is_some() => {
                let space = self.space();
                let k = space.chart_dim().expect("chart");
                let h = 1e-6;
                let eval = |y: &Point| -> Result<Evaluation> {
                    let values = self.pieces(y);
                    let mut grads = vec![vec![0.0; k]; values.len()];
                    for i in 0..k {
                        let mut e = vec![0.0; k];
                        e[i] = h;
                        let plus = self.pieces(&space.exp(y, &e)?);
                        e[i] = -h;
                        let minus = self.pieces(&space.exp(y, &e)?);
                        for (j, g) in grads.iter_mut().enumerate() {
                            g[i] = (plus[j] - minus[j]) / (2.0 * h);
                        }
                    }
                    Ok(Evaluation { values, grads })
                };
                let value = |y: &Point| Ok(self.delta(y));
                let opts = MinimaxOptions {
                    ball,
                    stop_below,
                    ..MinimaxOptions::new(1e-10, max_iter)
                };
                let out = minimize_max(space, from.clone(), eval, value, &opts)?;
                Ok((out.point, out.value, out.converged))
            }
            _ => Err(Error::Unsupported(
                "displacement search on products with tree factors".into(),
            )),
        }
    }

    /// `δ` is convex along every edge, so golden-section search per edge
    /// (clipped to the ball) finds the minimum over the tree.
    fn tree_search(&self, from: &Point, ball: Option<(Point, f64)>, stop_below: f64) -> (Point, f64, bool) {
        let t = self.space().unscaled().0.tree_ref().expect("tree").clone();
        let lambda = self.space().unscaled().1;
        let mut best = (from.clone(), self.delta(from));
        for (e, _) in t.edges().iter().enumerate() {
            if best.1 <= stop_below {
                break;
            }
            let Some((lo, hi)) = edge_interval(&t, e, &ball, lambda, self.opts.ray_cap) else {
                continue;
            };
            let at = |s: f64| Point::Tree(t.canonical(e, s));
            let (mut a, mut b) = (lo, hi);
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                if b - a <= 1e-15 * (1.0 + b.abs()) {
                    break;
                }
                let c = b - phi * (b - a);
                let d = a + phi * (b - a);
                if self.delta(&at(c)) <= self.delta(&at(d)) {
                    b = d;
                } else {
                    a = c;
                }
            }
            for s in [lo, hi, 0.5 * (a + b)] {
                let p = at(s);
                let v = self.delta(&p);
                if v < best.1 {
                    best = (p, v);
                }
            }
        }
        (best.0, best.1, true)
    }

    fn sample_in_ball<R: Rng>(&self, rng: &mut R, center: &Point, r: f64) -> Result<Point> {
        let space = self.space();
        if let Some(k) = space.chart_dim() {
            let v = loop {
                let v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                    break v;
                }
            };
            let v: Vec<f64> = v.into_iter().map(|x| x * r).collect();
            return space.exp(center, &v);
        }
        let (base, lambda) = space.unscaled();
        let Some(t) = base.tree_ref() else {
            return Err(Error::Unsupported("ball sampling on products with tree factors".into()));
        };
        let ball = Some((center.clone(), r));
        let edges: Vec<(usize, f64, f64)> = (0..t.edges().len())
            .filter_map(|e| edge_interval(t, e, &ball, lambda, self.opts.ray_cap).map(|(a, b)| (e, a, b)))
            .collect();
        let (e, a, b) = edges[rng.gen_range(0..edges.len())];
        Ok(Point::Tree(t.canonical(e, rng.gen_range(a..=b))))
    }

    /// First point of `[from, to]` with `δ ≤ target`; `δ(to) ≤ target` is required.
    fn pull_back(&self, from: &Point, to: &Point, target: f64) -> Point {
        if self.delta(from) <= target {
            return from.clone();
        }
        let space = self.space();
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.delta(&space.geo(from, to, mid)) <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        space.geo(from, to, hi)
    }
}

/// The part of edge `e` inside the ball (all of it without a ball), in offsets.
fn edge_interval(
    t: &crate::space::MetricTree,
    e: usize,
    ball: &Option<(Point, f64)>,
    lambda: f64,
    ray_cap: f64,
) -> Option<(f64, f64)> {
    let len = t.search_length(e, ray_cap);
    match ball {
        None => Some((0.0, len)),
        Some((Point::Tree(c), r)) => {
            let x = t.edge_coordinate(e, c);
            let r = r / lambda;
            let (a, b) = ((x - r).max(0.0), (x + r).min(len));
            (a <= b).then_some((a, b))
        }
        Some(_) => None,
    }
}

/// Runs the halving search for one `n`. `start` seeds the initial descent.
pub fn shalom_search(
    action: &IsometricAction,
    gens: &GeneratingSet,
    n: usize,
    start: &Point,
    opts: &ShalomOptions,
) -> Result<ShalomOutcome> {
    if n == 0 {
        return domain("n must be positive");
    }
    if opts.starts == 0 {
        return domain("need at least one start per ball");
    }
    action.space().check(start)?;
    let isos = gens
        .elements()
        .iter()
        .map(|s| action.isometry(s))
        .collect::<Result<Vec<_>>>()?;
    let search = Search {
        action,
        isos,
        evals: Cell::new(0),
        opts,
    };
    let nf = n as f64;
    let first = 1.0 / (2.0 * nf);
    let (p0, d0, settled) = search.descend(start, None, first, opts.descent_iter * 10)?;
    if d0 == 0.0 {
        return Ok(ShalomOutcome::FixedPointFound {
            point: p0,
            delta: 0.0,
            stages: 0,
        });
    }
    if d0 > first {
        return Ok(if settled {
            ShalomOutcome::DeltaBoundedBelow { bound: d0, point: p0 }
        } else {
            ShalomOutcome::Inconclusive {
                reason: format!("initial descent stopped at δ = {d0} above 1/(2n) without settling"),
                best_delta: d0,
                evaluations: search.evals.get(),
            }
        });
    }
    let mut w = search.pull_back(start, &p0, first);
    let mut rng = super::sampling_rng(opts.seed, n as u64);
    for k in 1..=opts.max_stages {
        let dw = search.delta(&w);
        if dw == 0.0 {
            return Ok(ShalomOutcome::FixedPointFound {
                point: w,
                delta: 0.0,
                stages: k - 1,
            });
        }
        let r = 0.5f64.powi(k as i32);
        let target = r / (2.0 * nf);
        if target < DELTA_RESOLUTION {
            return Ok(ShalomOutcome::FixedPointFound {
                point: w,
                delta: dw,
                stages: k - 1,
            });
        }
        let mut sampled_min = f64::INFINITY;
        let mut samples = 0;
        let mut found: Option<Point> = None;
        let mut starts = vec![w.clone()];
        for _ in 0..opts.ball_samples + opts.starts - 1 {
            let p = search.sample_in_ball(&mut rng, &w, r)?;
            let d = search.delta(&p);
            samples += 1;
            sampled_min = sampled_min.min(d);
            if d <= target {
                found = Some(p);
                break;
            }
            if starts.len() < opts.starts {
                starts.push(p);
            }
        }
        if found.is_none() {
            for s in &starts {
                let (p, d, _) = search.descend(s, Some((w.clone(), r)), target, opts.descent_iter)?;
                samples += 1;
                sampled_min = sampled_min.min(d);
                if d <= target {
                    found = Some(p);
                    break;
                }
                if search.over_budget() {
                    break;
                }
            }
        }
        match found {
            Some(p) => w = search.pull_back(&w, &p, target),
            None if search.over_budget() => {
                return Ok(ShalomOutcome::Inconclusive {
                    reason: format!("evaluation budget {} exhausted at stage {k}", opts.budget),
                    best_delta: dw,
                    evaluations: search.evals.get(),
                })
            }
            None => {
                return Ok(ShalomOutcome::Certificate(ShalomCertificate {
                    n,
                    v_n: w,
                    r_n: r,
                    delta_at_vn: dw,
                    sampled_min_delta_in_ball: sampled_min,
                    samples,
                    stage: k,
                }))
            }
        }
    }
    let delta = search.delta(&w);
    Ok(ShalomOutcome::FixedPointFound {
        point: w,
        delta,
        stages: opts.max_stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::examples;

    #[test]
    fn rotation_finds_fixed_point() {
        let ex = examples::rotation_plane(4);
        let out = shalom_search(&ex.action, &ex.generators, 3, &ex.start, &ShalomOptions::default()).unwrap();
        let ShalomOutcome::FixedPointFound { point, delta, .. } = out else {
            panic!("{out:?}")
        };
        assert!(delta < 1e-12);
        let p = point.as_euclidean().unwrap().to_vec();
        assert!(p[0].hypot(p[1]) < 1e-12);
    }

    #[test]
    fn translation_is_bounded_below() {
        let ex = examples::translation_line(0.75);
        let out = shalom_search(&ex.action, &ex.generators, 2, &ex.start, &ShalomOptions::default()).unwrap();
        assert_eq!(
            out,
            ShalomOutcome::DeltaBoundedBelow {
                bound: 0.75,
                point: Point::Euclidean(vec![0.0])
            }
        );
    }

    #[test]
    fn parabolic_certificate() {
        let ex = examples::parabolic();
        let out = shalom_search(&ex.action, &ex.generators, 4, &ex.start, &ShalomOptions::default()).unwrap();
        let ShalomOutcome::Certificate(c) = out else {
            panic!("{out:?}")
        };
        assert!(c.bound_holds() && c.sampled_holds(), "{c:?}");
        let y = c.v_n.as_hyperbolic().unwrap().im;
        let closed = (1.0 + 1.0 / (2.0 * y * y)).acosh();
        assert!((closed - c.delta_at_vn).abs() < 1e-12);
    }

    #[test]
    fn star_tree_fixed_point() {
        let ex = examples::star_rotation(4);
        let out = shalom_search(&ex.action, &ex.generators, 2, &ex.start, &ShalomOptions::default()).unwrap();
        assert!(matches!(out, ShalomOutcome::FixedPointFound { delta, .. } if delta == 0.0), "{out:?}");
    }
}

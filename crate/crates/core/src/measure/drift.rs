//! The sequences `Lⁿ = Σ d(e,g) μ^{*n}(g)`, their running maxima `L̃ⁿ`, and
//! the drift estimate `min_{n ≤ n_max} Lⁿ/n`.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::walk::{walk_rng, StepSampler};
use super::{checked_add, checked_mul, ratio_to_f64, Measure, Weight};
use crate::error::{Error, Result};
use crate::group::WordMetric;

const CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DriftMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Vectors are indexed by `n = 0..=n_max`, with `L⁰ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftSeries {
    pub n_max: usize,
    pub mode: DriftMode,
    pub ln: Vec<f64>,
    pub ltilde: Vec<f64>,
    /// Standard error of `ln[n]`; zero in exact mode.
    pub stderr: Vec<f64>,
    pub ln_exact: Option<Vec<Weight>>,
    pub ltilde_exact: Option<Vec<Weight>>,
    /// `min_{1 ≤ n ≤ n_max} Lⁿ/n`.
    pub drift_estimate: f64,
    /// The `n` attaining `drift_estimate`.
    pub drift_argmin: usize,
    pub drift_estimate_exact: Option<Weight>,
    /// `L^{n_max}/n_max`.
    pub last_ratio: f64,
}

impl DriftSeries {
    fn assemble(
        n_max: usize,
        mode: DriftMode,
        ln: Vec<f64>,
        stderr: Vec<f64>,
        ln_exact: Option<Vec<Weight>>,
    ) -> Self {
        let mut ltilde = Vec::with_capacity(ln.len());
        let mut run = 0.0f64;
        for &l in &ln {
            run = run.max(l);
            ltilde.push(run);
        }
        let ltilde_exact = ln_exact.as_ref().map(|ex| {
            let mut run = Ratio::new(0u128, 1);
            ex.iter()
                .map(|l| {
                    if *l > run {
                        run = *l;
                    }
                    run
                })
                .collect::<Vec<_>>()
        });
        let (drift_argmin, drift_estimate_exact) = match &ln_exact {
            Some(ex) => {
                let mut best = 1;
                for n in 2..=n_max {
                    // L^n/n < L^best/best  ⇔  L^n·best < L^best·n
                    if ex[n] * Ratio::from_integer(best as u128)
                        < ex[best] * Ratio::from_integer(n as u128)
                    {
                        best = n;
                    }
                }
                (best, Some(ex[best] / Ratio::from_integer(best as u128)))
            }
            None => {
                let mut best = 1;
                for n in 2..=n_max {
                    if ln[n] / (n as f64) < ln[best] / (best as f64) {
                        best = n;
                    }
                }
                (best, None)
            }
        };
        let drift_estimate = match &drift_estimate_exact {
            Some(r) => ratio_to_f64(r),
            None => ln[drift_argmin] / drift_argmin as f64,
        };
        Self {
            n_max,
            mode,
            last_ratio: ln[n_max] / n_max as f64,
            ltilde,
            ln,
            stderr,
            ln_exact,
            ltilde_exact,
            drift_estimate,
            drift_argmin,
            drift_estimate_exact,
        }
    }

    /// Standard error of `drift_estimate`.
    pub fn drift_stderr(&self) -> f64 {
        self.stderr[self.drift_argmin] / self.drift_argmin as f64
    }

    /// Rows `(n, Lⁿ, L̃ⁿ, Lⁿ/n, stderr)` for `n = 1..=n_max`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, f64, f64, f64, f64)> + '_ {
        (1..=self.n_max).map(|n| {
            (
                n,
                self.ln[n],
                self.ltilde[n],
                self.ln[n] / n as f64,
                self.stderr[n],
            )
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,Ln,Ltilde,Ln_over_n,stderr\n");
        for (n, l, lt, r, se) in self.rows() {
            out.push_str(&format!("{n},{l},{lt},{r},{se}\n"));
        }
        out
    }
}

/// Computes the drift series up to `n_max`.
///
/// Exact mode splits `n = a + b` with `a = ⌈n/2⌉` and sums
/// `μ^{*a}(g) μ^{*b}(h) |gh|` over pairs, so only powers up to `⌈n_max/2⌉`
/// are ever materialized. Monte Carlo mode averages `|X_n|` over independent
/// seeded walks and reports standard errors.
pub fn drift_series(
    mu: &Measure,
    metric: &WordMetric,
    n_max: usize,
    mode: DriftMode,
    max_support: usize,
) -> Result<DriftSeries> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    if mu.group() != metric.group() {
        return Err(Error::Domain("measure and metric live on different groups".into()));
    }
    match mode {
        DriftMode::Exact => exact(mu, metric, n_max, max_support),
        DriftMode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::Domain("Monte Carlo needs at least 2 samples".into()));
            }
            monte_carlo(mu, metric, n_max, samples, seed)
        }
    }
}

fn exact(mu: &Measure, metric: &WordMetric, n_max: usize, max_support: usize) -> Result<DriftSeries> {
    let half = n_max.div_ceil(2);
    let powers = mu.convolution_powers(half, max_support)?;
    let raw: Vec<(u128, Vec<(&crate::group::Element, u128)>)> = powers
        .iter()
        .map(|m| {
            let (d, nums) = m.raw();
            (d, nums.iter().map(|(g, &n)| (g, n)).collect())
        })
        .collect();
    let mut ln_exact = vec![Ratio::new(0u128, 1)];
    for n in 1..=n_max {
        let a = n.div_ceil(2);
        let b = n - a;
        let (da, ref pa) = raw[a - 1];
        let value = if b == 0 {
            let mut acc = 0u128;
            for (g, w) in pa {
                acc = checked_add(acc, checked_mul(*w, metric.length(g)? as u128)?)?;
            }
            Ratio::new(acc, da)
        } else {
            let (db, ref pb) = raw[b - 1];
            let acc = pa
                .par_iter()
                .map(|(g, wa)| -> Result<u128> {
                    let mut inner = 0u128;
                    for (h, wb) in pb {
                        let l = metric.product_length(g, h)? as u128;
                        inner = checked_add(inner, checked_mul(*wb, l)?)?;
                    }
                    checked_mul(*wa, inner)
                })
                .try_reduce(|| 0u128, |x, y| checked_add(x, y))?;
            Ratio::new(acc, checked_mul(da, db)?)
        };
        ln_exact.push(value);
    }
    let ln: Vec<f64> = ln_exact.iter().map(ratio_to_f64).collect();
    let stderr = vec![0.0; n_max + 1];
    Ok(DriftSeries::assemble(
        n_max,
        DriftMode::Exact,
        ln,
        stderr,
        Some(ln_exact),
    ))
}

fn monte_carlo(
    mu: &Measure,
    metric: &WordMetric,
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<DriftSeries> {
    let group = mu.group();
    let sampler = StepSampler::new(mu);
    let chunks: Vec<(usize, usize)> = (0..samples)
        .step_by(CHUNK)
        .map(|s| (s, (s + CHUNK).min(samples)))
        .collect();
    // integer sums make the reduction exact and order independent
    let partial: Vec<(Vec<u64>, Vec<u128>)> = chunks
        .par_iter()
        .map(|&(lo, hi)| -> Result<(Vec<u64>, Vec<u128>)> {
            let mut sum = vec![0u64; n_max + 1];
            let mut sumsq = vec![0u128; n_max + 1];
            for walk in lo..hi {
                let mut rng = walk_rng(seed, walk as u64);
                let mut x = group.identity();
                for n in 1..=n_max {
                    x = group.mul_unchecked(&x, sampler.sample(&mut rng));
                    let d = metric.length(&x)? as u64;
                    sum[n] += d;
                    sumsq[n] += (d as u128) * (d as u128);
                }
            }
            Ok((sum, sumsq))
        })
        .collect::<Result<_>>()?;
    let mut sum = vec![0u64; n_max + 1];
    let mut sumsq = vec![0u128; n_max + 1];
    for (s, q) in partial {
        for n in 0..=n_max {
            sum[n] += s[n];
            sumsq[n] += q[n];
        }
    }
    let nf = samples as f64;
    let ln: Vec<f64> = sum.iter().map(|&s| s as f64 / nf).collect();
    let stderr = (0..=n_max)
        .map(|n| {
            let mean = ln[n];
            let var = ((sumsq[n] as f64) - nf * mean * mean).max(0.0) / (nf - 1.0);
            (var / nf).sqrt()
        })
        .collect();
    Ok(DriftSeries::assemble(
        n_max,
        DriftMode::MonteCarlo { samples, seed },
        ln,
        stderr,
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Group, Limits};

    #[test]
    fn simple_walk_on_z() {
        let z = Group::Lattice { rank: 1 };
        let mu = Measure::uniform(&z, z.generators().elements(), true).unwrap();
        let metric = WordMetric::standard(&z, Limits::default());
        let s = drift_series(&mu, &metric, 4, DriftMode::Exact, 1000).unwrap();
        let ex = s.ln_exact.as_ref().unwrap();
        assert_eq!(ex[1], Ratio::new(1, 1));
        assert_eq!(ex[2], Ratio::new(1, 1));
        assert_eq!(ex[3], Ratio::new(3, 2));
        assert_eq!(ex[4], Ratio::new(3, 2));
        assert_eq!(s.drift_argmin, 4);
        assert_eq!(s.drift_estimate, 0.375);
        assert_eq!(s.last_ratio, 0.375);
    }

    #[test]
    fn free_group_two_steps() {
        let f2 = Group::Free { rank: 2 };
        let mu = Measure::uniform(&f2, f2.generators().elements(), true).unwrap();
        let metric = WordMetric::standard(&f2, Limits::default());
        let s = drift_series(&mu, &metric, 3, DriftMode::Exact, 1000).unwrap();
        assert_eq!(s.ln_exact.as_ref().unwrap()[2], Ratio::new(3, 2));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let f2 = Group::Free { rank: 2 };
        let mu = Measure::uniform(&f2, f2.generators().elements(), true).unwrap();
        let metric = WordMetric::standard(&f2, Limits::default());
        let mode = DriftMode::MonteCarlo {
            samples: 600,
            seed: 11,
        };
        let a = drift_series(&mu, &metric, 20, mode, 0).unwrap();
        let b = drift_series(&mu, &metric, 20, mode, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ln[1], 1.0);
        assert_eq!(a.stderr[1], 0.0);
        assert!(a.ln_exact.is_none());
    }

    #[test]
    fn mismatched_groups() {
        let z = Group::Lattice { rank: 1 };
        let mu = Measure::dirac(&z);
        let metric = WordMetric::standard(&Group::Free { rank: 1 }, Limits::default());
        assert!(drift_series(&mu, &metric, 2, DriftMode::Exact, 10).is_err());
        let metric = WordMetric::standard(&z, Limits::default());
        assert!(drift_series(&mu, &metric, 0, DriftMode::Exact, 10).is_err());
        let s = drift_series(&mu, &metric, 3, DriftMode::Exact, 10).unwrap();
        assert_eq!(s.drift_estimate, 0.0);
    }
}

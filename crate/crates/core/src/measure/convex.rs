//! Convex combinations `ν = Σ_{n ≤ N} a_n μ^{*n}` and the drift bound
//! `l(ν) ≤ (1 + Σ n a_n) l(μ)`.

use num_rational::Ratio;
use num_traits::Zero;

use super::drift::{drift_series, DriftMode, DriftSeries};
use super::{checked_ratio_add, checked_ratio_mul, ratio_to_f64, Measure, Weight};
use crate::error::{Error, Result};
use crate::group::WordMetric;

/// Coefficients `a_1, ..., a_N`. Without `renormalize` they must sum to 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexCombinationSpec {
    pub coefficients: Vec<Weight>,
    pub renormalize: bool,
}

impl ConvexCombinationSpec {
    pub fn new(coefficients: Vec<Weight>, renormalize: bool) -> Self {
        Self {
            coefficients,
            renormalize,
        }
    }

    /// `a_n ∝ 2^{-n}` for `n ≤ n_trunc`, renormalized.
    pub fn geometric_half(n_trunc: usize) -> Self {
        Self {
            coefficients: (1..=n_trunc)
                .map(|n| Ratio::new(1, 1u128 << n))
                .collect(),
            renormalize: true,
        }
    }

    /// Normalized coefficients and the pre-normalization mass.
    pub fn normalized(&self) -> Result<(Vec<Weight>, Weight)> {
        if self.coefficients.is_empty() {
            return Err(Error::Schema("at least one coefficient is required".into()));
        }
        let mut total = Weight::zero();
        for a in &self.coefficients {
            total = checked_ratio_add(total, *a)?;
        }
        if total.is_zero() {
            return Err(Error::Schema("coefficients are all zero".into()));
        }
        if total == Ratio::from_integer(1) {
            return Ok((self.coefficients.clone(), total));
        }
        if !self.renormalize {
            return Err(Error::Schema(format!(
                "coefficients sum to {total}, not 1, and renormalization is off"
            )));
        }
        let inv = Ratio::new(*total.denom(), *total.numer());
        let coeffs = self
            .coefficients
            .iter()
            .map(|a| checked_ratio_mul(*a, inv))
            .collect::<Result<Vec<_>>>()?;
        Ok((coeffs, total))
    }
}

#[derive(Clone, Debug)]
pub struct ConvexCombination {
    pub measure: Measure,
    pub truncation: usize,
    pub coefficients: Vec<Weight>,
    pub renormalized: bool,
    /// `Σ a_n` before renormalization.
    pub mass_before_renormalization: Weight,
    /// `Σ n a_n`.
    pub mean_index: Weight,
    /// `1 + Σ n a_n`.
    pub factor: Weight,
    pub second_moment: Weight,
    /// Whether `supp ν ⊇ ball(N) ∖ {e}` for the metric's generating set.
    pub covers_ball: bool,
}

/// Builds `ν` from a symmetric `μ`.
pub fn build_convex_combination(
    mu: &Measure,
    spec: &ConvexCombinationSpec,
    metric: &WordMetric,
    max_support: usize,
) -> Result<ConvexCombination> {
    if !mu.is_symmetric() {
        return Err(Error::Domain("convex combinations need a symmetric measure".into()));
    }
    let (coefficients, mass) = spec.normalized()?;
    let n_trunc = coefficients.len();
    let powers = mu.convolution_powers(n_trunc, max_support)?;
    let parts: Vec<(Weight, &Measure)> = coefficients.iter().copied().zip(powers.iter()).collect();
    let measure = Measure::mixture(&parts)?;
    let mut mean_index = Weight::zero();
    for (i, a) in coefficients.iter().enumerate() {
        mean_index = checked_ratio_add(mean_index, checked_ratio_mul(*a, Ratio::from_integer(i as u128 + 1))?)?;
    }
    let factor = checked_ratio_add(mean_index, Ratio::from_integer(1))?;
    let second_moment = measure.moment_exact(metric, 2)?;
    let ball = metric.ball(n_trunc, None)?;
    let e = mu.group().identity();
    let covers_ball = ball
        .elements
        .keys()
        .filter(|g| **g != e)
        .all(|g| measure.weight_f64(g) > 0.0);
    Ok(ConvexCombination {
        measure,
        truncation: n_trunc,
        coefficients,
        renormalized: mass != Ratio::from_integer(1),
        mass_before_renormalization: mass,
        mean_index,
        factor,
        second_moment,
        covers_ball,
    })
}

/// One row of the exact per-step check `Lᵏ(ν) ≤ (1 + Σ n a_n) L̃ᵏ(μ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerStepBound {
    pub k: usize,
    pub lhs: Weight,
    pub rhs: Weight,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct ConvCombReport {
    /// `drift_estimate(ν)`.
    pub lhs: f64,
    /// `(1 + Σ n a_n) · drift_estimate(μ)`.
    pub rhs: f64,
    pub factor: f64,
    pub lhs_stderr: f64,
    pub rhs_stderr: f64,
    /// Exact mode: every per-step bound holds. Monte Carlo mode:
    /// `lhs ≤ rhs + 3·sqrt(se_lhs² + se_rhs²)`.
    pub holds: bool,
    /// `lhs ≤ rhs` on the point estimates.
    pub estimates_ordered: bool,
    pub per_step: Option<Vec<PerStepBound>>,
    pub mu_series: DriftSeries,
    pub nu_series: DriftSeries,
    pub combination: ConvexCombination,
}

/// Compares both drifts on the same metric. In Monte Carlo mode `μ` walks use
/// `seed` and `ν` walks use `seed + 1`.
pub fn verify_conv_comb_bound(
    mu: &Measure,
    spec: &ConvexCombinationSpec,
    metric: &WordMetric,
    n_max: usize,
    mode: DriftMode,
    max_support: usize,
) -> Result<ConvCombReport> {
    let combination = build_convex_combination(mu, spec, metric, max_support)?;
    let nu_mode = match mode {
        DriftMode::Exact => DriftMode::Exact,
        DriftMode::MonteCarlo { samples, seed } => DriftMode::MonteCarlo {
            samples,
            seed: seed.wrapping_add(1),
        },
    };
    let mu_series = drift_series(mu, metric, n_max, mode, max_support)?;
    let nu_series = drift_series(&combination.measure, metric, n_max, nu_mode, max_support)?;
    let factor = ratio_to_f64(&combination.factor);
    let lhs = nu_series.drift_estimate;
    let rhs = factor * mu_series.drift_estimate;
    let lhs_stderr = nu_series.drift_stderr();
    let rhs_stderr = factor * mu_series.drift_stderr();
    let (holds, per_step) = match (&nu_series.ln_exact, &mu_series.ltilde_exact) {
        (Some(lnu), Some(ltmu)) => {
            let mut rows = Vec::with_capacity(n_max);
            for k in 1..=n_max {
                let bound = checked_ratio_mul(combination.factor, ltmu[k])?;
                rows.push(PerStepBound {
                    k,
                    lhs: lnu[k],
                    rhs: bound,
                    holds: lnu[k] <= bound,
                });
            }
            (rows.iter().all(|r| r.holds), Some(rows))
        }
        _ => {
            let slack = 3.0 * (lhs_stderr * lhs_stderr + rhs_stderr * rhs_stderr).sqrt();
            (lhs <= rhs + slack, None)
        }
    };
    Ok(ConvCombReport {
        lhs,
        rhs,
        factor,
        lhs_stderr,
        rhs_stderr,
        holds,
        estimates_ordered: lhs <= rhs,
        per_step,
        mu_series,
        nu_series,
        combination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Element, Group, Limits};

    #[test]
    fn single_coefficient_is_identity() {
        let f2 = Group::Free { rank: 2 };
        let mu = Measure::uniform(&f2, f2.generators().elements(), true).unwrap();
        let metric = WordMetric::standard(&f2, Limits::default());
        let spec = ConvexCombinationSpec::new(vec![Ratio::from_integer(1)], false);
        let c = build_convex_combination(&mu, &spec, &metric, 10_000).unwrap();
        assert_eq!(c.measure, mu);
        assert_eq!(c.factor, Ratio::from_integer(2));
        assert!(c.covers_ball);
    }

    #[test]
    fn sum_must_be_one_without_renormalize() {
        let z = Group::Lattice { rank: 1 };
        let mu = Measure::uniform(&z, z.generators().elements(), true).unwrap();
        let metric = WordMetric::standard(&z, Limits::default());
        let spec = ConvexCombinationSpec::new(vec![Ratio::new(1, 2), Ratio::new(1, 4)], false);
        assert!(matches!(
            build_convex_combination(&mu, &spec, &metric, 100),
            Err(Error::Schema(_))
        ));
        let spec = ConvexCombinationSpec { renormalize: true, ..spec };
        let c = build_convex_combination(&mu, &spec, &metric, 100).unwrap();
        assert!(c.renormalized);
        assert_eq!(c.coefficients, vec![Ratio::new(2, 3), Ratio::new(1, 3)]);
        assert_eq!(c.mass_before_renormalization, Ratio::new(3, 4));
    }

    #[test]
    fn asymmetric_measure_rejected() {
        let z = Group::Lattice { rank: 1 };
        let mu = Measure::uniform(&z, &[Element::Lattice(vec![1])], false).unwrap();
        let metric = WordMetric::standard(&z, Limits::default());
        let spec = ConvexCombinationSpec::new(vec![Ratio::from_integer(1)], false);
        assert!(build_convex_combination(&mu, &spec, &metric, 100).is_err());
    }
}

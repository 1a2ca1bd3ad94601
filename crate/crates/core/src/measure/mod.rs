//! Finite-support probability measures with exact rational weights.
//!
//! Weights share one common denominator and are kept reduced: the numerators
//! sum to the denominator and their gcd with it is 1. Overflow of the 128-bit
//! arithmetic is reported as a resource error, never wrapped.

pub mod convex;
pub mod drift;
pub mod walk;

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Element, Group, WordMetric};

pub use convex::{
    build_convex_combination, verify_conv_comb_bound, ConvCombReport, ConvexCombination,
    ConvexCombinationSpec,
};
pub use drift::{drift_series, DriftMode, DriftSeries};
pub use walk::{sample_walk, WalkSample};

/// Exact probability weight.
pub type Weight = Ratio<u128>;

/// Default cap on support sizes produced by convolution.
pub const DEFAULT_MAX_SUPPORT: usize = 2_000_000;

pub(crate) fn checked_mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b)
        .ok_or_else(|| Error::Resource("exact weight arithmetic overflowed 128 bits".into()))
}

pub(crate) fn checked_add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b)
        .ok_or_else(|| Error::Resource("exact weight arithmetic overflowed 128 bits".into()))
}

#[derive(Clone, PartialEq, Eq)]
pub struct Measure {
    group: Group,
    denom: u128,
    numerators: BTreeMap<Element, u128>,
    symmetric: bool,
}

impl std::fmt::Debug for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map()
            .entries(
                self.numerators
                    .iter()
                    .map(|(g, n)| (g, Ratio::new(*n, self.denom))),
            )
            .finish()
    }
}

impl Measure {
    /// Builds a measure; weights must be positive and sum to exactly 1.
    /// Repeated support entries are merged. With `symmetric` set,
    /// `μ(g) = μ(g⁻¹)` is verified.
    pub fn new(group: &Group, entries: Vec<(Element, Weight)>, symmetric: bool) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("measure support must be nonempty".into()));
        }
        let mut denom: u128 = 1;
        for (g, w) in &entries {
            group.check(g)?;
            if w.is_zero() {
                return Err(Error::Domain(format!(
                    "weight of {} must be positive",
                    group.display(g)
                )));
            }
            denom = checked_mul(denom / denom.gcd(w.denom()), *w.denom())?;
        }
        let mut numerators = BTreeMap::new();
        for (g, w) in entries {
            let n = checked_mul(*w.numer(), denom / w.denom())?;
            let slot = numerators.entry(g).or_insert(0u128);
            *slot = checked_add(*slot, n)?;
        }
        let total = numerators
            .values()
            .try_fold(0u128, |acc, &n| checked_add(acc, n))?;
        if total != denom {
            return Err(Error::Domain(format!(
                "weights sum to {} instead of 1",
                Ratio::new(total, denom)
            )));
        }
        let m = Self::from_parts(group.clone(), denom, numerators, false);
        if symmetric {
            m.verify_symmetric()?;
        }
        Ok(Self { symmetric, ..m })
    }

    /// Uniform measure on the given (deduplicated) elements.
    pub fn uniform(group: &Group, elements: &[Element], symmetric: bool) -> Result<Self> {
        let mut uniq = elements.to_vec();
        uniq.sort();
        uniq.dedup();
        let w = Ratio::new(1, uniq.len() as u128);
        Self::new(group, uniq.into_iter().map(|g| (g, w)).collect(), symmetric)
    }

    /// Point mass at the identity.
    pub fn dirac(group: &Group) -> Self {
        let mut numerators = BTreeMap::new();
        numerators.insert(group.identity(), 1);
        Self {
            group: group.clone(),
            denom: 1,
            numerators,
            symmetric: true,
        }
    }

    fn from_parts(
        group: Group,
        denom: u128,
        mut numerators: BTreeMap<Element, u128>,
        symmetric: bool,
    ) -> Self {
        let g = numerators.values().fold(denom, |acc, &n| acc.gcd(&n));
        if g > 1 {
            numerators.values_mut().for_each(|n| *n /= g);
        }
        Self {
            group,
            denom: denom / g,
            numerators,
            symmetric,
        }
    }

    fn verify_symmetric(&self) -> Result<()> {
        for (g, n) in &self.numerators {
            let gi = self.group.inverse(g)?;
            if self.numerators.get(&gi) != Some(n) {
                return Err(Error::Domain(format!(
                    "measure flagged symmetric but μ({}) ≠ μ({})",
                    self.group.display(g),
                    self.group.display(&gi)
                )));
            }
        }
        Ok(())
    }

    /// Whether `μ(g) = μ(g⁻¹)` holds, whatever the flag says.
    pub fn is_symmetric(&self) -> bool {
        self.verify_symmetric().is_ok()
    }

    pub fn symmetric_flag(&self) -> bool {
        self.symmetric
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn support_size(&self) -> usize {
        self.numerators.len()
    }

    /// Support in normal-form order.
    pub fn support(&self) -> impl Iterator<Item = &Element> {
        self.numerators.keys()
    }

    pub fn weight(&self, g: &Element) -> Weight {
        self.numerators
            .get(g)
            .map_or_else(Weight::zero, |&n| Ratio::new(n, self.denom))
    }

    pub fn weight_f64(&self, g: &Element) -> f64 {
        self.numerators
            .get(g)
            .map_or(0.0, |&n| n as f64 / self.denom as f64)
    }

    /// `(element, weight)` pairs in normal-form order.
    pub fn iter(&self) -> impl Iterator<Item = (&Element, Weight)> + '_ {
        self.numerators
            .iter()
            .map(|(g, &n)| (g, Ratio::new(n, self.denom)))
    }

    /// `(element, weight)` pairs as floats.
    pub fn iter_f64(&self) -> impl Iterator<Item = (&Element, f64)> + '_ {
        let d = self.denom as f64;
        self.numerators.iter().map(move |(g, &n)| (g, n as f64 / d))
    }

    pub(crate) fn raw(&self) -> (u128, &BTreeMap<Element, u128>) {
        (self.denom, &self.numerators)
    }

    pub fn total_mass(&self) -> Weight {
        let total: u128 = self.numerators.values().sum();
        Ratio::new(total, self.denom)
    }

    pub fn min_weight(&self) -> Weight {
        let n = self.numerators.values().copied().min().unwrap_or(0);
        Ratio::new(n, self.denom)
    }

    /// `(μ * ν)(g) = Σ_h μ(h) ν(h⁻¹g)`.
    pub fn convolve(&self, other: &Measure, max_support: usize) -> Result<Measure> {
        if self.group != other.group {
            return Err(Error::Domain(format!(
                "cannot convolve measures on {} and {}",
                self.group.name(),
                other.group.name()
            )));
        }
        let denom = checked_mul(self.denom, other.denom)?;
        let mut out: BTreeMap<Element, u128> = BTreeMap::new();
        for (g, &a) in &self.numerators {
            for (h, &b) in &other.numerators {
                let gh = self.group.mul_unchecked(g, h);
                let ab = checked_mul(a, b)?;
                match out.get_mut(&gh) {
                    Some(slot) => *slot = checked_add(*slot, ab)?,
                    None => {
                        if out.len() >= max_support {
                            return Err(Error::Resource(format!(
                                "convolution support exceeded {max_support} elements"
                            )));
                        }
                        out.insert(gh, ab);
                    }
                }
            }
        }
        let mut m = Self::from_parts(self.group.clone(), denom, out, false);
        m.symmetric = self.symmetric && other.symmetric && m.is_symmetric();
        Ok(m)
    }

    /// `μ^{*n}` for `n ≥ 1`.
    pub fn convolution_power(&self, n: usize, max_support: usize) -> Result<Measure> {
        Ok(self
            .convolution_powers(n, max_support)?
            .pop()
            .expect("n ≥ 1 yields a power"))
    }

    /// `[μ, μ^{*2}, ..., μ^{*n}]`.
    pub fn convolution_powers(&self, n: usize, max_support: usize) -> Result<Vec<Measure>> {
        if n == 0 {
            return Err(Error::Domain("convolution power needs n ≥ 1".into()));
        }
        let mut out = vec![self.clone()];
        for _ in 1..n {
            let next = out.last().expect("nonempty").convolve(self, max_support)?;
            out.push(next);
        }
        Ok(out)
    }

    /// Exact mixture `Σ c_i m_i`; coefficients must sum to 1.
    pub fn mixture(parts: &[(Weight, &Measure)]) -> Result<Measure> {
        let group = parts
            .first()
            .ok_or_else(|| Error::Domain("empty mixture".into()))?
            .1
            .group
            .clone();
        let mut entries = Vec::new();
        for (c, m) in parts {
            if m.group != group {
                return Err(Error::Domain("mixture of measures on different groups".into()));
            }
            if c.is_zero() {
                continue;
            }
            for (g, w) in m.iter() {
                entries.push((g.clone(), checked_ratio_mul(*c, w)?));
            }
        }
        let symmetric = parts.iter().all(|(_, m)| m.symmetric);
        let mut merged: BTreeMap<Element, Weight> = BTreeMap::new();
        for (g, w) in entries {
            let slot = merged.entry(g).or_insert_with(Weight::zero);
            *slot = checked_ratio_add(*slot, w)?;
        }
        Measure::new(&group, merged.into_iter().collect(), symmetric)
    }

    /// `Σ d(e,g)^p μ(g)` as a float.
    pub fn moment(&self, metric: &WordMetric, p: i32) -> Result<f64> {
        let mut acc = 0.0;
        for (g, w) in self.iter_f64() {
            acc += (metric.length(g)? as f64).powi(p) * w;
        }
        Ok(acc)
    }

    /// `Σ d(e,g)^p μ(g)` exactly.
    pub fn moment_exact(&self, metric: &WordMetric, p: u32) -> Result<Weight> {
        let mut acc = 0u128;
        for (g, &n) in &self.numerators {
            let l = (metric.length(g)? as u128)
                .checked_pow(p)
                .ok_or_else(|| Error::Resource("moment overflow".into()))?;
            acc = checked_add(acc, checked_mul(l, n)?)?;
        }
        Ok(Ratio::new(acc, self.denom))
    }

    /// Measure from its JSON descriptor
    /// `{"support": [...], "weights": [...], "symmetric": bool}`.
    /// Omitted weights mean uniform; a weight is a number or a `"p/q"` string.
    pub fn from_descriptor(group: &Group, desc: &MeasureDescriptor) -> Result<Self> {
        if desc.support.is_empty() {
            return Err(Error::Schema("measure support must be nonempty".into()));
        }
        let support = desc
            .support
            .iter()
            .map(|v| group.element_from_json(v))
            .collect::<Result<Vec<_>>>()?;
        let schema = |e: Error| match e {
            Error::Domain(m) => Error::Schema(m),
            other => other,
        };
        match &desc.weights {
            None => Self::uniform(group, &support, desc.symmetric).map_err(schema),
            Some(ws) => {
                if ws.len() != support.len() {
                    return Err(Error::Schema(format!(
                        "{} weights for {} support elements",
                        ws.len(),
                        support.len()
                    )));
                }
                let ws = ws.iter().map(parse_weight).collect::<Result<Vec<_>>>()?;
                Self::new(group, support.into_iter().zip(ws).collect(), desc.symmetric)
                    .map_err(schema)
            }
        }
    }

    pub fn to_descriptor(&self) -> MeasureDescriptor {
        MeasureDescriptor {
            support: self
                .numerators
                .keys()
                .map(|g| self.group.element_to_json(g))
                .collect(),
            weights: Some(
                self.iter()
                    .map(|(_, w)| serde_json::Value::String(format!("{}/{}", w.numer(), w.denom())))
                    .collect(),
            ),
            symmetric: self.symmetric,
        }
    }
}

pub(crate) fn checked_ratio_mul(a: Weight, b: Weight) -> Result<Weight> {
    let g1 = a.numer().gcd(b.denom());
    let g2 = b.numer().gcd(a.denom());
    let g1 = g1.max(1);
    let g2 = g2.max(1);
    let n = checked_mul(a.numer() / g1, b.numer() / g2)?;
    let d = checked_mul(a.denom() / g2, b.denom() / g1)?;
    Ok(Ratio::new(n, d))
}

pub(crate) fn checked_ratio_add(a: Weight, b: Weight) -> Result<Weight> {
    let l = a.denom().lcm(b.denom());
    let n = checked_add(
        checked_mul(*a.numer(), l / a.denom())?,
        checked_mul(*b.numer(), l / b.denom())?,
    )?;
    Ok(Ratio::new(n, l))
}

pub(crate) fn ratio_to_f64(r: &Weight) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// JSON measure descriptor.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDescriptor {
    pub support: Vec<serde_json::Value>,
    #[serde(default)]
    pub weights: Option<Vec<serde_json::Value>>,
    #[serde(default)]
    pub symmetric: bool,
}

/// Reads a weight: `"p/q"`, an integer, or a decimal taken at face value
/// (`0.1` is `1/10`).
pub fn parse_weight(v: &serde_json::Value) -> Result<Weight> {
    let s = match v {
        serde_json::Value::String(s) => s.trim().to_string(),
        serde_json::Value::Number(n) => n.to_string(),
        other => return Err(Error::Schema(format!("weight must be a number or \"p/q\", got {other}"))),
    };
    parse_rational(&s).ok_or_else(|| Error::Schema(format!("cannot read weight {s:?}")))
}

/// Parses `p/q`, integers and decimals with optional exponent into an exact
/// nonnegative rational.
pub fn parse_rational(s: &str) -> Option<Weight> {
    if let Some((p, q)) = s.split_once('/') {
        let p: u128 = p.trim().parse().ok()?;
        let q: u128 = q.trim().parse().ok()?;
        return (q != 0).then(|| Ratio::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let mantissa = mantissa.strip_prefix('+').unwrap_or(mantissa);
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.starts_with('-') || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let numer: u128 = digits.parse().ok()?;
    let scale = exp - frac.len() as i32;
    let pow = 10u128.checked_pow(scale.unsigned_abs())?;
    Some(if scale >= 0 {
        Ratio::new(numer.checked_mul(pow)?, 1)
    } else {
        Ratio::new(numer, pow)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Group {
        Group::Lattice { rank: 1 }
    }

    fn zi(k: i64) -> Element {
        Element::Lattice(vec![k])
    }

    fn simple_walk() -> Measure {
        Measure::uniform(&z(), &[zi(1), zi(-1)], true).unwrap()
    }

    #[test]
    fn weights_must_sum_to_one() {
        let r = Measure::new(&z(), vec![(zi(1), Ratio::new(1, 3)), (zi(-1), Ratio::new(1, 3))], false);
        assert!(matches!(r, Err(Error::Domain(_))));
        let r = Measure::new(&z(), vec![(zi(1), Ratio::new(1, 1)), (zi(-1), Ratio::new(0, 1))], false);
        assert!(r.is_err());
        let r = Measure::new(&z(), vec![(zi(1), Ratio::new(1, 1))], true);
        assert!(r.is_err());
    }

    #[test]
    fn binomial_square() {
        let m2 = simple_walk().convolve(&simple_walk(), 100).unwrap();
        assert_eq!(m2.weight(&zi(-2)), Ratio::new(1, 4));
        assert_eq!(m2.weight(&zi(0)), Ratio::new(1, 2));
        assert_eq!(m2.weight(&zi(2)), Ratio::new(1, 4));
        assert_eq!(m2.total_mass(), Ratio::new(1, 1));
        let d = Measure::dirac(&z());
        assert_eq!(d.convolve(&simple_walk(), 10).unwrap(), simple_walk());
    }

    #[test]
    fn fourth_power() {
        let m4 = simple_walk().convolution_power(4, 100).unwrap();
        for (k, w) in [(-4, 1), (-2, 4), (0, 6), (2, 4), (4, 1)] {
            assert_eq!(m4.weight(&zi(k)), Ratio::new(w, 16));
        }
        assert!(m4.is_symmetric());
    }

    #[test]
    fn support_budget() {
        let r = simple_walk().convolution_power(5, 3);
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn overflow_is_resource_error() {
        let m = Measure::uniform(&z(), &[zi(1), zi(-1), zi(0)], true).unwrap();
        // 3^81 > 2^128
        let r = m.convolution_power(90, 10_000);
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn parse_weights() {
        assert_eq!(parse_rational("0.25"), Some(Ratio::new(1, 4)));
        assert_eq!(parse_rational("1/3"), Some(Ratio::new(1, 3)));
        assert_eq!(parse_rational("1e-1"), Some(Ratio::new(1, 10)));
        assert_eq!(parse_rational("2.5E1"), Some(Ratio::new(25, 1)));
        assert_eq!(parse_rational("-1"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        let v: serde_json::Value = serde_json::json!(0.1);
        assert_eq!(parse_weight(&v).unwrap(), Ratio::new(1, 10));
    }

    #[test]
    fn descriptor_round_trip() {
        let f2 = Group::Free { rank: 2 };
        let desc: MeasureDescriptor = serde_json::from_value(serde_json::json!({
            "support": ["a", "A", "b", "B"],
            "weights": [0.25, "1/4", 0.25, 0.25],
            "symmetric": true
        }))
        .unwrap();
        let m = Measure::from_descriptor(&f2, &desc).unwrap();
        let back = Measure::from_descriptor(&f2, &m.to_descriptor()).unwrap();
        assert_eq!(m, back);
        let empty = MeasureDescriptor::default();
        assert!(matches!(Measure::from_descriptor(&f2, &empty), Err(Error::Schema(_))));
    }

    #[test]
    fn mixture_matches_hand_computation() {
        let m = simple_walk();
        let m2 = m.convolve(&m, 100).unwrap();
        let half = Ratio::new(1, 2);
        let nu = Measure::mixture(&[(half, &m), (half, &m2)]).unwrap();
        for (k, w) in [(-2, 8), (-1, 4), (0, 4), (1, 4), (2, 8)] {
            assert_eq!(nu.weight(&zi(k)), Ratio::new(1, w));
        }
    }
}

//! Seeded random walks. Walk `i` of a run with seed `s` draws from ChaCha8
//! seeded with `s` on stream `i`, so runs are reproducible and walks independent.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Measure;
use crate::group::Element;

pub fn walk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws increments from a measure with its exact integer weights.
#[derive(Clone, Debug)]
pub struct StepSampler {
    steps: Vec<Element>,
    dist: WeightedIndex<u128>,
}

impl StepSampler {
    pub fn new(mu: &Measure) -> Self {
        let (_, nums) = mu.raw();
        let steps: Vec<Element> = nums.keys().cloned().collect();
        let dist = WeightedIndex::new(nums.values().copied()).expect("weights are positive");
        Self { steps, dist }
    }

    pub fn sample<'a>(&'a self, rng: &mut ChaCha8Rng) -> &'a Element {
        &self.steps[self.dist.sample(rng)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkSample {
    /// `X_0 = e, X_1, ..., X_length`.
    pub trajectory: Vec<Element>,
    pub rng_seed: u64,
}

/// A walk `X_{n+1} = X_n s_{n+1}` with i.i.d. increments from `μ`.
pub fn sample_walk(mu: &Measure, length: usize, seed: u64) -> WalkSample {
    let group = mu.group();
    let sampler = StepSampler::new(mu);
    let mut rng = walk_rng(seed, 0);
    let mut x = group.identity();
    let mut trajectory = Vec::with_capacity(length + 1);
    trajectory.push(x.clone());
    for _ in 0..length {
        x = group.mul_unchecked(&x, sampler.sample(&mut rng));
        trajectory.push(x.clone());
    }
    WalkSample {
        trajectory,
        rng_seed: seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn reproducible_and_valid() {
        let f2 = Group::Free { rank: 2 };
        let mu = Measure::uniform(&f2, f2.generators().elements(), true).unwrap();
        let a = sample_walk(&mu, 50, 7);
        let b = sample_walk(&mu, 50, 7);
        assert_eq!(a, b);
        assert_eq!(a.trajectory[0], f2.identity());
        for w in a.trajectory.windows(2) {
            let inc = f2.mul_unchecked(&f2.inverse(&w[0]).unwrap(), &w[1]);
            assert!(mu.weight_f64(&inc) > 0.0);
        }
        assert_eq!(sample_walk(&mu, 0, 3).trajectory, vec![f2.identity()]);
        assert_ne!(sample_walk(&mu, 50, 8), a);
    }
}

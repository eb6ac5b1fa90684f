use std::collections::BTreeMap;

use rand::distr::Distribution;
use rand::distr::weighted::WeightedIndex;

use super::dist::ProbDist;
use super::rng;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::real::Real;

/// Measured bitstrings in draw order, with their tallies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSet {
    n_bits: usize,
    draws: Vec<u64>,
    counts: BTreeMap<u64, u64>,
}

impl SampleSet {
    pub fn from_draws(n_bits: usize, draws: Vec<u64>) -> Self {
        let mut counts = BTreeMap::new();
        for &d in &draws {
            *counts.entry(d).or_insert(0) += 1;
        }
        SampleSet { n_bits, draws, counts }
    }

    /// Builds a set from tallies; the recorded order is ascending by string.
    pub fn from_counts(n_bits: usize, counts: BTreeMap<u64, u64>) -> Self {
        let draws = counts.iter().flat_map(|(x, c)| std::iter::repeat_n(*x, *c as usize)).collect();
        SampleSet { n_bits, draws, counts: counts.into_iter().filter(|(_, c)| *c > 0).collect() }
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn draws(&self) -> &[u64] {
        &self.draws
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn total_shots(&self) -> u64 {
        self.draws.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Empirical frequencies.
    pub fn to_dist<T: Real>(&self) -> ProbDist<T> {
        let total = T::from_f64_lossy(self.draws.len() as f64);
        let map = self.counts.iter().map(|(x, c)| (*x, T::from_f64_lossy(*c as f64) / total)).collect();
        ProbDist::from_map(self.n_bits, map)
    }

    /// Concatenates draw records of equal width.
    pub fn pooled<'a>(sets: impl IntoIterator<Item = &'a SampleSet>) -> Result<SampleSet> {
        let mut n_bits = None;
        let mut draws = Vec::new();
        for s in sets {
            match n_bits {
                None => n_bits = Some(s.n_bits),
                Some(n) if n != s.n_bits => return Err(Error::WidthMismatch { expected: n, got: s.n_bits }),
                _ => {}
            }
            draws.extend_from_slice(&s.draws);
        }
        Ok(SampleSet::from_draws(n_bits.unwrap_or(0), draws))
    }
}

/// `shots` iid draws from `|amplitude|²`, reproducible per seed.
pub fn sample<T: Real>(state: &StateVector<T>, shots: usize, seed: u64) -> Result<SampleSet> {
    let mut r = rng::seeded(seed);
    sample_with(&ProbDist::from_state(state), shots, &mut r)
}

/// Draws from a sparse distribution using the caller's generator.
pub fn sample_dist<T: Real>(dist: &ProbDist<T>, shots: usize, rng: &mut rng::Rng) -> Result<SampleSet> {
    sample_with(dist, shots, rng)
}

fn sample_with<T: Real>(dist: &ProbDist<T>, shots: usize, rng: &mut rng::Rng) -> Result<SampleSet> {
    if shots == 0 {
        return Err(Error::InvalidDistribution("shot count must be positive".into()));
    }
    let (keys, weights): (Vec<u64>, Vec<f64>) = dist.iter().map(|(x, p)| (x, p.to_f64_lossy())).unzip();
    let index = WeightedIndex::new(&weights).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let draws = (0..shots).map(|_| keys[index.sample(rng)]).collect();
    Ok(SampleSet::from_draws(dist.n_bits(), draws))
}

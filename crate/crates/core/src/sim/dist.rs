use std::collections::BTreeMap;

use super::state::StateVector;
use crate::bits;
use crate::error::{Error, Result};
use crate::real::Real;

/// Sparse probability distribution over `n_bits`-bit strings.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbDist<T: Real> {
    n_bits: usize,
    probs: BTreeMap<u64, T>,
}

impl<T: Real> ProbDist<T> {
    pub fn new(n_bits: usize) -> Self {
        ProbDist { n_bits, probs: BTreeMap::new() }
    }

    pub fn from_map(n_bits: usize, probs: BTreeMap<u64, T>) -> Self {
        ProbDist { n_bits, probs }
    }

    /// Exact output distribution of a state. Entries below the squared machine
    /// epsilon are rounding residue from cancelling paths and are dropped.
    pub fn from_state(state: &StateVector<T>) -> Self {
        let floor = T::epsilon() * T::epsilon();
        let probs = state
            .amplitudes()
            .iter()
            .enumerate()
            .filter_map(|(i, a)| {
                let p = a.norm_sqr();
                (p > floor).then_some((i as u64, p))
            })
            .collect();
        ProbDist { n_bits: state.n_qubits(), probs }
    }

    /// Dense probability vector of length `2^n_bits`.
    pub fn from_dense(n_bits: usize, dense: &[T]) -> Result<Self> {
        if dense.len() != 1usize << n_bits {
            return Err(Error::WidthMismatch { expected: 1 << n_bits, got: dense.len() });
        }
        let probs = dense.iter().enumerate().filter(|(_, p)| **p != T::zero()).map(|(i, p)| (i as u64, *p)).collect();
        Ok(ProbDist { n_bits, probs })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn get(&self, x: u64) -> T {
        self.probs.get(&x).copied().unwrap_or_else(T::zero)
    }

    pub fn add(&mut self, x: u64, p: T) {
        let e = self.probs.entry(x).or_insert_with(T::zero);
        *e = *e + p;
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, T)> + '_ {
        self.probs.iter().map(|(x, p)| (*x, *p))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> T {
        self.probs.values().copied().sum()
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut v = vec![T::zero(); 1usize << self.n_bits];
        for (x, p) in self.iter() {
            v[x as usize] = p;
        }
        v
    }

    /// Strings carrying more than `eps` probability.
    pub fn support(&self, eps: T) -> Vec<u64> {
        self.iter().filter(|(_, p)| *p > eps).map(|(x, _)| x).collect()
    }

    /// Hamming weights present in `support(eps)`.
    pub fn weights(&self, eps: T) -> std::collections::BTreeSet<usize> {
        self.support(eps).into_iter().map(bits::weight).collect()
    }

    /// Largest absolute pointwise difference.
    pub fn max_abs_diff(&self, other: &ProbDist<T>) -> T {
        let keys: std::collections::BTreeSet<u64> = self.probs.keys().chain(other.probs.keys()).copied().collect();
        keys.into_iter().map(|x| (self.get(x) - other.get(x)).abs()).fold(T::zero(), T::max)
    }

    pub fn total_variation(&self, other: &ProbDist<T>) -> T {
        let keys: std::collections::BTreeSet<u64> = self.probs.keys().chain(other.probs.keys()).copied().collect();
        let s: T = keys.into_iter().map(|x| (self.get(x) - other.get(x)).abs()).sum();
        s * T::from_f64_lossy(0.5)
    }

    /// Most probable string, ties toward the smaller integer.
    pub fn mode(&self) -> Option<u64> {
        let mut best: Option<(u64, T)> = None;
        for (x, p) in self.iter() {
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((x, p));
            }
        }
        best.map(|(x, _)| x)
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.total();
        if t <= T::zero() {
            return Err(Error::EmptyDistribution);
        }
        Ok(ProbDist { n_bits: self.n_bits, probs: self.probs.iter().map(|(x, p)| (*x, *p / t)).collect() })
    }

    pub fn cast<U: Real>(&self) -> ProbDist<U> {
        ProbDist { n_bits: self.n_bits, probs: self.probs.iter().map(|(x, p)| (*x, U::from_f64_lossy(p.to_f64_lossy()))).collect() }
    }
}

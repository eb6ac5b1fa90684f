use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use super::cut::CutPlan;
use crate::error::{Error, Result};
use crate::sim::{ProbDist, SampleSet};

#[derive(Clone, Debug, PartialEq)]
pub enum CachedResult {
    Exact(ProbDist<f64>),
    /// Recorded draws, optionally after readout noise.
    Samples(Vec<u64>),
}

impl CachedResult {
    pub fn as_exact(&self) -> Option<&ProbDist<f64>> {
        match self {
            CachedResult::Exact(d) => Some(d),
            CachedResult::Samples(_) => None,
        }
    }

    pub fn as_samples(&self) -> Option<&[u64]> {
        match self {
            CachedResult::Samples(s) => Some(s),
            CachedResult::Exact(_) => None,
        }
    }

    pub fn to_sample_set(&self, n_bits: usize) -> Option<SampleSet> {
        self.as_samples().map(|s| SampleSet::from_draws(n_bits, s.to_vec()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub plan: u64,
    /// Position of the subcircuit within its column plan.
    pub subcircuit: usize,
    pub fragment: usize,
    pub input: u8,
    /// Zero for exact results.
    pub shots: u64,
    /// Distinguishes noisy from noiseless draws.
    pub noisy: bool,
}

/// Fragment results keyed by plan, fragment and input, valid while the
/// fragment's θ-slice is bit-identical. Concurrent reads, exclusive writes.
#[derive(Debug, Default)]
pub struct FragmentCache {
    plans: RwLock<HashSet<u64>>,
    entries: RwLock<HashMap<CacheKey, (Vec<u64>, Arc<CachedResult>)>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl FragmentCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&self, plan: &CutPlan) {
        self.plans.write().expect("cache lock poisoned").insert(plan.id());
    }

    pub fn knows(&self, plan: &CutPlan) -> bool {
        self.plans.read().expect("cache lock poisoned").contains(&plan.id())
    }

    /// Cached result for `key` if its fingerprint matches, otherwise runs
    /// `compute` and stores the result.
    pub fn get_or_compute(
        &self,
        key: CacheKey,
        fingerprint: Vec<u64>,
        compute: impl FnOnce() -> Result<CachedResult>,
    ) -> Result<Arc<CachedResult>> {
        if !self.plans.read().expect("cache lock poisoned").contains(&key.plan) {
            return Err(Error::CacheMismatch);
        }
        if let Some((fp, hit)) = self.entries.read().expect("cache lock poisoned").get(&key)
            && *fp == fingerprint
        {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(Arc::clone(hit));
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let value = Arc::new(compute()?);
        self.entries.write().expect("cache lock poisoned").insert(key, (fingerprint, Arc::clone(&value)));
        Ok(value)
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.entries.write().expect("cache lock poisoned").clear();
    }
}

/// Fragments that must be re-executed when the subcircuit angles move from
/// `theta_old` to `theta_new`: exactly those whose owned slice changed.
pub fn reuse_filter(cache: &FragmentCache, plan: &CutPlan, theta_old: &[f64], theta_new: &[f64]) -> Result<BTreeSet<usize>> {
    if !cache.knows(plan) {
        return Err(Error::CacheMismatch);
    }
    for got in [theta_old.len(), theta_new.len()] {
        if got != plan.param_count {
            return Err(Error::ParamLength { expected: plan.param_count, got });
        }
    }
    Ok(plan.fragments.iter().filter(|f| f.fingerprint(theta_old) != f.fingerprint(theta_new)).map(|f| f.id).collect())
}

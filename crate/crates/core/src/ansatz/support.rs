use std::collections::BTreeSet;

use crate::bits;
use crate::error::Result;
use crate::sim::{Circuit, ProbDist, simulate};

/// Probability below which a basis state counts as absent. Legitimate
/// support entries at twelve qubits reach ~1e-20 at the generic angles, while
/// cancelled paths in compiled circuits leave residue near 1e-32.
pub const SUPPORT_EPS: f64 = 1e-26;

/// Angles `0.7 + 0.01·j`, clear of the measure-zero sets that zero out amplitudes.
pub fn generic_theta(len: usize) -> Vec<f64> {
    (0..len).map(|j| 0.7 + 0.01 * j as f64).collect()
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SupportReport {
    pub n: usize,
    pub k: usize,
    /// Hamming weights present in the support.
    pub weights: BTreeSet<usize>,
    pub support_size: usize,
    /// Weight-`k` strings present.
    pub target_present: u64,
    /// `C(n, k)`.
    pub target_total: u64,
    /// Support strings whose weight differs from `k`.
    pub extra_states: usize,
}

impl SupportReport {
    pub fn complete(&self) -> bool {
        self.target_present == self.target_total
    }

    pub fn exact(&self) -> bool {
        self.complete() && self.extra_states == 0
    }
}

pub fn verify_support(circuit: &Circuit, k: usize, theta: &[f64]) -> Result<SupportReport> {
    let state = simulate(circuit, theta)?;
    let dist = ProbDist::from_state(&state);
    let support = dist.support(SUPPORT_EPS);
    let n = circuit.n_qubits();
    let target_present = support.iter().filter(|x| bits::weight(**x) == k).count() as u64;
    Ok(SupportReport {
        n,
        k,
        weights: support.iter().map(|x| bits::weight(*x)).collect(),
        support_size: support.len(),
        target_present,
        target_total: bits::binomial(n, k),
        extra_states: support.len() - target_present as usize,
    })
}

use super::cut::CutPlan;
use super::reconstruct::{FragmentDists, recombine};
use super::sampling::Streams;
use crate::error::{Error, Result};
use crate::mitigation::build_matrix_weights;
use crate::sim::{ProbDist, ReadoutNoiseModel, SampleSet};

/// Mitigates each fragment's noisy stream with the assignment matrix
/// restricted to that fragment's output weights, then recombines the
/// mitigated distributions. `noise` covers the subcircuit width.
pub fn mitigated_recombine(plan: &CutPlan, noisy: &Streams, noise: &ReadoutNoiseModel, sub_theta: &[f64]) -> Result<ProbDist<f64>> {
    if noise.width() != plan.width {
        return Err(Error::WidthMismatch { expected: plan.width, got: noise.width() });
    }
    let mut dists: FragmentDists<f64> = Vec::with_capacity(plan.fragments.len());
    for (frag, pair) in plan.fragments.iter().zip(noisy) {
        let local = noise.slice(frag.lo, frag.width())?;
        let mut out = [None, None];
        for &input in frag.inputs() {
            let s = &pair[input as usize];
            if s.is_empty() {
                continue;
            }
            let empirical: ProbDist<f64> = SampleSet::from_draws(frag.width(), s.clone()).to_dist();
            let m = build_matrix_weights::<f64>(&local, frag.width(), &frag.weights[input as usize])?;
            out[input as usize] = Some(m.mitigate_dist(&empirical)?);
        }
        dists.push(out);
    }
    recombine(plan, &dists, sub_theta, false)
}

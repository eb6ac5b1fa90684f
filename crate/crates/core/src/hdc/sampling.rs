use super::cut::CutPlan;
use super::reconstruct::{FragmentDists, apply_bridge};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::sim::{ProbDist, ReadoutNoiseModel, SampleSet, apply_readout_noise, rng, sample_dist};

/// Stream key of fragment `f` on input `input`.
pub fn stream_key(fragment: usize, input: u8) -> u64 {
    2 * fragment as u64 + u64::from(input)
}

const BRIDGE_STREAM: u64 = u64::MAX / 2;

/// One submission of a fragment circuit with a fixed input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Submission {
    pub fragment: usize,
    pub input: u8,
    pub shots: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledRun {
    /// Combined strings over the subcircuit width, in draw order.
    pub samples: SampleSet,
    pub submissions: Vec<Submission>,
}

/// Per-fragment shot streams: `streams[f][input]` in measurement order.
pub type Streams = Vec<[Vec<u64>; 2]>;

/// Sequential combination: each combined string takes the next unused
/// draw of the following fragment under the input its forwarded bit selects.
/// `widths` are the fragment widths; the forwarded bit is the last bit of
/// every fragment but the final one.
pub fn combine_streams(widths: &[usize], streams: &Streams) -> Result<Vec<u64>> {
    let Some(first) = streams.first() else {
        return Ok(Vec::new());
    };
    let last = widths.len() - 1;
    let mut out: Vec<(u64, u8)> = first[0].iter().map(|&y| if last == 0 { (y, 0) } else { (y >> 1, (y & 1) as u8) }).collect();
    for f in 1..widths.len() {
        let measured = widths[f] - usize::from(f < last);
        let mut cursor = [0usize; 2];
        for (prefix, bit) in out.iter_mut() {
            let input = *bit as usize;
            let y = *streams[f][input].get(cursor[input]).ok_or(Error::StreamExhausted { fragment: f, input: *bit })?;
            cursor[input] += 1;
            let (m, b) = if f < last { (y >> 1, (y & 1) as u8) } else { (y, 0) };
            *prefix = (*prefix << measured) | m;
            *bit = b;
        }
    }
    Ok(out.into_iter().map(|(x, _)| x).collect())
}

fn draws<T: Real>(dist: &ProbDist<T>, shots: u64, seed: u64, key: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Ok(Vec::new());
    }
    let mut r = rng::stream(seed, key);
    Ok(sample_dist(dist, shots as usize, &mut r)?.draws().to_vec())
}

/// The protocol as run on hardware: fragment 1 gets `N` shots, and fragment
/// `f + 1` is submitted once per input with as many shots as fragment `f`
/// forwarded that value. Issues `2p + 1` submissions for `p` cuts.
pub fn sequential_sample<T: Real>(plan: &CutPlan, dists: &FragmentDists<T>, sub_theta: &[T], shots: u64, seed: u64) -> Result<SampledRun> {
    if shots == 0 {
        return Err(Error::InvalidDistribution("shot count must be positive".into()));
    }
    if plan.bridge.is_some() {
        return simultaneous_sample(plan, dists, sub_theta, shots, seed);
    }
    let widths = plan.widths();
    let mut streams: Streams = Vec::with_capacity(widths.len());
    let mut submissions = vec![Submission { fragment: 0, input: 0, shots }];
    let first = draws(dist_of(dists, 0, 0)?, shots, seed, stream_key(0, 0))?;
    let mut counts = forwarded_counts(&first, plan.fragments[0].output);
    streams.push([first, Vec::new()]);
    for f in 1..widths.len() {
        let mut pair = [Vec::new(), Vec::new()];
        for input in 0..2u8 {
            let n = counts[input as usize];
            submissions.push(Submission { fragment: f, input, shots: n });
            pair[input as usize] = draws(dist_of(dists, f, input)?, n, seed, stream_key(f, input))?;
        }
        if plan.fragments[f].output {
            counts = [0, 0];
            for s in &pair {
                let c = forwarded_counts(s, true);
                counts[0] += c[0];
                counts[1] += c[1];
            }
        }
        streams.push(pair);
    }
    let combined = combine_streams(&widths, &streams)?;
    Ok(SampledRun { samples: SampleSet::from_draws(plan.width, combined), submissions })
}

fn forwarded_counts(draws: &[u64], output: bool) -> [u64; 2] {
    let ones = if output { draws.iter().filter(|y| *y & 1 == 1).count() as u64 } else { 0 };
    [draws.len() as u64 - ones, ones]
}

fn dist_of<T: Real>(dists: &FragmentDists<T>, f: usize, input: u8) -> Result<&ProbDist<T>> {
    dists
        .get(f)
        .and_then(|d| d[input as usize].as_ref())
        .ok_or_else(|| Error::InvalidCut(format!("missing distribution for fragment {f}, input {input}")))
}

/// Draws `N` shots of every fragment on every input up front.
pub fn simultaneous_streams<T: Real>(plan: &CutPlan, dists: &FragmentDists<T>, shots: u64, seed: u64) -> Result<Streams> {
    plan.fragments
        .iter()
        .enumerate()
        .map(|(f, frag)| {
            let mut pair = [Vec::new(), Vec::new()];
            for &input in frag.inputs() {
                pair[input as usize] = draws(dist_of(dists, f, input)?, shots, seed, stream_key(f, input))?;
            }
            Ok(pair)
        })
        .collect()
}

/// Every fragment is shot `N` times per input at once; the sequential
/// combination then runs classically over the recorded streams.
pub fn simultaneous_sample<T: Real>(
    plan: &CutPlan,
    dists: &FragmentDists<T>,
    sub_theta: &[T],
    shots: u64,
    seed: u64,
) -> Result<SampledRun> {
    if shots == 0 {
        return Err(Error::InvalidDistribution("shot count must be positive".into()));
    }
    let streams = simultaneous_streams(plan, dists, shots, seed)?;
    let submissions = submissions_for(plan, shots);
    let samples = combine_recorded(plan, &streams, sub_theta, seed)?;
    Ok(SampledRun { samples, submissions })
}

fn submissions_for(plan: &CutPlan, shots: u64) -> Vec<Submission> {
    plan.fragments.iter().flat_map(|f| f.inputs().iter().map(move |&input| Submission { fragment: f.id, input, shots })).collect()
}

/// Combines recorded streams into subcircuit strings. Bridge plans pair the
/// two halves shot by shot and draw the bridge outcome classically.
pub fn combine_recorded<T: Real>(plan: &CutPlan, streams: &Streams, sub_theta: &[T], seed: u64) -> Result<SampleSet> {
    let Some(bridge) = &plan.bridge else {
        return Ok(SampleSet::from_draws(plan.width, combine_streams(&plan.widths(), streams)?));
    };
    let t = bridge.transfer(sub_theta)?;
    let shift = plan.fragments[1].width();
    let mut r = rng::stream(seed, BRIDGE_STREAM);
    let mut out = Vec::with_capacity(streams[0][0].len());
    for (&a, &b) in streams[0][0].iter().zip(&streams[1][0]) {
        let mut one = ProbDist::<T>::new(plan.width);
        one.add((a << shift) | b, T::one());
        let moved = apply_bridge(&one, &t, bridge.upper, plan.width)?;
        out.extend(sample_dist(&moved, 1, &mut r)?.draws());
    }
    Ok(SampleSet::from_draws(plan.width, out))
}

/// Readout noise applied to each recorded stream on the wires of its fragment.
/// `noise` covers the subcircuit width.
pub fn noisy_streams(plan: &CutPlan, streams: &Streams, noise: &ReadoutNoiseModel, seed: u64) -> Result<Streams> {
    if noise.width() != plan.width {
        return Err(Error::WidthMismatch { expected: plan.width, got: noise.width() });
    }
    plan.fragments
        .iter()
        .zip(streams)
        .map(|(frag, pair)| {
            let local = noise.slice(frag.lo, frag.width())?;
            let mut out = [Vec::new(), Vec::new()];
            for input in 0..2u8 {
                let s = &pair[input as usize];
                if s.is_empty() {
                    continue;
                }
                let set = SampleSet::from_draws(frag.width(), s.clone());
                let key = (1 << 32) | stream_key(frag.id, input);
                out[input as usize] = apply_readout_noise(&set, &local, rng::derive_seed(seed, key))?.draws().to_vec();
            }
            Ok(out)
        })
        .collect()
}

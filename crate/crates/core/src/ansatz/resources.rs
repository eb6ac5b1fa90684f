use super::{AnsatzSpec, Variant, cc_skeleton, ccc_skeleton};
use crate::error::{Error, Result};

/// Gate budget of an ansatz in its compiled two-CNOT-per-block form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ResourceCount {
    /// Parameterized blocks.
    pub blocks: usize,
    pub cnots: usize,
    /// Longest chain of CNOTs sharing a wire.
    pub cnot_depth: usize,
    pub params: usize,
}

/// Closed-form counts for a single-layer spec.
///
/// CC with even `k` carries one extra lone CNOT: the first block of `U_n` has
/// a control that is never set, so only its CNOT survives.
pub fn count_resources(spec: &AnsatzSpec) -> Result<ResourceCount> {
    if spec.layers != 1 {
        return Err(Error::InvalidSpec("resource formulas cover single-layer specs".into()));
    }
    let n = spec.n;
    if n < 2 || spec.k > n {
        return Err(Error::InvalidSpec(format!("n = {n}, k = {}", spec.k)));
    }
    let kk = spec.k.min(n - spec.k);
    if kk == 0 {
        return Ok(ResourceCount { blocks: 0, cnots: 0, cnot_depth: 0, params: 0 });
    }
    let count = match spec.variant {
        Variant::Ccc => {
            // Staircase j holds n − k − j blocks: nk − 3k²/2 + k/2 in total.
            let blocks = kk * (n - kk) - kk * (kk - 1) / 2;
            ResourceCount { blocks, cnots: 2 * blocks, cnot_depth: 2 * (n - kk), params: blocks }
        }
        Variant::Cc => {
            let (mut blocks, lone) =
                if kk % 2 == 1 { (kk.div_ceil(2) * (2 * n - 1 - kk) / 2, 0) } else { ((kk / 2 + 1) * (n - 2) - kk * (kk - 2) / 4, 1) };
            if spec.symmetric_partition {
                let top = if kk % 2 == 1 { 2 } else { 1 };
                if kk < 2 {
                    return Err(Error::InvalidSpec("symmetric partition needs k ≥ 2".into()));
                }
                blocks -= ((n - kk) / 2 + 1).min(n - 1 - top);
            }
            let cnot_depth = cc_depth(spec)?;
            ResourceCount { blocks, cnots: 2 * blocks + lone, cnot_depth, params: blocks }
        }
    };
    Ok(count)
}

/// CC depth. Without pruning it is `2n` for even `k` and `2(n − 1)` for odd
/// `k`; pruning shortens it in ways without a tidy closed form, so that case
/// is read off the schedule.
fn cc_depth(spec: &AnsatzSpec) -> Result<usize> {
    let n = spec.n;
    let kk = spec.k.min(n - spec.k);
    if !spec.symmetric_partition {
        return Ok(if kk == 1 {
            2 * (n - 1)
        } else if kk % 2 == 0 {
            2 * n
        } else {
            2 * (n - 1)
        });
    }
    let s = cc_skeleton(n, spec.k, 1, true);
    Ok(schedule_depth(&s))
}

fn schedule_depth(s: &super::Skeleton) -> usize {
    let mut level = vec![0usize; s.n];
    for b in &s.blocks {
        let cost = if b.operative { 2 } else { 1 };
        let d = level[b.upper].max(level[b.upper + 1]) + cost;
        level[b.upper] = d;
        level[b.upper + 1] = d;
    }
    level.into_iter().max().unwrap_or(0)
}

#[allow(dead_code)]
pub(crate) fn ccc_depth_from_schedule(n: usize, k: usize) -> usize {
    schedule_depth(&ccc_skeleton(n, k, 1))
}

use super::blocks::{BlockKind, push_compiled, push_raw};
use super::{AnsatzSpec, Variant};
use crate::error::{Error, Result};
use crate::sim::{Angle, Circuit, Gate};

/// A block on wires `(upper, upper + 1)`. An inoperative block keeps only its
/// CNOT: its controlled rotation sees a control that is always `|0⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Block {
    pub kind: BlockKind,
    pub upper: usize,
    pub operative: bool,
}

impl Block {
    fn new(kind: BlockKind, upper: usize) -> Self {
        Block { kind, upper, operative: true }
    }
}

/// Gate-level skeleton shared by the builders: an X layer, then blocks.
#[derive(Clone, Debug, Default)]
pub(crate) struct Skeleton {
    pub n: usize,
    pub x: Vec<usize>,
    /// Blocks in dependency order.
    pub blocks: Vec<Block>,
    /// Flip every qubit at the end.
    pub complement: bool,
}

impl Skeleton {
    /// Blocks in emission order: as-soon-as-possible layers, top to bottom
    /// within a layer.
    pub fn scheduled(&self) -> Vec<Block> {
        let mut free = vec![0usize; self.n];
        let mut placed: Vec<(usize, usize, Block)> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let layer = free[b.upper].max(free[b.upper + 1]);
                free[b.upper] = layer + 1;
                free[b.upper + 1] = layer + 1;
                (layer, i, *b)
            })
            .collect();
        placed.sort_by_key(|(layer, i, b)| (*layer, b.upper, *i));
        placed.into_iter().map(|(_, _, b)| b).collect()
    }

    pub fn emit(&self, compile: bool) -> Circuit {
        let mut c = Circuit::new_lnn(self.n);
        for &q in &self.x {
            c.push(Gate::X(q)).expect("X wire in range");
        }
        let mut slot = 0;
        for b in self.scheduled() {
            if !b.operative {
                // Structure-only rotation; its control never fires.
                if !compile {
                    c.push(Gate::cry(b.upper, b.upper + 1, Angle::Fixed(0.0))).expect("wires in range");
                }
                c.push(Gate::cnot(b.upper + 1, b.upper)).expect("wires in range");
                continue;
            }
            if compile {
                push_compiled(&mut c, b.kind, b.upper, Angle::slot(slot));
            } else {
                push_raw(&mut c, b.kind, b.upper, Angle::slot(slot));
            }
            slot += 1;
        }
        if self.complement {
            for q in 0..self.n {
                c.push(Gate::X(q)).expect("X wire in range");
            }
        }
        c
    }
}

/// 3C staircases preparing weight `k` on `n` wires; `k` may be `0..=n`.
pub(crate) fn ccc_skeleton(n: usize, k: usize, layers: usize) -> Skeleton {
    let complement = k > n / 2;
    let kk = if complement { n - k } else { k };
    let mut s = Skeleton { n, complement, ..Skeleton::default() };
    s.x = (0..kk).map(|j| 2 * j).collect();
    // Staircase j starts at wire 2j and runs n − kk − j blocks; the lower
    // staircases go first so the upper ones can chase them down.
    for j in (0..kk).rev() {
        for m in 0..n - kk - j {
            s.blocks.push(Block::new(BlockKind::ThreeC, 2 * j + m));
        }
    }
    for _ in 1..layers {
        s.blocks.extend((0..n - 1).map(|u| Block::new(BlockKind::ThreeC, u)));
    }
    s
}

/// X layer and 2C staircases of the column selector for weight `k`.
pub(crate) fn selector_skeleton(n: usize, k: usize) -> Skeleton {
    let mut s = Skeleton { n, ..Skeleton::default() };
    let odd = k % 2;
    if odd == 1 {
        s.x.push(0);
    }
    s.x.extend((0..k / 2).map(|i| odd + 2 * i + 1));
    // One staircase from each X below the top wire, lowest first.
    for &start in s.x.iter().rev().filter(|&&q| q != 0) {
        s.blocks.extend((start..n - 1).map(|u| Block::new(BlockKind::TwoC, u)));
    }
    s
}

pub(crate) fn cc_skeleton(n: usize, k: usize, layers: usize, symmetric_partition: bool) -> Skeleton {
    let complement = k > n / 2;
    let kk = if complement { n - k } else { k };
    let mut s = selector_skeleton(n, kk);
    s.complement = complement;
    if symmetric_partition {
        // The staircase adjacent to U_n is the last one emitted; drop its
        // lowest blocks.
        let top = s.x.iter().copied().filter(|&q| q != 0).min().expect("validated: a staircase exists");
        let len = n - 1 - top;
        let drop = ((n - kk) / 2 + 1).min(len);
        let keep = s.blocks.len() - drop;
        s.blocks.truncate(keep);
    }
    let mut un: Vec<Block> = (0..n - 1).map(|u| Block::new(BlockKind::TwoC, u)).collect();
    if kk % 2 == 0 {
        un[0].operative = false;
    }
    s.blocks.extend(un.iter().copied());
    for _ in 1..layers {
        s.blocks.extend((0..n - 1).map(|u| Block::new(BlockKind::TwoC, u)));
    }
    s
}

pub fn build(spec: &AnsatzSpec) -> Result<Circuit> {
    match spec.variant {
        Variant::Ccc => build_ccc(spec),
        Variant::Cc => build_cc(spec),
    }
}

pub fn build_ccc(spec: &AnsatzSpec) -> Result<Circuit> {
    spec.validate()?;
    if spec.variant != Variant::Ccc {
        return Err(Error::InvalidSpec("build_ccc needs the CCC variant".into()));
    }
    Ok(ccc_skeleton(spec.n, spec.k, spec.layers).emit(spec.compile_blocks))
}

pub fn build_cc(spec: &AnsatzSpec) -> Result<Circuit> {
    spec.validate()?;
    if spec.variant != Variant::Cc {
        return Err(Error::InvalidSpec("build_cc needs the CC variant".into()));
    }
    Ok(cc_skeleton(spec.n, spec.k, spec.layers, spec.symmetric_partition).emit(spec.compile_blocks))
}

/// Column selector preparing the input of `U_n` for weight `k`: X gates on
/// alternating wires plus a 2C staircase from each X below the top wire.
/// For `k = 3` on five wires this gives `|10⟩|W_3⟩`.
pub fn column_selector(n: usize, k: usize) -> Result<Circuit> {
    if n == 0 || n > 63 || k > n {
        return Err(Error::InvalidSpec(format!("column selector needs 0 ≤ k ≤ n, got n = {n}, k = {k}")));
    }
    Ok(selector_skeleton(n, k).emit(false))
}

/// Problem-agnostic baseline: `layers` rounds of an Ry layer followed by a
/// nearest-neighbour CNOT ladder, then a closing Ry layer.
pub fn build_hardware_efficient(n: usize, layers: usize) -> Result<Circuit> {
    if n == 0 || n > 63 {
        return Err(Error::InvalidSpec(format!("n = {n} outside 1..=63")));
    }
    let mut c = Circuit::new_lnn(n);
    let mut slot = 0;
    for layer in 0..=layers {
        for q in 0..n {
            c.push(Gate::Ry(q, Angle::slot(slot)))?;
            slot += 1;
        }
        if layer < layers {
            for q in 0..n - 1 {
                c.push(Gate::cnot(q, q + 1))?;
            }
        }
    }
    Ok(c)
}

/// Logarithmic layer count used for the baseline.
pub fn hardware_efficient_layers(n: usize) -> usize {
    (usize::BITS - (n.max(2) - 1).leading_zeros()) as usize
}

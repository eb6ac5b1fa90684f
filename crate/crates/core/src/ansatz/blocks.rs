use crate::sim::{Angle, Circuit, Gate};

/// Two-qubit building blocks acting on an upper wire `u` and the wire `u + 1` below it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// `CNOT(u+1→u) · CRy(u→u+1) · CNOT(u+1→u)`; rotates `|10⟩` into `|01⟩`.
    ThreeC,
    /// `CRy(u→u+1) · CNOT(u+1→u)`.
    TwoC,
}

/// Raw block on wires `(0, 1)` of a two-qubit circuit.
pub fn raw_block(kind: BlockKind, angle: Angle) -> Circuit {
    let mut c = Circuit::new_lnn(2);
    push_raw(&mut c, kind, 0, angle);
    c
}

/// Two-CNOT compiled block on wires `(0, 1)`.
///
/// The 3C form equals the raw block up to global phase. The 2C form equals
/// the raw block with its CNOT replaced by `CRy(π)`, which fixes the
/// determinant so the block is reachable with two CNOTs.
pub fn compile_block(kind: BlockKind, angle: Angle) -> Circuit {
    let mut c = Circuit::new_lnn(2);
    push_compiled(&mut c, kind, 0, angle);
    c
}

pub(crate) fn push_raw(c: &mut Circuit, kind: BlockKind, u: usize, angle: Angle) {
    let l = u + 1;
    let gates: &[Gate] = match kind {
        BlockKind::ThreeC => &[Gate::cnot(l, u), Gate::cry(u, l, angle), Gate::cnot(l, u)],
        BlockKind::TwoC => &[Gate::cry(u, l, angle), Gate::cnot(l, u)],
    };
    for g in gates {
        c.push(*g).expect("block wires are in range");
    }
}

pub(crate) fn push_compiled(c: &mut Circuit, kind: BlockKind, u: usize, angle: Angle) {
    let l = u + 1;
    let half = |a: Angle, sign: f64| match a {
        Angle::Param { slot, scale } => Angle::Param { slot, scale: scale * 0.5 * sign },
        Angle::Fixed(v) => Angle::Fixed(v * 0.5 * sign),
    };
    let mut gates = vec![Gate::S(u), Gate::S(l), Gate::H(u), Gate::cnot(u, l)];
    match kind {
        BlockKind::ThreeC => gates.extend([Gate::Ry(u, half(angle, 1.0)), Gate::Ry(l, half(angle, 1.0))]),
        BlockKind::TwoC => gates.extend([Gate::Sdg(u), Gate::Ry(u, half(angle, -1.0)), Gate::S(l), Gate::Ry(l, half(angle, -1.0))]),
    }
    gates.extend([Gate::cnot(u, l), Gate::H(u), Gate::Sdg(u), Gate::Sdg(l)]);
    for g in gates {
        c.push(g).expect("block wires are in range");
    }
}

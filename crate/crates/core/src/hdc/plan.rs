use std::collections::BTreeSet;

use crate::ansatz::{AnsatzSpec, BlockKind, SUPPORT_EPS, Variant, ccc_skeleton, generic_theta, push_compiled, push_raw};
use crate::bits;
use crate::error::{Error, Result};
use crate::sim::{Angle, Circuit, Gate, ProbDist, simulate};

/// How an ansatz is split into subcircuits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    /// One subcircuit per independent column (or column pair) of `U_n`; `k ∈ {2, 3}`.
    Columns,
    /// CCC with `k = ⌊n/2⌋`: an upper and a lower Dicke half joined by one
    /// 3C block that is evaluated classically.
    HalfSplit,
}

impl PlanKind {
    /// Columns for `k ∈ {2, 3}`, the half-split for other CCC `k = ⌊n/2⌋`.
    pub fn default_for(spec: &AnsatzSpec) -> Result<PlanKind> {
        match (spec.variant, spec.k) {
            (_, 2 | 3) => Ok(PlanKind::Columns),
            (Variant::Ccc, k) if k == spec.n / 2 => Ok(PlanKind::HalfSplit),
            (v, k) => Err(Error::UnsupportedPlan(format!("no distributed plan for {v} with n = {}, k = {k}", spec.n))),
        }
    }
}

/// Trailing two-wire block of a half-split subcircuit, evaluated classically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BridgeSite {
    /// Upper wire of the block, local to the subcircuit.
    pub upper: usize,
    /// Index of the first bridge gate; everything from here on belongs to the block.
    pub gate_index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subcircuit {
    /// Column indices of `U_n` (full-width integers) this subcircuit extracts.
    pub columns: Vec<u64>,
    /// Wires `0..offset` of the full register stay `|0⟩` and are not simulated.
    pub offset: usize,
    /// Circuit over wires `offset..n`, with its own parameter slots.
    pub circuit: Circuit,
    pub bridge: Option<BridgeSite>,
    /// Evaluated as the bit-reversal of another subcircuit instead of being run.
    pub mirror_of: Option<usize>,
}

impl Subcircuit {
    pub fn width(&self) -> usize {
        self.circuit.n_qubits()
    }

    pub fn param_count(&self) -> usize {
        if self.mirror_of.is_some() { 0 } else { self.circuit.param_count() }
    }
}

/// Classical split of an ansatz into subcircuits whose supports cover the
/// weight-`k` class.
#[derive(Clone, Debug, PartialEq)]
pub struct SubcircuitPlan {
    pub spec: AnsatzSpec,
    pub kind: PlanKind,
    pub subcircuits: Vec<Subcircuit>,
    /// Whether two subcircuits may output the same string.
    pub overlap: bool,
}

impl SubcircuitPlan {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn len(&self) -> usize {
        self.subcircuits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subcircuits.is_empty()
    }

    /// Total parameters; subcircuit `s` owns `θ[offsets[s]..offsets[s] + P_s]`.
    pub fn param_count(&self) -> usize {
        self.subcircuits.iter().map(Subcircuit::param_count).sum()
    }

    pub fn param_offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.subcircuits
            .iter()
            .map(|s| {
                let o = acc;
                acc += s.param_count();
                o
            })
            .collect()
    }

    /// The θ-slice owned by subcircuit `s`.
    pub fn slice<'a, T>(&self, theta: &'a [T], s: usize) -> Result<&'a [T]> {
        if theta.len() != self.param_count() {
            return Err(Error::ParamLength { expected: self.param_count(), got: theta.len() });
        }
        let o = self.param_offsets()[s];
        Ok(&theta[o..o + self.subcircuits[s].param_count()])
    }

    /// Replaces every subcircuit whose structural support lies inside the
    /// bit-reversed support of a wider one by a mirror of that subcircuit.
    pub fn with_reversal(mut self) -> Result<Self> {
        if self.n() > 20 {
            return Err(Error::UnsupportedPlan("reversal needs structural supports (n ≤ 20)".into()));
        }
        let supports: Vec<BTreeSet<u64>> = self.subcircuits.iter().map(structural_support).collect::<Result<_>>()?;
        let n = self.n();
        for i in 0..self.subcircuits.len() {
            let host = (0..self.subcircuits.len()).find(|&j| {
                j != i
                    && self.subcircuits[j].mirror_of.is_none()
                    && self.subcircuits[j].width() > self.subcircuits[i].width()
                    && supports[i].iter().all(|x| supports[j].contains(&bits::reverse(*x, n)))
            });
            if let Some(j) = host {
                self.subcircuits[i].mirror_of = Some(j);
            }
        }
        self.overlap = true;
        Ok(self)
    }
}

/// Support of a subcircuit at the generic angles, as full-width strings.
pub fn structural_support(sub: &Subcircuit) -> Result<BTreeSet<u64>> {
    let theta = generic_theta(sub.circuit.param_count());
    let dist = ProbDist::from_state(&simulate::<f64>(&sub.circuit, &theta)?);
    Ok(dist.support(SUPPORT_EPS).into_iter().collect())
}

pub fn plan_subcircuits(spec: &AnsatzSpec) -> Result<SubcircuitPlan> {
    plan_with(spec, PlanKind::default_for(spec)?)
}

pub fn plan_with(spec: &AnsatzSpec, kind: PlanKind) -> Result<SubcircuitPlan> {
    spec.validate()?;
    if spec.symmetric_partition {
        return Err(Error::UnsupportedPlan("symmetric partition has no distributed plan".into()));
    }
    let (n, k) = (spec.n, spec.k);
    let (subcircuits, overlap) = match (kind, spec.variant, k) {
        (PlanKind::Columns, Variant::Ccc, 2) => (ccc_columns(spec, None)?, false),
        (PlanKind::Columns, Variant::Ccc, 3) => {
            let extra = n - 1 - 2 * (n.div_ceil(2) - 1);
            (ccc_columns(spec, Some(extra))?, false)
        }
        (PlanKind::Columns, Variant::Cc, 2) => (cc_columns(spec, false)?, true),
        (PlanKind::Columns, Variant::Cc, 3) => (cc_columns(spec, true)?, true),
        (PlanKind::HalfSplit, Variant::Ccc, k) if k == n / 2 => (half_split(spec)?, true),
        _ => return Err(Error::UnsupportedPlan(format!("{kind:?} plan for {} with n = {n}, k = {k}", spec.variant))),
    };
    let mut plan = SubcircuitPlan { spec: spec.clone(), kind, subcircuits, overlap };
    if let Some(wanted) = &spec.column_subset {
        plan.subcircuits.retain(|s| s.columns.iter().any(|c| wanted.contains(c)));
        if plan.subcircuits.is_empty() {
            return Err(Error::UnsupportedPlan(format!("no subcircuit covers columns {wanted:?}")));
        }
    }
    Ok(plan)
}

fn column_value(n: usize, wires: &[usize]) -> u64 {
    wires.iter().fold(0, |acc, &q| acc | bits::mask(n, q))
}

/// Appends `layers` copies of `U_n`, skipping blocks whose wires are still
/// `|0⟩` (both blocks fix `|00⟩`) and reducing a 2C block whose control is
/// still `|0⟩` to its CNOT.
fn push_pruned_staircase(c: &mut Circuit, kind: BlockKind, live: &mut [bool], slot: &mut usize, compile: bool, layers: usize) {
    let n = live.len();
    for _ in 0..layers {
        for u in 0..n - 1 {
            if !live[u] && !live[u + 1] {
                continue;
            }
            if kind == BlockKind::TwoC && !live[u] {
                c.push(Gate::cnot(u + 1, u)).expect("wires in range");
            } else if compile {
                push_compiled(c, kind, u, Angle::slot(*slot));
                *slot += 1;
            } else {
                push_raw(c, kind, u, Angle::slot(*slot));
                *slot += 1;
            }
            live[u] = true;
            live[u + 1] = true;
        }
    }
}

/// Drops idle top wires so the subcircuit only spans what it touches.
fn trim(c: Circuit, columns: Vec<u64>) -> Subcircuit {
    let offset = c.gates().iter().flat_map(|g| g.qubits()).min().unwrap_or(0);
    let mut out = Circuit::new_lnn(c.n_qubits() - offset);
    for g in c.gates() {
        out.push(g.map_qubits(|q| q - offset)).expect("shifted wires stay adjacent");
    }
    Subcircuit { columns, offset, circuit: out, bridge: None, mirror_of: None }
}

fn ccc_columns(spec: &AnsatzSpec, extra: Option<usize>) -> Result<Vec<Subcircuit>> {
    let n = spec.n;
    let count = if extra.is_some() { (n - 1) / 2 } else { n / 2 };
    let mut subs = Vec::with_capacity(count);
    for i in 0..count {
        let a = n - 2 - 2 * i;
        let mut wires = vec![a, a + 1];
        wires.extend(extra);
        wires.sort_unstable();
        let mut c = Circuit::new_lnn(n);
        let mut live = vec![false; n];
        for &q in &wires {
            c.push(Gate::X(q))?;
            live[q] = true;
        }
        let mut slot = 0;
        push_pruned_staircase(&mut c, BlockKind::ThreeC, &mut live, &mut slot, spec.compile_blocks, spec.layers);
        subs.push(trim(c, vec![column_value(n, &wires)]));
    }
    Ok(subs)
}

/// CC column pairs: `Ry ⊗ X` on wires `(r, r + 1)` superposes the columns
/// with and without bit `r`; with `top_x` the top wire is also set.
fn cc_columns(spec: &AnsatzSpec, top_x: bool) -> Result<Vec<Subcircuit>> {
    let n = spec.n;
    let first = if top_x { 2 } else { 1 };
    let mut subs = Vec::new();
    let mut r = first;
    loop {
        let mut c = Circuit::new_lnn(n);
        let mut live = vec![false; n];
        let mut slot = 0;
        let mut fixed: Vec<usize> = Vec::new();
        if top_x {
            c.push(Gate::X(0))?;
            live[0] = true;
            fixed.push(0);
        }
        let columns = if r + 1 < n {
            c.push(Gate::Ry(r, Angle::slot(slot)))?;
            slot += 1;
            c.push(Gate::X(r + 1))?;
            live[r] = true;
            live[r + 1] = true;
            let base: Vec<usize> = fixed.iter().copied().chain([r + 1]).collect();
            let with: Vec<usize> = base.iter().copied().chain([r]).collect();
            vec![column_value(n, &with), column_value(n, &base)]
        } else {
            // No partner wire left: the lone column with only the bottom bit.
            c.push(Gate::X(n - 1))?;
            live[n - 1] = true;
            let base: Vec<usize> = fixed.iter().copied().chain([n - 1]).collect();
            vec![column_value(n, &base)]
        };
        push_pruned_staircase(&mut c, BlockKind::TwoC, &mut live, &mut slot, spec.compile_blocks, spec.layers);
        subs.push(trim(c, columns));
        if r + 1 >= n - 1 {
            break;
        }
        r += 2;
    }
    Ok(subs)
}

fn half_split(spec: &AnsatzSpec) -> Result<Vec<Subcircuit>> {
    let (n, k) = (spec.n, spec.k);
    let h = n.div_ceil(2);
    let mut subs = Vec::with_capacity(h - 1);
    for w in 1..h {
        let upper = ccc_skeleton(h, w, spec.layers).emit(spec.compile_blocks);
        let lower = ccc_skeleton(n - h, k - w, spec.layers).emit(spec.compile_blocks);
        let mut c = Circuit::new_lnn(n);
        c.append(&upper, 0, 0)?;
        c.append(&lower, h, upper.param_count())?;
        let gate_index = c.len();
        let slot = upper.param_count() + lower.param_count();
        if spec.compile_blocks {
            push_compiled(&mut c, BlockKind::ThreeC, h - 1, Angle::slot(slot));
        } else {
            push_raw(&mut c, BlockKind::ThreeC, h - 1, Angle::slot(slot));
        }
        // The product prefix this subcircuit starts from: weight w on top,
        // k − w below.
        let column = column_value(n, &(0..w).collect::<Vec<_>>()) | column_value(n, &(h..h + k - w).collect::<Vec<_>>());
        subs.push(Subcircuit {
            columns: vec![column],
            offset: 0,
            circuit: c,
            bridge: Some(BridgeSite { upper: h - 1, gate_index }),
            mirror_of: None,
        });
    }
    Ok(subs)
}

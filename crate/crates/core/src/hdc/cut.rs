use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};

use super::plan::Subcircuit;
use crate::ansatz::{SUPPORT_EPS, generic_theta};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::sim::{Angle, Circuit, Gate, ProbDist, Simulator, StateVector};

/// Where a subcircuit is severed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutPoint {
    /// Wire `qubit` is cut just before gate `gate_index`: earlier gates on it
    /// belong to the fragment above, later ones to the fragment below.
    Wire { qubit: usize, gate_index: usize },
    /// The gates from `gate_index` on act only on `(upper, upper + 1)` and are
    /// applied classically to the product of the two halves.
    Bridge { upper: usize, gate_index: usize },
}

/// A piece of a cut subcircuit over the contiguous wires `lo..=hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Fragment {
    pub id: usize,
    pub lo: usize,
    pub hi: usize,
    pub circuit: Circuit,
    /// Local parameter slot `i` reads subcircuit slot `slots[i]`.
    pub slots: Vec<usize>,
    /// Local wire 0 is prepared in `|0⟩` or `|1⟩` from the fragment above.
    pub input: bool,
    /// Local wire `hi − lo` is measured and forwarded to the fragment below.
    pub output: bool,
    /// Output Hamming weights at generic angles, per input value.
    pub weights: [Vec<usize>; 2],
}

impl Fragment {
    pub fn width(&self) -> usize {
        self.hi - self.lo + 1
    }

    /// Bits this fragment contributes to the combined string.
    pub fn measured_bits(&self) -> usize {
        self.width() - usize::from(self.output)
    }

    pub fn inputs(&self) -> &'static [u8] {
        if self.input { &[0, 1] } else { &[0] }
    }

    pub fn theta_slice<T: Copy>(&self, sub_theta: &[T]) -> Vec<T> {
        self.slots.iter().map(|&s| sub_theta[s]).collect()
    }

    /// Bit patterns of the owned angles; any change means re-execution.
    pub fn fingerprint(&self, sub_theta: &[f64]) -> Vec<u64> {
        self.slots.iter().map(|&s| sub_theta[s].to_bits()).collect()
    }

    pub fn state<T: Real>(&self, sub_theta: &[T], input: u8) -> Result<StateVector<T>> {
        let w = self.width();
        let start = if input == 1 && self.input { 1u64 << (w - 1) } else { 0 };
        Simulator::default().run_from(&self.circuit, &self.theta_slice(sub_theta), StateVector::basis(w, start))
    }

    pub fn dist<T: Real>(&self, sub_theta: &[T], input: u8) -> Result<ProbDist<T>> {
        Ok(ProbDist::from_state(&self.state(sub_theta, input)?))
    }
}

/// The classically evaluated two-wire block of a half-split.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeBlock {
    pub upper: usize,
    pub circuit: Circuit,
    pub slots: Vec<usize>,
}

impl BridgeBlock {
    /// `T[a][b] = |⟨b|B|a⟩|²` over the two-bit values of `(upper, upper + 1)`.
    pub fn transfer<T: Real>(&self, sub_theta: &[T]) -> Result<[[T; 4]; 4]> {
        let theta: Vec<T> = self.slots.iter().map(|&s| sub_theta[s]).collect();
        let sim = Simulator::default();
        let mut t = [[T::zero(); 4]; 4];
        for (a, row) in t.iter_mut().enumerate() {
            let out = sim.run_from(&self.circuit, &theta, StateVector::basis(2, a as u64))?;
            for (b, amp) in out.amplitudes().iter().enumerate() {
                row[b] = amp.norm_sqr();
            }
        }
        Ok(t)
    }
}

/// A cut subcircuit: a chain of fragments joined by single wires, or two
/// independent halves joined by a bridge block.
#[derive(Clone, Debug, PartialEq)]
pub struct CutPlan {
    pub width: usize,
    pub param_count: usize,
    pub cuts: Vec<CutPoint>,
    pub fragments: Vec<Fragment>,
    pub bridge: Option<BridgeBlock>,
    id: u64,
}

impl CutPlan {
    /// Content hash, used to tie cache entries to a plan.
    pub fn id(&self) -> u64 {
        self.id
    }

    /// Number of single-wire cuts.
    pub fn wire_cuts(&self) -> usize {
        self.cuts.iter().filter(|c| matches!(c, CutPoint::Wire { .. })).count()
    }

    pub fn widths(&self) -> Vec<usize> {
        self.fragments.iter().map(Fragment::width).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PlanDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<CutPlan> {
        let doc: PlanDoc = serde_json::from_str(text)?;
        doc.into_plan()
    }
}

/// Finds the cut point on wire `q`: after every gate linking `q` upwards and
/// before every gate linking it downwards.
pub fn wire_cut(circuit: &Circuit, q: usize) -> Result<CutPoint> {
    let gates = circuit.gates();
    let g = gates.iter().rposition(|gate| gate.touches(q) && gate.qubits().iter().any(|&p| p < q)).map_or(0, |i| i + 1);
    if let Some(bad) = gates[..g].iter().position(|gate| gate.touches(q) && gate.qubits().iter().any(|&p| p > q)) {
        return Err(Error::InvalidCut(format!("wire {q} is linked downwards at gate {bad} before its last upward link")));
    }
    Ok(CutPoint::Wire { qubit: q, gate_index: g })
}

/// Cut points giving fragments of at most `max_width` wires, or the bridge
/// for half-split subcircuits.
pub fn default_cuts(sub: &Subcircuit, max_width: usize) -> Result<Vec<CutPoint>> {
    if let Some(b) = sub.bridge {
        return Ok(vec![CutPoint::Bridge { upper: b.upper, gate_index: b.gate_index }]);
    }
    if max_width < 2 {
        return Err(Error::InvalidCut("fragments need at least two wires".into()));
    }
    let w = sub.width();
    let mut cuts = Vec::new();
    let mut q = max_width - 1;
    while q < w - 1 {
        cuts.push(wire_cut(&sub.circuit, q)?);
        q += max_width - 1;
    }
    Ok(cuts)
}

pub fn cut(sub: &Subcircuit, positions: &[CutPoint]) -> Result<CutPlan> {
    cut_circuit(&sub.circuit, positions)
}

pub fn cut_circuit(circuit: &Circuit, positions: &[CutPoint]) -> Result<CutPlan> {
    let bridges: Vec<(usize, usize)> = positions
        .iter()
        .filter_map(|p| match p {
            CutPoint::Bridge { upper, gate_index } => Some((*upper, *gate_index)),
            CutPoint::Wire { .. } => None,
        })
        .collect();
    let mut plan = match bridges.as_slice() {
        [] => cut_wires(circuit, positions)?,
        [(u, g)] if positions.len() == 1 => cut_bridge(circuit, *u, *g)?,
        _ => return Err(Error::InvalidCut("a bridge cut must be the only cut point".into())),
    };
    check_fragments(&mut plan)?;
    plan.id = plan_hash(&plan);
    Ok(plan)
}

fn cut_wires(circuit: &Circuit, positions: &[CutPoint]) -> Result<CutPlan> {
    let w = circuit.n_qubits();
    let mut cuts: Vec<(usize, usize)> = positions
        .iter()
        .map(|p| match p {
            CutPoint::Wire { qubit, gate_index } => (*qubit, *gate_index),
            CutPoint::Bridge { .. } => unreachable!("filtered by caller"),
        })
        .collect();
    cuts.sort_unstable();
    if cuts.windows(2).any(|p| p[0].0 == p[1].0) {
        return Err(Error::InvalidCut("two cuts on one wire".into()));
    }
    if let Some((q, _)) = cuts.iter().find(|(q, _)| *q >= w) {
        return Err(Error::InvalidCut(format!("wire {q} outside a {w}-wire subcircuit")));
    }
    let p = cuts.len();
    let lo = |f: usize| if f == 0 { 0 } else { cuts[f - 1].0 };
    let hi = |f: usize| if f == p { w - 1 } else { cuts[f].0 };
    let mut members: Vec<Vec<Gate>> = vec![Vec::new(); p + 1];
    for (t, gate) in circuit.gates().iter().enumerate() {
        let qs = gate.qubits();
        let (a, b) = (*qs.iter().min().expect("gates act on a wire"), *qs.iter().max().expect("gates act on a wire"));
        let home = (0..=p).find(|&f| {
            let fits = lo(f) <= a && b <= hi(f);
            let after_input = f == 0 || a != lo(f) || t >= cuts[f - 1].1;
            let before_output = f == p || b != hi(f) || t < cuts[f].1;
            fits && after_input && before_output
        });
        match home {
            Some(f) => members[f].push(*gate),
            None => {
                return Err(Error::InvalidCut(format!(
                    "gate {t} ({} on wires {qs:?}) would sever more than one wire between fragments",
                    gate.name()
                )));
            }
        }
    }
    let mut fragments = Vec::with_capacity(p + 1);
    for (f, gates) in members.into_iter().enumerate() {
        let (l, h) = (lo(f), hi(f));
        if f > 0 && h <= l && f < p {
            return Err(Error::InvalidCut(format!("fragment {f} has no wire of its own")));
        }
        let (c, slots) = localize(&gates, l, h - l + 1, circuit.is_lnn())?;
        fragments.push(Fragment { id: f, lo: l, hi: h, circuit: c, slots, input: f > 0, output: f < p, weights: [vec![], vec![]] });
    }
    Ok(CutPlan {
        width: w,
        param_count: circuit.param_count(),
        cuts: cuts.into_iter().map(|(qubit, gate_index)| CutPoint::Wire { qubit, gate_index }).collect(),
        fragments,
        bridge: None,
        id: 0,
    })
}

fn cut_bridge(circuit: &Circuit, u: usize, g: usize) -> Result<CutPlan> {
    let w = circuit.n_qubits();
    if u + 1 >= w || g > circuit.len() {
        return Err(Error::InvalidCut(format!("bridge at wire {u}, gate {g} outside the subcircuit")));
    }
    let (head, tail) = circuit.gates().split_at(g);
    if let Some(t) = tail.iter().position(|gate| gate.qubits().iter().any(|&q| q != u && q != u + 1)) {
        return Err(Error::InvalidCut(format!("gate {} after the bridge leaves wires ({u}, {})", g + t, u + 1)));
    }
    let (mut upper, mut lower) = (Vec::new(), Vec::new());
    for (t, gate) in head.iter().enumerate() {
        let qs = gate.qubits();
        if qs.iter().all(|&q| q <= u) {
            upper.push(*gate);
        } else if qs.iter().all(|&q| q > u) {
            lower.push(*gate);
        } else {
            return Err(Error::InvalidCut(format!("gate {t} links the halves before the bridge")));
        }
    }
    let (cu, su) = localize(&upper, 0, u + 1, circuit.is_lnn())?;
    let (cl, sl) = localize(&lower, u + 1, w - u - 1, circuit.is_lnn())?;
    let (cb, sb) = localize(tail, u, 2, circuit.is_lnn())?;
    let half = |id, lo, hi, circuit, slots| Fragment { id, lo, hi, circuit, slots, input: false, output: false, weights: [vec![], vec![]] };
    Ok(CutPlan {
        width: w,
        param_count: circuit.param_count(),
        cuts: vec![CutPoint::Bridge { upper: u, gate_index: g }],
        fragments: vec![half(0, 0, u, cu, su), half(1, u + 1, w - 1, cl, sl)],
        bridge: Some(BridgeBlock { upper: u, circuit: cb, slots: sb }),
        id: 0,
    })
}

/// Moves gates onto local wires `0..width` and renumbers parameter slots in
/// order of first use.
fn localize(gates: &[Gate], lo: usize, width: usize, lnn: bool) -> Result<(Circuit, Vec<usize>)> {
    let mut slots: Vec<usize> = Vec::new();
    for g in gates {
        if let Some(Angle::Param { slot, .. }) = g.angle()
            && !slots.contains(&slot)
        {
            slots.push(slot);
        }
    }
    let mut c = if lnn { Circuit::new_lnn(width) } else { Circuit::new(width) };
    for g in gates {
        let local = g.map_qubits(|q| q - lo).map_angle(|a| match a {
            Angle::Param { slot, scale } => Angle::Param { slot: slots.iter().position(|&s| s == slot).expect("collected above"), scale },
            fixed => fixed,
        });
        c.push(local)?;
    }
    Ok((c, slots))
}

/// Records structural weights and rejects fragments whose forwarded wire
/// could be in superposition for a fixed measured string: such a cut needs
/// the X and Y channels.
fn check_fragments(plan: &mut CutPlan) -> Result<()> {
    for frag in &mut plan.fragments {
        let theta = generic_theta(plan.param_count);
        for &input in frag.inputs() {
            let dist = frag.dist::<f64>(&theta, input)?;
            frag.weights[input as usize] = dist.weights(SUPPORT_EPS).into_iter().collect();
            if frag.output {
                check_forwarded_wire(&dist, frag.id, input, SUPPORT_EPS)?;
            }
        }
    }
    Ok(())
}

/// The measured part of a fragment output must determine its cut bit.
pub(crate) fn check_forwarded_wire<T: Real>(dist: &ProbDist<T>, fragment: usize, input: u8, eps: T) -> Result<()> {
    let mut zero = BTreeSet::new();
    let mut one = BTreeSet::new();
    for (x, p) in dist.iter() {
        if p > eps {
            if x & 1 == 0 {
                zero.insert(x >> 1)
            } else {
                one.insert(x >> 1)
            };
        }
    }
    if let Some(s) = zero.intersection(&one).next() {
        return Err(Error::ChannelViolation(format!(
            "fragment {fragment} (input {input}) outputs measured string {s:b} with both cut values"
        )));
    }
    Ok(())
}

fn plan_hash(plan: &CutPlan) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    plan.width.hash(&mut h);
    for f in &plan.fragments {
        (f.lo, f.hi, f.input, f.output, &f.slots).hash(&mut h);
        f.circuit.to_text().hash(&mut h);
    }
    if let Some(b) = &plan.bridge {
        (b.upper, &b.slots, b.circuit.to_text()).hash(&mut h);
    }
    h.finish()
}

#[derive(serde::Serialize, serde::Deserialize)]
struct PlanDoc {
    width: usize,
    param_count: usize,
    cuts: Vec<CutPoint>,
    fragments: Vec<FragmentDoc>,
    bridge: Option<BridgeDoc>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct FragmentDoc {
    lo: usize,
    hi: usize,
    input: bool,
    output: bool,
    slots: Vec<usize>,
    weights: [Vec<usize>; 2],
    circuit: String,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct BridgeDoc {
    upper: usize,
    slots: Vec<usize>,
    circuit: String,
}

impl From<&CutPlan> for PlanDoc {
    fn from(p: &CutPlan) -> Self {
        PlanDoc {
            width: p.width,
            param_count: p.param_count,
            cuts: p.cuts.clone(),
            fragments: p
                .fragments
                .iter()
                .map(|f| FragmentDoc {
                    lo: f.lo,
                    hi: f.hi,
                    input: f.input,
                    output: f.output,
                    slots: f.slots.clone(),
                    weights: f.weights.clone(),
                    circuit: f.circuit.to_text(),
                })
                .collect(),
            bridge: p.bridge.as_ref().map(|b| BridgeDoc { upper: b.upper, slots: b.slots.clone(), circuit: b.circuit.to_text() }),
        }
    }
}

impl PlanDoc {
    fn into_plan(self) -> Result<CutPlan> {
        let fragments = self
            .fragments
            .into_iter()
            .enumerate()
            .map(|(id, f)| {
                Ok(Fragment {
                    id,
                    lo: f.lo,
                    hi: f.hi,
                    circuit: Circuit::from_text(&f.circuit)?,
                    slots: f.slots,
                    input: f.input,
                    output: f.output,
                    weights: f.weights,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let bridge = match self.bridge {
            Some(b) => Some(BridgeBlock { upper: b.upper, circuit: Circuit::from_text(&b.circuit)?, slots: b.slots }),
            None => None,
        };
        let mut plan = CutPlan { width: self.width, param_count: self.param_count, cuts: self.cuts, fragments, bridge, id: 0 };
        plan.id = plan_hash(&plan);
        Ok(plan)
    }
}

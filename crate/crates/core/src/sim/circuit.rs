use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::real::Real;

/// Rotation angle of an `Ry` or `CRy` gate.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Angle {
    /// `scale * theta[slot]`.
    Param {
        slot: usize,
        scale: f64,
    },
    Fixed(f64),
}

impl Angle {
    pub fn slot(slot: usize) -> Self {
        Angle::Param { slot, scale: 1.0 }
    }

    pub fn scaled(slot: usize, scale: f64) -> Self {
        Angle::Param { slot, scale }
    }

    pub fn resolve<T: Real>(&self, theta: &[T]) -> T {
        match *self {
            Angle::Param { slot, scale } => {
                if scale == 1.0 {
                    theta[slot]
                } else {
                    theta[slot] * T::from_f64_lossy(scale)
                }
            }
            Angle::Fixed(a) => T::from_f64_lossy(a),
        }
    }

    fn slot_index(&self) -> Option<usize> {
        match *self {
            Angle::Param { slot, .. } => Some(slot),
            Angle::Fixed(_) => None,
        }
    }

    fn shift_slot(self, by: usize) -> Self {
        match self {
            Angle::Param { slot, scale } => Angle::Param { slot: slot + by, scale },
            fixed => fixed,
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::Param { slot, scale } if scale == 1.0 => write!(f, "p{slot}"),
            Angle::Param { slot, scale } => write!(f, "p{slot}*{scale:?}"),
            Angle::Fixed(a) => write!(f, "{a:?}"),
        }
    }
}

/// One gate of the alphabet. Two-qubit kinds list the control first.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Gate {
    X(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    Ry(usize, Angle),
    Cnot { control: usize, target: usize },
    Cry { control: usize, target: usize, angle: Angle },
}

impl Gate {
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn cry(control: usize, target: usize, angle: Angle) -> Self {
        Gate::Cry { control, target, angle }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::X(_) => "X",
            Gate::H(_) => "H",
            Gate::S(_) => "S",
            Gate::Sdg(_) => "SDG",
            Gate::Ry(..) => "RY",
            Gate::Cnot { .. } => "CNOT",
            Gate::Cry { .. } => "CRY",
        }
    }

    /// Qubits touched, control first for two-qubit kinds.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q) | Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::Ry(q, _) => vec![q],
            Gate::Cnot { control, target } | Gate::Cry { control, target, .. } => vec![control, target],
        }
    }

    pub fn angle(&self) -> Option<Angle> {
        match *self {
            Gate::Ry(_, a) | Gate::Cry { angle: a, .. } => Some(a),
            _ => None,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::Cry { .. })
    }

    pub fn touches(&self, q: usize) -> bool {
        self.qubits().contains(&q)
    }

    /// Same gate with every qubit index passed through `f`.
    pub fn map_qubits(self, f: impl Fn(usize) -> usize) -> Self {
        match self {
            Gate::X(q) => Gate::X(f(q)),
            Gate::H(q) => Gate::H(f(q)),
            Gate::S(q) => Gate::S(f(q)),
            Gate::Sdg(q) => Gate::Sdg(f(q)),
            Gate::Ry(q, a) => Gate::Ry(f(q), a),
            Gate::Cnot { control, target } => Gate::Cnot { control: f(control), target: f(target) },
            Gate::Cry { control, target, angle } => Gate::Cry { control: f(control), target: f(target), angle },
        }
    }

    /// Same gate with its parameter slot (if any) passed through `f`.
    pub fn map_angle(self, f: impl Fn(Angle) -> Angle) -> Self {
        match self {
            Gate::Ry(q, a) => Gate::Ry(q, f(a)),
            Gate::Cry { control, target, angle } => Gate::Cry { control, target, angle: f(angle) },
            other => other,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        if let Some(a) = self.angle() {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

/// Ordered gate list over `n_qubits` wires with symbolic parameter slots.
///
/// `param_count` is one past the highest slot referenced; [`Circuit::validate`]
/// additionally requires every slot below it to be used.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    param_count: usize,
    lnn: bool,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new(), param_count: 0, lnn: false }
    }

    /// Circuit whose two-qubit gates must act on adjacent wires.
    pub fn new_lnn(n_qubits: usize) -> Self {
        Circuit { lnn: true, ..Circuit::new(n_qubits) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn is_lnn(&self) -> bool {
        self.lnn
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        for &q in &qs {
            if q >= self.n_qubits {
                return Err(Error::InvalidGate(format!("{gate}: qubit {q} out of range for width {}", self.n_qubits)));
            }
        }
        if qs.len() == 2 {
            if qs[0] == qs[1] {
                return Err(Error::InvalidGate(format!("{gate}: control equals target")));
            }
            if self.lnn && qs[0].abs_diff(qs[1]) != 1 {
                return Err(Error::InvalidGate(format!("{gate}: non-adjacent wires in a nearest-neighbour circuit")));
            }
        }
        if let Some(a) = gate.angle() {
            match a {
                Angle::Param { slot, scale } => {
                    if !scale.is_finite() {
                        return Err(Error::InvalidGate(format!("{gate}: non-finite scale")));
                    }
                    self.param_count = self.param_count.max(slot + 1);
                }
                Angle::Fixed(v) if !v.is_finite() => {
                    return Err(Error::InvalidGate(format!("{gate}: non-finite angle")));
                }
                Angle::Fixed(_) => {}
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Appends `other` with its wires shifted down by `qubit_offset` and its
    /// slots shifted by `slot_offset`.
    pub fn append(&mut self, other: &Circuit, qubit_offset: usize, slot_offset: usize) -> Result<()> {
        for g in &other.gates {
            self.push(g.map_qubits(|q| q + qubit_offset).map_angle(|a| a.shift_slot(slot_offset)))?;
        }
        Ok(())
    }

    /// Checks that every slot in `[0, param_count)` is referenced.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.param_count];
        for g in &self.gates {
            if let Some(s) = g.angle().and_then(|a| a.slot_index()) {
                seen[s] = true;
            }
        }
        match seen.iter().position(|s| !s) {
            Some(s) => Err(Error::InvalidCircuit(format!("parameter slot {s} is never referenced"))),
            None => Ok(()),
        }
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Longest chain of two-qubit gates sharing wires; single-qubit gates are free.
    pub fn two_qubit_depth(&self) -> usize {
        let mut level = vec![0usize; self.n_qubits];
        for g in &self.gates {
            if let Gate::Cnot { control, target } | Gate::Cry { control, target, .. } = *g {
                let d = level[control].max(level[target]) + 1;
                level[control] = d;
                level[target] = d;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    /// Line-oriented text form: a `qubits N params P [lnn]` header followed by
    /// one `GATE q0 [q1] [angle]` line per gate.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {} params {}", self.n_qubits, self.param_count);
        if self.lnn {
            out.push_str(" lnn");
        }
        out.push('\n');
        for g in &self.gates {
            let _ = writeln!(out, "{g}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let perr = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
        let tok: Vec<&str> = header.split_whitespace().collect();
        let lnn = match tok.as_slice() {
            ["qubits", _, "params", _] => false,
            ["qubits", _, "params", _, "lnn"] => true,
            _ => return Err(perr(hline, format!("bad header `{header}`"))),
        };
        let n: usize = tok[1].parse().map_err(|_| perr(hline, format!("bad qubit count `{}`", tok[1])))?;
        let p: usize = tok[3].parse().map_err(|_| perr(hline, format!("bad parameter count `{}`", tok[3])))?;
        let mut c = Circuit { lnn, ..Circuit::new(n) };
        for (i, line) in lines {
            let gate = parse_gate(line).map_err(|m| perr(i, m))?;
            c.push(gate).map_err(|e| perr(i, e.to_string()))?;
        }
        if c.param_count != p {
            return Err(perr(hline, format!("header declares {p} parameters, gates reference {}", c.param_count)));
        }
        c.validate()?;
        Ok(c)
    }
}

fn parse_gate(line: &str) -> std::result::Result<Gate, String> {
    let tok: Vec<&str> = line.split_whitespace().collect();
    let q = |i: usize| -> std::result::Result<usize, String> {
        tok.get(i).ok_or_else(|| format!("missing operand in `{line}`"))?.parse().map_err(|_| format!("bad qubit in `{line}`"))
    };
    let a =
        |i: usize| -> std::result::Result<Angle, String> { parse_angle(tok.get(i).ok_or_else(|| format!("missing angle in `{line}`"))?) };
    let want = |len: usize| if tok.len() == len { Ok(()) } else { Err(format!("wrong operand count in `{line}`")) };
    let g = match tok[0] {
        "X" => Gate::X(q(1)?),
        "H" => Gate::H(q(1)?),
        "S" => Gate::S(q(1)?),
        "SDG" => Gate::Sdg(q(1)?),
        "RY" => Gate::Ry(q(1)?, a(2)?),
        "CNOT" => Gate::cnot(q(1)?, q(2)?),
        "CRY" => Gate::cry(q(1)?, q(2)?, a(3)?),
        other => return Err(format!("unknown gate `{other}`")),
    };
    want(1 + g.qubits().len() + usize::from(g.angle().is_some()))?;
    Ok(g)
}

fn parse_angle(s: &str) -> std::result::Result<Angle, String> {
    if let Some(rest) = s.strip_prefix('p') {
        let (slot, scale) = match rest.split_once('*') {
            Some((slot, scale)) => (slot, scale.parse::<f64>().map_err(|_| format!("bad scale `{scale}`"))?),
            None => (rest, 1.0),
        };
        let slot = slot.parse().map_err(|_| format!("bad slot `{s}`"))?;
        Ok(Angle::Param { slot, scale })
    } else {
        s.parse().map(Angle::Fixed).map_err(|_| format!("bad angle `{s}`"))
    }
}

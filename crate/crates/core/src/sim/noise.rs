use rand::Rng as _;

use super::rng;
use super::sample::SampleSet;
use crate::error::{Error, Result};

/// Readout fidelities `(qubit label, f00, f11)` of the six-qubit chain used in
/// the hardware runs.
pub const DEVICE_FIDELITIES: [(&str, f64, f64); 6] = [
    ("Q45", 0.973, 0.931),
    ("Q46", 0.951, 0.924),
    ("Q52", 0.970, 0.926),
    ("Q53", 0.972, 0.941),
    ("Q54", 0.917, 0.854),
    ("Q48", 0.910, 0.832),
];

/// Independent per-qubit bit-flip readout channel. `f00[q]` is the probability
/// of reading 0 when qubit `q` is 0, `f11[q]` likewise for 1.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReadoutNoiseModel {
    pub f00: Vec<f64>,
    pub f11: Vec<f64>,
}

impl ReadoutNoiseModel {
    pub fn new(f00: Vec<f64>, f11: Vec<f64>) -> Result<Self> {
        let m = ReadoutNoiseModel { f00, f11 };
        m.validate()?;
        Ok(m)
    }

    pub fn noiseless(m: usize) -> Self {
        ReadoutNoiseModel { f00: vec![1.0; m], f11: vec![1.0; m] }
    }

    pub fn uniform(m: usize, f00: f64, f11: f64) -> Result<Self> {
        Self::new(vec![f00; m], vec![f11; m])
    }

    /// [`DEVICE_FIDELITIES`] assigned to qubits in order, cycling when
    /// `m` exceeds six.
    pub fn device(m: usize) -> Self {
        let rows = (0..m).map(|q| DEVICE_FIDELITIES[q % DEVICE_FIDELITIES.len()]);
        let (f00, f11) = rows.map(|(_, a, b)| (a, b)).unzip();
        ReadoutNoiseModel { f00, f11 }
    }

    pub fn width(&self) -> usize {
        self.f00.len()
    }

    /// Model restricted to qubits `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.width() {
            return Err(Error::WidthMismatch { expected: start + len, got: self.width() });
        }
        Ok(ReadoutNoiseModel { f00: self.f00[start..start + len].to_vec(), f11: self.f11[start..start + len].to_vec() })
    }

    pub fn validate(&self) -> Result<()> {
        if self.f00.len() != self.f11.len() {
            return Err(Error::InvalidNoise(format!("{} f00 entries vs {} f11 entries", self.f00.len(), self.f11.len())));
        }
        for (q, f) in self.f00.iter().chain(&self.f11).enumerate() {
            if !(*f > 0.0 && *f <= 1.0) {
                return Err(Error::InvalidNoise(format!("fidelity {f} (entry {q}) outside (0, 1]")));
            }
        }
        Ok(())
    }

    /// Probability of reading `read` on qubit `q` when the true bit is `truth`.
    pub fn transition(&self, q: usize, truth: bool, read: bool) -> f64 {
        match (truth, read) {
            (false, false) => self.f00[q],
            (false, true) => 1.0 - self.f00[q],
            (true, true) => self.f11[q],
            (true, false) => 1.0 - self.f11[q],
        }
    }
}

/// Flips every recorded bit independently according to `noise`, preserving draw order.
pub fn apply_readout_noise(samples: &SampleSet, noise: &ReadoutNoiseModel, seed: u64) -> Result<SampleSet> {
    let n = samples.n_bits();
    if noise.width() != n {
        return Err(Error::WidthMismatch { expected: n, got: noise.width() });
    }
    noise.validate()?;
    let mut r = rng::seeded(seed);
    let draws = samples
        .draws()
        .iter()
        .map(|&x| {
            let mut out = x;
            for q in 0..n {
                let m = 1u64 << (n - 1 - q);
                let flip = if x & m == 0 { 1.0 - noise.f00[q] } else { 1.0 - noise.f11[q] };
                if flip > 0.0 && r.random::<f64>() < flip {
                    out ^= m;
                }
            }
            out
        })
        .collect();
    Ok(SampleSet::from_draws(n, draws))
}

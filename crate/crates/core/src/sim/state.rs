use num_complex::Complex;
use rayon::prelude::*;

use super::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::real::Real;

pub const DEFAULT_MAX_QUBITS: usize = 26;

// Below this many amplitudes the rayon split costs more than it saves.
const PAR_THRESHOLD: usize = 1 << 14;

/// Pure state over `n` qubits. Index bit `n-1-q` holds qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    n: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: u64) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1usize << n];
        amps[index as usize] = Complex::new(T::one(), T::zero());
        StateVector { n, amps }
    }

    /// Wraps raw amplitudes; the caller is responsible for normalization.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != 1usize << n {
            return Err(Error::WidthMismatch { expected: 1 << n, got: amps.len() });
        }
        Ok(StateVector { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, gate: &Gate, theta: &[T]) {
        let n = self.n;
        let stride = |q: usize| 1usize << (n - 1 - q);
        let half = T::from_f64_lossy(0.5);
        match *gate {
            Gate::X(q) => for_pairs(&mut self.amps, stride(q), std::mem::swap),
            Gate::H(q) => {
                let r = T::FRAC_1_SQRT_2();
                for_pairs(&mut self.amps, stride(q), |a, b| {
                    let (x, y) = (*a, *b);
                    *a = (x + y).scale(r);
                    *b = (x - y).scale(r);
                })
            }
            Gate::S(q) => for_pairs(&mut self.amps, stride(q), |_, b| *b = Complex::new(-b.im, b.re)),
            Gate::Sdg(q) => for_pairs(&mut self.amps, stride(q), |_, b| *b = Complex::new(b.im, -b.re)),
            Gate::Ry(q, angle) => {
                let t = angle.resolve(theta) * half;
                let (s, c) = t.sin_cos();
                for_pairs(&mut self.amps, stride(q), move |a, b| rotate(a, b, c, s))
            }
            Gate::Cnot { control, target } => for_controlled(&mut self.amps, stride(control), stride(target), std::mem::swap),
            Gate::Cry { control, target, angle } => {
                let t = angle.resolve(theta) * half;
                let (s, c) = t.sin_cos();
                for_controlled(&mut self.amps, stride(control), stride(target), move |a, b| rotate(a, b, c, s))
            }
        }
    }
}

#[inline]
fn rotate<T: Real>(a: &mut Complex<T>, b: &mut Complex<T>, c: T, s: T) {
    let (x, y) = (*a, *b);
    *a = x.scale(c) - y.scale(s);
    *b = x.scale(s) + y.scale(c);
}

/// Calls `f(amp[i], amp[i | stride])` for every index `i` with the stride bit clear.
fn for_pairs<T, F>(amps: &mut [Complex<T>], stride: usize, f: F)
where
    T: Real,
    F: Fn(&mut Complex<T>, &mut Complex<T>) + Sync + Send,
{
    let body = |chunk: &mut [Complex<T>]| {
        let (lo, hi) = chunk.split_at_mut(stride);
        lo.iter_mut().zip(hi).for_each(|(a, b)| f(a, b));
    };
    if amps.len() < PAR_THRESHOLD {
        amps.chunks_mut(2 * stride).for_each(body);
    } else if 2 * stride >= PAR_THRESHOLD {
        // Few large chunks: parallelize inside each one instead.
        for chunk in amps.chunks_mut(2 * stride) {
            let (lo, hi) = chunk.split_at_mut(stride);
            lo.par_iter_mut().zip(hi.par_iter_mut()).for_each(|(a, b)| f(a, b));
        }
    } else {
        amps.par_chunks_mut(2 * stride).for_each(body);
    }
}

/// Calls `f(amp[i], amp[i | t])` for every index with the control bit set and
/// the target bit clear.
fn for_controlled<T, F>(amps: &mut [Complex<T>], cs: usize, ts: usize, f: F)
where
    T: Real,
    F: Fn(&mut Complex<T>, &mut Complex<T>) + Sync + Send,
{
    let (hi, lo) = if cs > ts { (cs, ts) } else { (ts, cs) };
    let control_high = cs > ts;
    let body = |chunk: &mut [Complex<T>]| {
        let (h0, h1) = chunk.split_at_mut(hi);
        if control_high {
            for sub in h1.chunks_mut(2 * lo) {
                let (a, b) = sub.split_at_mut(lo);
                a.iter_mut().zip(b).for_each(|(x, y)| f(x, y));
            }
        } else {
            for (s0, s1) in h0.chunks_mut(2 * lo).zip(h1.chunks_mut(2 * lo)) {
                s0[lo..].iter_mut().zip(&mut s1[lo..]).for_each(|(x, y)| f(x, y));
            }
        }
    };
    if amps.len() < PAR_THRESHOLD || 2 * hi >= amps.len() {
        amps.chunks_mut(2 * hi).for_each(body);
    } else {
        amps.par_chunks_mut(2 * hi).for_each(body);
    }
}

/// Simulator configuration.
#[derive(Clone, Copy, Debug)]
pub struct Simulator {
    pub max_qubits: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        Simulator { max_qubits: DEFAULT_MAX_QUBITS }
    }
}

impl Simulator {
    pub fn run<T: Real>(&self, circuit: &Circuit, theta: &[T]) -> Result<StateVector<T>> {
        self.check(circuit, theta)?;
        self.run_from(circuit, theta, StateVector::zero(circuit.n_qubits()))
    }

    /// Applies `circuit` to an arbitrary initial state.
    pub fn run_from<T: Real>(&self, circuit: &Circuit, theta: &[T], mut state: StateVector<T>) -> Result<StateVector<T>> {
        self.check(circuit, theta)?;
        if state.n != circuit.n_qubits() {
            return Err(Error::WidthMismatch { expected: circuit.n_qubits(), got: state.n });
        }
        for g in circuit.gates() {
            state.apply(g, theta);
        }
        Ok(state)
    }

    fn check<T: Real>(&self, circuit: &Circuit, theta: &[T]) -> Result<()> {
        if circuit.n_qubits() > self.max_qubits {
            return Err(Error::WidthOverflow { n: circuit.n_qubits(), max: self.max_qubits });
        }
        if theta.len() != circuit.param_count() {
            return Err(Error::ParamLength { expected: circuit.param_count(), got: theta.len() });
        }
        Ok(())
    }
}

/// Runs `circuit` from `|0…0⟩` with the default width limit.
pub fn simulate<T: Real>(circuit: &Circuit, theta: &[T]) -> Result<StateVector<T>> {
    Simulator::default().run(circuit, theta)
}

//! Readout mitigation restricted to a known Hamming-weight class.
//!
//! A fragment of the staircase ansatz only ever outputs strings of one weight
//! (or a fixed set of weights for CC fragments). Columns of the assignment
//! matrix for other weights are replaced by unit columns, so only the
//! allowed-weight block is inverted. The ansatz states are real, which is why
//! phase-flip errors are not modelled here.

use crate::bits;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::sim::{ProbDist, ReadoutNoiseModel};

pub const MAX_MITIGATION_QUBITS: usize = 12;

/// `M[i][j] = Pr(read i | true j)` for an `m`-qubit fragment, with unit
/// columns outside the allowed weights.
#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentMatrix<T: Real> {
    m: usize,
    weights: Vec<usize>,
    f00: Vec<T>,
    f11: Vec<T>,
    /// Allowed-weight strings in ascending order.
    allowed: Vec<u64>,
}

/// Assignment matrix restricted to weight `w`.
pub fn build_matrix<T: Real>(noise: &ReadoutNoiseModel, m: usize, w: usize) -> Result<AssignmentMatrix<T>> {
    build_matrix_weights(noise, m, &[w])
}

/// Assignment matrix whose noisy columns are every string with a weight in `weights`.
pub fn build_matrix_weights<T: Real>(noise: &ReadoutNoiseModel, m: usize, weights: &[usize]) -> Result<AssignmentMatrix<T>> {
    if m > MAX_MITIGATION_QUBITS {
        return Err(Error::TooLarge { n: m, limit: MAX_MITIGATION_QUBITS });
    }
    if noise.width() != m {
        return Err(Error::WidthMismatch { expected: m, got: noise.width() });
    }
    noise.validate()?;
    let mut weights: Vec<usize> = weights.iter().copied().filter(|w| *w <= m).collect();
    weights.sort_unstable();
    weights.dedup();
    let allowed = (0..1u64 << m).filter(|x| weights.contains(&bits::weight(*x))).collect();
    let conv = |v: &[f64]| v.iter().map(|f| T::from_f64_lossy(*f)).collect();
    Ok(AssignmentMatrix { m, weights, f00: conv(&noise.f00), f11: conv(&noise.f11), allowed })
}

impl<T: Real> AssignmentMatrix<T> {
    pub fn qubits(&self) -> usize {
        self.m
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        1 << self.m
    }

    fn is_allowed(&self, j: u64) -> bool {
        self.weights.contains(&bits::weight(j))
    }

    fn channel(&self, read: u64, truth: u64) -> T {
        let mut p = T::one();
        for q in 0..self.m {
            let (t, r) = (bits::bit(truth, self.m, q), bits::bit(read, self.m, q));
            p = p * match (t, r) {
                (false, false) => self.f00[q],
                (false, true) => T::one() - self.f00[q],
                (true, true) => self.f11[q],
                (true, false) => T::one() - self.f11[q],
            };
        }
        p
    }

    pub fn get(&self, i: u64, j: u64) -> T {
        if self.is_allowed(j) {
            self.channel(i, j)
        } else if i == j {
            T::one()
        } else {
            T::zero()
        }
    }

    /// Dense row-major matrix.
    pub fn to_dense(&self) -> Vec<T> {
        let d = self.dim() as u64;
        (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| self.get(i, j)).collect()
    }

    /// Solves `M p = p_noisy`, drops entries outside the allowed weights and
    /// negative entries, and renormalizes.
    pub fn mitigate(&self, p_noisy: &[T]) -> Result<Vec<T>> {
        if p_noisy.len() != self.dim() {
            return Err(Error::WidthMismatch { expected: self.dim(), got: p_noisy.len() });
        }
        let total: T = p_noisy.iter().copied().sum();
        if (total - T::one()).abs() > T::from_f64_lossy(1e-6) || p_noisy.iter().any(|p| *p < T::zero()) {
            return Err(Error::InvalidDistribution(format!("noisy vector sums to {total}")));
        }
        // Unit columns outside the block leave the block system decoupled:
        // rows of allowed strings only see allowed columns.
        let d = self.allowed.len();
        let mut a = Vec::with_capacity(d * d);
        for &i in &self.allowed {
            for &j in &self.allowed {
                a.push(self.channel(i, j));
            }
        }
        let b = self.allowed.iter().map(|&i| p_noisy[i as usize]).collect();
        let sol = lu_solve(a, d, b)?;
        let mut out = vec![T::zero(); self.dim()];
        let mut mass = T::zero();
        for (&x, v) in self.allowed.iter().zip(sol) {
            let v = v.max(T::zero());
            out[x as usize] = v;
            mass = mass + v;
        }
        if !(mass > T::zero()) {
            return Err(Error::EmptyDistribution);
        }
        out.iter_mut().for_each(|p| *p = *p / mass);
        Ok(out)
    }

    /// [`mitigate`](Self::mitigate) on a sparse distribution.
    pub fn mitigate_dist(&self, noisy: &ProbDist<T>) -> Result<ProbDist<T>> {
        if noisy.n_bits() != self.m {
            return Err(Error::WidthMismatch { expected: self.m, got: noisy.n_bits() });
        }
        ProbDist::from_dense(self.m, &self.mitigate(&noisy.to_dense())?)
    }
}

/// Pushes an exact distribution through the (unrestricted) readout channel.
pub fn apply_channel<T: Real>(noise: &ReadoutNoiseModel, dist: &ProbDist<T>) -> Result<ProbDist<T>> {
    let m = dist.n_bits();
    if noise.width() != m {
        return Err(Error::WidthMismatch { expected: m, got: noise.width() });
    }
    if m > 26 {
        return Err(Error::TooLarge { n: m, limit: 26 });
    }
    let mut p = dist.to_dense();
    for q in 0..m {
        let stride = 1usize << (m - 1 - q);
        let f00 = T::from_f64_lossy(noise.f00[q]);
        let f11 = T::from_f64_lossy(noise.f11[q]);
        for chunk in p.chunks_mut(2 * stride) {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi) {
                let (p0, p1) = (*a, *b);
                *a = f00 * p0 + (T::one() - f11) * p1;
                *b = (T::one() - f00) * p0 + f11 * p1;
            }
        }
    }
    ProbDist::from_dense(m, &p)
}

/// Restriction of `dist` to the given weights, renormalized.
pub fn restrict<T: Real>(dist: &ProbDist<T>, weights: &[usize]) -> Result<ProbDist<T>> {
    let mut out = ProbDist::new(dist.n_bits());
    for (x, p) in dist.iter() {
        if weights.contains(&bits::weight(x)) {
            out.add(x, p);
        }
    }
    if !(out.total() > T::zero()) {
        return Err(Error::EmptyDistribution);
    }
    out.normalized()
}

/// Gaussian elimination with partial pivoting on a row-major `d × d` system.
fn lu_solve<T: Real>(mut a: Vec<T>, d: usize, mut b: Vec<T>) -> Result<Vec<T>> {
    let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let tiny = scale * T::epsilon() * T::from_f64_lossy(d.max(1) as f64);
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&r, &s| a[r * d + col].abs().partial_cmp(&a[s * d + col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(col);
        if !(a[piv * d + col].abs() > tiny) {
            return Err(Error::SingularMatrix);
        }
        if piv != col {
            for j in 0..d {
                a.swap(piv * d + j, col * d + j);
            }
            b.swap(piv, col);
        }
        let p = a[col * d + col];
        for r in col + 1..d {
            let f = a[r * d + col] / p;
            if f == T::zero() {
                continue;
            }
            for j in col..d {
                a[r * d + j] = a[r * d + j] - f * a[col * d + j];
            }
            b[r] = b[r] - f * b[col];
        }
    }
    for col in (0..d).rev() {
        let mut acc = b[col];
        for j in col + 1..d {
            acc = acc - a[col * d + j] * b[j];
        }
        b[col] = acc / a[col * d + col];
    }
    Ok(b)
}

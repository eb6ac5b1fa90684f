//! Dense-matrix reference used to check the simulator and block compilation.
#![allow(dead_code)]

use dicke_vqe::sim::{Angle, Circuit, Gate};
use num_complex::Complex64 as C;

/// Row-major square matrix.
#[derive(Clone, Debug)]
pub struct Dense {
    pub dim: usize,
    pub a: Vec<C>,
}

impl Dense {
    pub fn identity(dim: usize) -> Self {
        let mut a = vec![C::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            a[i * dim + i] = C::new(1.0, 0.0);
        }
        Dense { dim, a }
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let d = self.dim;
        let mut a = vec![C::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let x = self.a[i * d + k];
                if x == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    a[i * d + j] += x * o.a[k * d + j];
                }
            }
        }
        Dense { dim: d, a }
    }

    pub fn apply(&self, v: &[C]) -> Vec<C> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.a[i * self.dim + j] * v[j]).sum()).collect()
    }

    /// Largest entry-wise gap after removing the best global phase.
    pub fn phase_distance(&self, o: &Dense) -> f64 {
        let (i, _) = self.a.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm())).unwrap();
        if o.a[i].norm() < 1e-12 {
            return f64::INFINITY;
        }
        let phase = self.a[i] / o.a[i];
        let phase = phase / phase.norm();
        self.a.iter().zip(&o.a).map(|(x, y)| (x - phase * y).norm()).fold(0.0, f64::max)
    }
}

fn one_qubit(g: &Gate, theta: &[f64]) -> [C; 4] {
    let c = |re: f64, im: f64| C::new(re, im);
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    match g {
        Gate::X(_) => [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        Gate::H(_) => [c(s2, 0.), c(s2, 0.), c(s2, 0.), c(-s2, 0.)],
        Gate::S(_) => [c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)],
        Gate::Sdg(_) => [c(1., 0.), c(0., 0.), c(0., 0.), c(0., -1.)],
        Gate::Ry(_, a) => ry(resolve(*a, theta)),
        _ => unreachable!(),
    }
}

fn ry(t: f64) -> [C; 4] {
    let (s, co) = (t / 2.0).sin_cos();
    [C::new(co, 0.0), C::new(-s, 0.0), C::new(s, 0.0), C::new(co, 0.0)]
}

fn resolve(a: Angle, theta: &[f64]) -> f64 {
    match a {
        Angle::Param { slot, scale } => scale * theta[slot],
        Angle::Fixed(v) => v,
    }
}

/// Full `2^n × 2^n` matrix of one gate, built entry by entry. Qubit 0 is the
/// most significant index bit.
pub fn gate_matrix(n: usize, g: &Gate, theta: &[f64]) -> Dense {
    let dim = 1usize << n;
    let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
    let mut a = vec![C::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        for row in 0..dim {
            let v = match *g {
                Gate::Cnot { control, target } | Gate::Cry { control, target, .. } => {
                    let rest = !(1usize << (n - 1 - target));
                    if row & rest != col & rest {
                        continue;
                    }
                    let (r, c) = (bit(row, target), bit(col, target));
                    if bit(col, control) == 0 {
                        if r == c { C::new(1.0, 0.0) } else { continue }
                    } else if let Gate::Cry { angle, .. } = g {
                        ry(resolve(*angle, theta))[2 * r + c]
                    } else if r != c {
                        C::new(1.0, 0.0)
                    } else {
                        continue;
                    }
                }
                _ => {
                    let q = g.qubits()[0];
                    let rest = !(1usize << (n - 1 - q));
                    if row & rest != col & rest {
                        continue;
                    }
                    one_qubit(g, theta)[2 * bit(row, q) + bit(col, q)]
                }
            };
            a[row * dim + col] = v;
        }
    }
    Dense { dim, a }
}

/// Ordered product of all gate matrices.
pub fn circuit_unitary(c: &Circuit, theta: &[f64]) -> Dense {
    c.gates().iter().fold(Dense::identity(1 << c.n_qubits()), |u, g| gate_matrix(c.n_qubits(), g, theta).mul(&u))
}

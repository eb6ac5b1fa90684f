use crate::real::Real;

use super::problem::{EnergyForm, PortfolioProblem};

/// The problem rewritten in spins `z = 1 − 2x`:
/// `q'·zᵀA'z − μ'ᵀz + β'(ξ' − 1ᵀz)² + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinModel<T: Real> {
    pub n: usize,
    pub q_prime: T,
    /// Row-major `n × n`.
    pub a_prime: Vec<T>,
    pub mu_prime: Vec<T>,
    pub xi_prime: T,
    /// Zero for the hard form.
    pub beta_prime: T,
    pub offset: T,
}

impl<T: Real> SpinModel<T> {
    pub fn from_problem(p: &PortfolioProblem<T>, form: EnergyForm) -> Self {
        let n = p.n();
        let half = T::from_f64_lossy(0.5);
        let quarter = T::from_f64_lossy(0.25);
        let row_sums: Vec<T> = (0..n).map(|i| (0..n).map(|j| p.cov_at(i, j)).sum()).collect();
        let total: T = row_sums.iter().copied().sum();
        let mu_sum: T = p.mu().iter().copied().sum();
        let mu_prime = (0..n).map(|i| p.q() * half * row_sums[i] - half * p.mu()[i]).collect();
        SpinModel {
            n,
            q_prime: p.q() * quarter,
            a_prime: p.cov().to_vec(),
            mu_prime,
            xi_prime: T::from_f64_lossy(n as f64 - 2.0 * p.k() as f64),
            beta_prime: match form {
                EnergyForm::Soft => p.beta() * quarter,
                EnergyForm::Hard => T::zero(),
            },
            offset: p.q() * quarter * total - half * mu_sum,
        }
    }

    /// Energy of a spin configuration with entries `±1`.
    pub fn energy(&self, z: &[T]) -> T {
        let n = self.n;
        let mut quad = T::zero();
        for i in 0..n {
            for j in 0..n {
                quad = quad + z[i] * self.a_prime[i * n + j] * z[j];
            }
        }
        let lin: T = (0..n).map(|i| self.mu_prime[i] * z[i]).sum();
        let d = self.xi_prime - z.iter().copied().sum::<T>();
        self.q_prime * quad - lin + self.beta_prime * d * d + self.offset
    }

    /// Spins of the selection `x` (qubit 0 = MSB).
    pub fn spins(&self, x: u64) -> Vec<T> {
        (0..self.n).map(|i| if crate::bits::bit(x, self.n, i) { -T::one() } else { T::one() }).collect()
    }
}

use crate::bits;
use crate::error::{Error, Result};
use crate::real::Real;

use super::pool::AssetPool;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyForm {
    /// `q·xᵀAx − μᵀx + β(k − Σx)²`, defined on every string.
    Soft,
    /// `q·xᵀAx − μᵀx`; only weight-`k` strings are feasible.
    #[default]
    Hard,
}

/// Budget-constrained mean-variance problem over `n` assets.
#[derive(Clone, Debug, PartialEq)]
pub struct PortfolioProblem<T: Real> {
    n: usize,
    mu: Vec<T>,
    /// Row-major `n × n`.
    cov: Vec<T>,
    q: T,
    k: usize,
    beta: T,
}

impl<T: Real> PortfolioProblem<T> {
    pub fn new(mu: Vec<T>, cov: Vec<T>, q: T, k: usize) -> Result<Self> {
        let n = mu.len();
        if cov.len() != n * n {
            return Err(Error::InvalidProblem(format!("covariance has {} entries for {n} assets", cov.len())));
        }
        if !(q > T::zero()) {
            return Err(Error::InvalidProblem(format!("risk level q = {q} must be positive")));
        }
        if k > n || n == 0 || n > 63 {
            return Err(Error::InvalidProblem(format!("budget k = {k} with n = {n} assets")));
        }
        let mut p = PortfolioProblem { n, mu, cov, q, k, beta: T::zero() };
        p.beta = p.default_beta();
        Ok(p)
    }

    pub fn from_pool(pool: &AssetPool, q: T, k: usize) -> Result<Self> {
        let conv = |v: &[f64]| v.iter().map(|x| T::from_f64_lossy(*x)).collect::<Vec<T>>();
        Self::new(conv(&pool.mu), conv(&pool.cov), q, k)
    }

    pub fn with_beta(mut self, beta: T) -> Self {
        self.beta = beta;
        self
    }

    /// Twice the Gershgorin bound on `|q·xᵀAx|` over all selections:
    /// `2·q·n·max_i Σ_j |A_ij|`.
    pub fn default_beta(&self) -> T {
        let n = self.n;
        let rho = (0..n).map(|i| (0..n).map(|j| self.cov[i * n + j].abs()).sum::<T>()).fold(T::zero(), T::max);
        T::from_f64_lossy(2.0 * n as f64) * self.q * rho
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn cov(&self) -> &[T] {
        &self.cov
    }

    pub fn cov_at(&self, i: usize, j: usize) -> T {
        self.cov[i * self.n + j]
    }

    /// Energy of the selection encoded by the low `n` bits of `x`.
    pub fn energy(&self, x: u64, form: EnergyForm) -> T {
        let n = self.n;
        let mut sel = [0usize; 64];
        let mut m = 0;
        for i in 0..n {
            if bits::bit(x, n, i) {
                sel[m] = i;
                m += 1;
            }
        }
        let sel = &sel[..m];
        let mut quad = T::zero();
        let mut lin = T::zero();
        for &i in sel {
            lin = lin + self.mu[i];
            let row = &self.cov[i * n..(i + 1) * n];
            for &j in sel {
                quad = quad + row[j];
            }
        }
        let e = self.q * quad - lin;
        match form {
            EnergyForm::Hard => e,
            EnergyForm::Soft => {
                let d = T::from_f64_lossy(self.k as f64 - m as f64);
                e + self.beta * d * d
            }
        }
    }

    /// Energy of an explicit bit vector, asset `i` at position `i`.
    pub fn energy_bits(&self, x: &[bool], form: EnergyForm) -> Result<T> {
        if x.len() != self.n {
            return Err(Error::WidthMismatch { expected: self.n, got: x.len() });
        }
        let word = x.iter().fold(0u64, |acc, b| (acc << 1) | u64::from(*b));
        Ok(self.energy(word, form))
    }

    /// Relabels assets: asset `i` of the result is asset `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidProblem(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        let mu = perm.iter().map(|&p| self.mu[p]).collect();
        let mut cov = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                cov[i * n + j] = self.cov[perm[i] * n + perm[j]];
            }
        }
        Ok(PortfolioProblem { n, mu, cov, q: self.q, k: self.k, beta: self.beta })
    }

    pub fn cast<U: Real>(&self) -> PortfolioProblem<U> {
        let c = |v: &[T]| v.iter().map(|x| U::from_f64_lossy(x.to_f64_lossy())).collect::<Vec<U>>();
        PortfolioProblem {
            n: self.n,
            mu: c(&self.mu),
            cov: c(&self.cov),
            q: U::from_f64_lossy(self.q.to_f64_lossy()),
            k: self.k,
            beta: U::from_f64_lossy(self.beta.to_f64_lossy()),
        }
    }
}

/// Diagonal Hamiltonian as a function of the bitstring. Dense up to 16
/// qubits, evaluated on demand beyond.
#[derive(Clone, Debug)]
pub struct EnergyTable<'a, T: Real> {
    problem: &'a PortfolioProblem<T>,
    form: EnergyForm,
    dense: Option<Vec<T>>,
}

const DENSE_LIMIT: usize = 16;

impl<'a, T: Real> EnergyTable<'a, T> {
    pub fn new(problem: &'a PortfolioProblem<T>, form: EnergyForm) -> Self {
        let dense = (problem.n() <= DENSE_LIMIT).then(|| (0..1u64 << problem.n()).map(|x| problem.energy(x, form)).collect());
        EnergyTable { problem, form, dense }
    }

    /// Forces a dense table; refuses above 26 qubits.
    pub fn materialized(problem: &'a PortfolioProblem<T>, form: EnergyForm) -> Result<Self> {
        if problem.n() > 26 {
            return Err(Error::TooLarge { n: problem.n(), limit: 26 });
        }
        let dense = Some((0..1u64 << problem.n()).map(|x| problem.energy(x, form)).collect());
        Ok(EnergyTable { problem, form, dense })
    }

    pub fn get(&self, x: u64) -> T {
        match &self.dense {
            Some(d) => d[x as usize],
            None => self.problem.energy(x, self.form),
        }
    }

    pub fn form(&self) -> EnergyForm {
        self.form
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }
}

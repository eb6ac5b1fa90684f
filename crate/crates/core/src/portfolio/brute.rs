use crate::bits::{self, WeightClass};
use crate::error::{Error, Result};
use crate::real::Real;

use super::problem::{EnergyForm, PortfolioProblem};

pub const BRUTE_FORCE_LIMIT: usize = 30;

/// Minimum hard-form energy over the weight-`k` strings, ties to the smaller
/// integer.
pub fn brute_force<T: Real>(problem: &PortfolioProblem<T>) -> Result<(u64, T)> {
    let r = feasible_threshold(problem)?;
    Ok((r.optimum, r.optimum_energy))
}

/// Acceptance rule for "feasible" answers: weight `k` and
/// `(worst − E) / (worst − optimum) ≥ ratio` over the weight-`k` class, with
/// `ratio = 0.75`. Degenerate classes (all energies equal) accept every
/// weight-`k` string.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FeasibilityRule<T: Real> {
    pub k: usize,
    pub optimum: u64,
    pub optimum_energy: T,
    pub worst_energy: T,
    pub ratio: T,
}

impl<T: Real> FeasibilityRule<T> {
    pub fn score(&self, energy: T) -> T {
        let span = self.worst_energy - self.optimum_energy;
        if span <= T::zero() { T::one() } else { (self.worst_energy - energy) / span }
    }

    pub fn accepts(&self, problem: &PortfolioProblem<T>, x: u64) -> bool {
        bits::weight(x) == self.k && self.score(problem.energy(x, EnergyForm::Hard)) >= self.ratio
    }
}

pub fn feasible_threshold<T: Real>(problem: &PortfolioProblem<T>) -> Result<FeasibilityRule<T>> {
    let n = problem.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut best: Option<(u64, T)> = None;
    let mut worst = T::neg_infinity();
    for x in WeightClass::new(n, problem.k()) {
        let e = problem.energy(x, EnergyForm::Hard);
        // Ascending enumeration: strict comparison keeps the smaller string on ties.
        if best.is_none_or(|(_, be)| e < be) {
            best = Some((x, e));
        }
        worst = worst.max(e);
    }
    let (optimum, optimum_energy) = best.expect("weight class is never empty for k ≤ n");
    Ok(FeasibilityRule { k: problem.k(), optimum, optimum_energy, worst_energy: worst, ratio: T::from_f64_lossy(0.75) })
}

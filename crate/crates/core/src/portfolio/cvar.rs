use crate::error::{Error, Result};
use crate::real::Real;
use crate::sim::{ProbDist, SampleSet};

use super::problem::{EnergyForm, PortfolioProblem};

/// Number of shots in the CVaR tail: `⌈α·N⌉`, at least one. A relative
/// slack of 1e-12 keeps products like `0.3·10` from rounding up to 4.
pub fn tail_size(alpha: f64, shots: u64) -> u64 {
    let raw = alpha * shots as f64;
    let m = (raw - raw.abs() * 1e-12).ceil() as u64;
    m.clamp(1, shots.max(1))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 { Ok(()) } else { Err(Error::InvalidConfig(format!("confidence level α = {alpha} outside (0, 1]"))) }
}

/// Mean energy of the `⌈α·N⌉` lowest-energy shots. Ties go to the smaller
/// bitstring.
pub fn cvar<T: Real>(samples: &SampleSet, problem: &PortfolioProblem<T>, alpha: f64, form: EnergyForm) -> Result<T> {
    check_alpha(alpha)?;
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if samples.n_bits() != problem.n() {
        return Err(Error::WidthMismatch { expected: problem.n(), got: samples.n_bits() });
    }
    let mut rows: Vec<(T, u64, u64)> = samples.counts().iter().map(|(x, c)| (problem.energy(*x, form), *x, *c)).collect();
    sort_rows(&mut rows);
    let mut left = tail_size(alpha, samples.total_shots());
    let m = left;
    let mut acc = T::zero();
    for (e, _, c) in rows {
        let take = c.min(left);
        acc = acc + e * T::from_f64_lossy(take as f64);
        left -= take;
        if left == 0 {
            break;
        }
    }
    Ok(acc / T::from_f64_lossy(m as f64))
}

/// CVaR of an exact distribution: the lowest `α` of the probability mass,
/// splitting the boundary string's mass. Unnormalized inputs are treated as
/// proportional weights.
pub fn cvar_dist<T: Real>(dist: &ProbDist<T>, problem: &PortfolioProblem<T>, alpha: f64, form: EnergyForm) -> Result<T> {
    if dist.n_bits() != problem.n() {
        return Err(Error::WidthMismatch { expected: problem.n(), got: dist.n_bits() });
    }
    cvar_weighted(dist.iter().map(|(x, p)| (problem.energy(x, form), x, p)), alpha)
}

/// CVaR over `(energy, bitstring, weight)` rows.
pub fn cvar_weighted<T: Real>(rows: impl IntoIterator<Item = (T, u64, T)>, alpha: f64) -> Result<T> {
    check_alpha(alpha)?;
    let mut rows: Vec<(T, u64, T)> = rows.into_iter().filter(|r| r.2 > T::zero()).collect();
    if rows.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    sort_rows(&mut rows);
    let total: T = rows.iter().map(|r| r.2).sum();
    let budget = T::from_f64_lossy(alpha) * total;
    let mut left = budget;
    let mut acc = T::zero();
    for (e, _, p) in rows {
        let take = p.min(left);
        acc = acc + e * take;
        left = left - take;
        if left <= T::zero() {
            break;
        }
    }
    Ok(acc / (budget - left.max(T::zero())))
}

fn sort_rows<T: Real, W>(rows: &mut [(T, u64, W)]) {
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
}

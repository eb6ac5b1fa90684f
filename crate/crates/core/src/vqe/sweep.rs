use rand::seq::SliceRandom;

use super::solve::{RunConfig, RunResult, solve};
use crate::ansatz::AnsatzSpec;
use crate::bits;
use crate::error::{Error, Result};
use crate::portfolio::PortfolioProblem;
use crate::sim::rng;

/// Asset orderings for the order sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AssetOrder {
    Original,
    Reversed,
    /// Asset `i` moves to position `(i + 1) mod n`.
    Shift,
    Random {
        seed: u64,
    },
}

impl AssetOrder {
    pub fn all(seed: u64) -> [AssetOrder; 4] {
        [AssetOrder::Original, AssetOrder::Reversed, AssetOrder::Shift, AssetOrder::Random { seed }]
    }

    /// `perm[j]` is the original asset placed at position `j`.
    pub fn permutation(&self, n: usize) -> Vec<usize> {
        match self {
            AssetOrder::Original => (0..n).collect(),
            AssetOrder::Reversed => (0..n).rev().collect(),
            AssetOrder::Shift => (0..n).map(|j| (j + n - 1) % n).collect(),
            AssetOrder::Random { seed } => {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng::stream(*seed, 0x0_0de5));
                p
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            AssetOrder::Original => "original".into(),
            AssetOrder::Reversed => "reversed".into(),
            AssetOrder::Shift => "shift".into(),
            AssetOrder::Random { seed } => format!("random-{seed}"),
        }
    }
}

/// Maps a string over permuted positions back to original asset labels.
pub fn to_original(x: u64, perm: &[usize]) -> u64 {
    let n = perm.len();
    (0..n).filter(|&j| bits::bit(x, n, j)).fold(0, |acc, j| acc | bits::mask(n, perm[j]))
}

/// Solves the problem under a relabeled asset order and reports the result in
/// original labels.
pub fn solve_ordered(problem: &PortfolioProblem<f64>, spec: &AnsatzSpec, cfg: &RunConfig, order: AssetOrder) -> Result<RunResult> {
    let perm = order.permutation(problem.n());
    let permuted = problem.permuted(&perm)?;
    let mut r = solve(&permuted, spec, cfg)?;
    r.best_bitstring = to_original(r.best_bitstring, &perm);
    r.optimum = r.optimum.map(|x| to_original(x, &perm));
    let mut dist: Vec<(u64, f64)> = r.final_distribution.iter().map(|&(x, p)| (to_original(x, &perm), p)).collect();
    dist.sort_by_key(|e| e.0);
    r.final_distribution = dist;
    Ok(r)
}

/// One run per order. Symmetric-partition specs always run the original and
/// reversed orders, which together cover the reverse-symmetric pairs.
pub fn order_sweep(
    problem: &PortfolioProblem<f64>,
    spec: &AnsatzSpec,
    cfg: &RunConfig,
    orders: &[AssetOrder],
) -> Result<Vec<(AssetOrder, RunResult)>> {
    let orders: Vec<AssetOrder> = if spec.symmetric_partition { vec![AssetOrder::Original, AssetOrder::Reversed] } else { orders.to_vec() };
    orders.into_iter().map(|o| Ok((o, solve_ordered(problem, spec, cfg, o)?))).collect()
}

/// The answer with the lower energy among several runs of one problem.
pub fn best_of(results: &[RunResult]) -> Option<&RunResult> {
    results.iter().min_by(|a, b| a.best_energy.total_cmp(&b.best_energy))
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Band {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Band {
    fn of(values: impl IntoIterator<Item = f64>) -> Option<Band> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Band { mean, min, max })
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Summary {
    pub runs: usize,
    /// Probability of the optimum in the final distribution.
    pub p_opt: Option<Band>,
    /// Probability of strings the feasibility rule accepts.
    pub p_feasible: Option<Band>,
    pub wall_seconds: Band,
    /// Fraction of runs whose answer is the optimum.
    pub found_optimum: f64,
    /// Fraction of runs whose answer passes the feasibility rule.
    pub found_feasible: f64,
}

pub fn statistics(results: &[RunResult]) -> Result<Summary> {
    if results.is_empty() {
        return Err(Error::InvalidConfig("statistics need at least one run".into()));
    }
    let frac = |f: &dyn Fn(&RunResult) -> bool| results.iter().filter(|r| f(r)).count() as f64 / results.len() as f64;
    Ok(Summary {
        runs: results.len(),
        p_opt: Band::of(results.iter().filter_map(|r| r.p_opt)),
        p_feasible: Band::of(results.iter().filter_map(|r| r.p_feasible)),
        wall_seconds: Band::of(results.iter().map(|r| r.wall_seconds)).expect("nonempty"),
        found_optimum: frac(&|r| r.found_optimum()),
        found_feasible: frac(&|r| r.answer_feasible == Some(true)),
    })
}

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng as _;

use super::exec::{Ansatz, Execution, Executor, LayoutOptions};
use super::optimizer::{OptimizerConfig, minimize};
use crate::ansatz::AnsatzSpec;
use crate::error::{Error, Result};
use crate::sim::rng;

const INIT_STREAM: u64 = 0x1_0000;

/// Evaluation budget of the uniform-output fit.
pub const UNIFORM_FIT_BUDGET: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitStrategy {
    /// Independent draws from `[0, 2π)`.
    RandomUniform,
    /// Independent draws from `[lo, hi)`.
    Interval { lo: f64, hi: f64 },
    /// Interval draw, then a short fit towards the uniform distribution over
    /// the ansatz support.
    UniformFit,
}

impl Default for InitStrategy {
    fn default() -> Self {
        InitStrategy::Interval { lo: FRAC_PI_2, hi: 3.0 * PI / 4.0 }
    }
}

impl InitStrategy {
    pub fn validate(&self) -> Result<()> {
        if let InitStrategy::Interval { lo, hi } = *self
            && !(0.0 <= lo && lo <= hi && hi < 2.0 * PI)
        {
            return Err(Error::InvalidConfig(format!("init interval [{lo}, {hi}) must lie within [0, 2π)")));
        }
        Ok(())
    }

    pub fn initial_point(&self, exec: &Executor, seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        let d = exec.param_count();
        match *self {
            InitStrategy::RandomUniform => Ok(draw(d, 0.0, 2.0 * PI, seed)),
            InitStrategy::Interval { lo, hi } => Ok(draw(d, lo, hi, seed)),
            InitStrategy::UniformFit => fit_uniform(exec, seed),
        }
    }
}

fn draw(d: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, INIT_STREAM);
    (0..d).map(|_| if hi > lo { r.random_range(lo..hi) } else { lo }).collect()
}

/// Minimizes `Σ_{x ∈ S} (p_x − 1/|S|)²` over the structural support `S`,
/// starting from the default interval draw.
pub(crate) fn fit_uniform(exec: &Executor, seed: u64) -> Result<Vec<f64>> {
    let support = exec.structural_support()?;
    let target = 1.0 / support.len() as f64;
    let InitStrategy::Interval { lo, hi } = InitStrategy::default() else { unreachable!("default is an interval") };
    let x0 = draw(exec.param_count(), lo, hi, seed);
    let cfg = OptimizerConfig { max_iterations: UNIFORM_FIT_BUDGET, ..OptimizerConfig::default() };
    let m = minimize(
        |theta| {
            let d = exec.exact(theta)?;
            Ok(support.iter().map(|x| (d.get(*x) - target).powi(2)).sum())
        },
        &cfg,
        &x0,
    )?;
    Ok(m.x)
}

/// Uniform-output starting angles for the whole ansatz.
pub fn uniform_fit_init(spec: &AnsatzSpec, seed: u64) -> Result<Vec<f64>> {
    let exec = Executor::new(&Ansatz::Dicke(spec.clone()), LayoutOptions::default(), Execution::Direct, seed)?;
    fit_uniform(&exec, seed)
}

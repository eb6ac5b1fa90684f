use std::time::Instant;

use super::exec::{Ansatz, Execution, Executor, LayoutOptions};
use super::init::InitStrategy;
use super::optimizer::{OptimizerConfig, minimize};
use super::schedule::AlphaSchedule;
use crate::ansatz::AnsatzSpec;
use crate::bits;
use crate::error::{Error, Result};
use crate::hdc::{DEFAULT_FRAGMENT_WIDTH, PlanKind};
use crate::portfolio::{EnergyForm, FeasibilityRule, PortfolioProblem, feasible_threshold};
use crate::sim::ProbDist;

/// Largest asset count for which runs compute the brute-force reference.
pub const ORACLE_LIMIT: usize = 24;

/// Everything a run needs besides the problem and the ansatz.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub optimizer: OptimizerConfig,
    pub schedule: AlphaSchedule,
    pub init: InitStrategy,
    pub execution: Execution,
    /// Subcircuit plan for Dicke ansatze; HDC modes pick the default plan
    /// when unset.
    pub layout: Option<PlanKind>,
    pub form: EnergyForm,
    pub seed: u64,
    /// Minimum final probability for a string to count as an answer.
    pub threshold: f64,
    pub fragment_width: usize,
    pub reversal: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            optimizer: OptimizerConfig::default(),
            schedule: AlphaSchedule::default(),
            init: InitStrategy::default(),
            execution: Execution::Direct,
            layout: None,
            form: EnergyForm::Soft,
            seed: 0,
            threshold: 0.05,
            fragment_width: DEFAULT_FRAGMENT_WIDTH,
            reversal: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        self.schedule.validate()?;
        self.init.validate()?;
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidConfig(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        if self.fragment_width < 2 {
            return Err(Error::InvalidConfig("fragment_width must be at least 2".into()));
        }
        Ok(())
    }

    fn layout(&self) -> LayoutOptions {
        LayoutOptions { plan: self.layout, fragment_width: self.fragment_width, reversal: self.reversal }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct TracePoint {
    pub evaluation: usize,
    pub alpha: f64,
    pub cvar: f64,
    /// Probability of the brute-force optimum in this evaluation's output.
    pub p_opt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RunResult {
    pub n: usize,
    pub k: usize,
    pub best_bitstring: u64,
    /// Hard-form energy of `best_bitstring`.
    pub best_energy: f64,
    /// Lowest objective value seen.
    pub final_cvar: f64,
    pub final_alpha: f64,
    pub evaluations: usize,
    pub restarts: usize,
    pub trace: Vec<TracePoint>,
    pub theta: Vec<f64>,
    pub wall_seconds: f64,
    /// Final output distribution as `(bitstring, probability)`, ascending.
    pub final_distribution: Vec<(u64, f64)>,
    pub optimum: Option<u64>,
    pub p_opt: Option<f64>,
    pub p_feasible: Option<f64>,
    /// Whether `best_bitstring` passes the feasibility rule.
    pub answer_feasible: Option<bool>,
    pub cache_hits: u64,
    pub cache_misses: u64,
}

impl RunResult {
    pub fn found_optimum(&self) -> bool {
        self.optimum == Some(self.best_bitstring)
    }

    pub fn distribution(&self) -> ProbDist<f64> {
        ProbDist::from_map(self.n, self.final_distribution.iter().copied().collect())
    }

    pub fn best_bitstring_text(&self) -> String {
        bits::to_string(self.best_bitstring, self.n)
    }
}

/// Optimizes a Dicke-state ansatz.
pub fn solve(problem: &PortfolioProblem<f64>, spec: &AnsatzSpec, cfg: &RunConfig) -> Result<RunResult> {
    if spec.n != problem.n() || spec.k != problem.k() {
        return Err(Error::InvalidConfig(format!(
            "ansatz (n = {}, k = {}) does not match the problem (n = {}, k = {})",
            spec.n,
            spec.k,
            problem.n(),
            problem.k()
        )));
    }
    run(problem, &Ansatz::Dicke(spec.clone()), cfg)
}

/// Optimizes the hardware-efficient baseline with `⌈log2 n⌉` layers on the
/// penalized energy.
pub fn solve_hardware_efficient(problem: &PortfolioProblem<f64>, cfg: &RunConfig) -> Result<RunResult> {
    let cfg = RunConfig { form: EnergyForm::Soft, ..cfg.clone() };
    run(problem, &Ansatz::HardwareEfficient { n: problem.n(), layers: None }, &cfg)
}

pub fn run(problem: &PortfolioProblem<f64>, ansatz: &Ansatz, cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    if ansatz.n() != problem.n() {
        return Err(Error::WidthMismatch { expected: problem.n(), got: ansatz.n() });
    }
    let start = Instant::now();
    let exec = Executor::new(ansatz, cfg.layout(), cfg.execution.clone(), cfg.seed)?;
    let oracle = if problem.n() <= ORACLE_LIMIT { Some(feasible_threshold(problem)?) } else { None };
    let theta0 = cfg.init.initial_point(&exec, cfg.seed)?;
    let budget = cfg.optimizer.max_iterations;

    let mut trace: Vec<TracePoint> = Vec::new();
    let mut objective = |theta: &[f64]| -> Result<f64> {
        let t = trace.len();
        let alpha = cfg.schedule.alpha(t, budget);
        let out = exec.evaluate(theta, alpha, t as u64)?;
        let value = out.cvar(problem, alpha, cfg.form)?;
        let p_opt = oracle.as_ref().map(|o| out.dist().get(o.optimum));
        trace.push(TracePoint { evaluation: t, alpha, cvar: value, p_opt });
        Ok(value)
    };
    let mut best = minimize(&mut objective, &cfg.optimizer, &theta0)?;
    // Warm restarts from the best point so far with the radius reset.
    for _ in 0..cfg.optimizer.restarts {
        let m = minimize(&mut objective, &cfg.optimizer, &best.x)?;
        if m.value < best.value {
            best = m;
        }
    }
    let evaluations = trace.len();
    let final_alpha = cfg.schedule.alpha(evaluations, budget);
    let dist = exec.evaluate(&best.x, final_alpha, evaluations as u64)?.dist();
    let best_bitstring = pick_answer(&dist, problem, cfg.threshold);
    Ok(RunResult {
        n: problem.n(),
        k: problem.k(),
        best_bitstring,
        best_energy: problem.energy(best_bitstring, EnergyForm::Hard),
        final_cvar: best.value,
        final_alpha,
        evaluations,
        restarts: cfg.optimizer.restarts,
        wall_seconds: start.elapsed().as_secs_f64(),
        optimum: oracle.as_ref().map(|o| o.optimum),
        p_opt: oracle.as_ref().map(|o| dist.get(o.optimum)),
        p_feasible: oracle.as_ref().map(|o| feasible_mass(&dist, problem, o)),
        answer_feasible: oracle.as_ref().map(|o| o.accepts(problem, best_bitstring)),
        final_distribution: dist.iter().collect(),
        theta: best.x,
        trace,
        cache_hits: exec.cache().hits(),
        cache_misses: exec.cache().misses(),
    })
}

/// Lowest-energy weight-`k` string holding at least `threshold` of the
/// final distribution; falls back to the most likely weight-`k` string, then
/// to the overall mode.
fn pick_answer(dist: &ProbDist<f64>, problem: &PortfolioProblem<f64>, threshold: f64) -> u64 {
    let k = problem.k();
    let energy = |x: u64| problem.energy(x, EnergyForm::Hard);
    let confident = dist
        .iter()
        .filter(|&(x, p)| bits::weight(x) == k && p >= threshold)
        .min_by(|a, b| energy(a.0).total_cmp(&energy(b.0)).then(a.0.cmp(&b.0)));
    if let Some((x, _)) = confident {
        return x;
    }
    let likely = dist.iter().filter(|&(x, _)| bits::weight(x) == k).max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
    likely.map(|(x, _)| x).or_else(|| dist.mode()).unwrap_or(0)
}

fn feasible_mass(dist: &ProbDist<f64>, problem: &PortfolioProblem<f64>, rule: &FeasibilityRule<f64>) -> f64 {
    dist.iter().filter(|&(x, _)| rule.accepts(problem, x)).map(|(_, p)| p).sum()
}

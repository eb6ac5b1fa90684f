//! Cartesian sweeps over asset counts, budgets, confidence levels, layers and
//! asset orders, aggregated into one plot-ready CSV per sweep.

use std::path::{Path, PathBuf};

use anyhow::Result;
use dicke_vqe::ansatz::{AnsatzSpec, Variant};
use dicke_vqe::portfolio::{PortfolioProblem, generate_pool};
use dicke_vqe::vqe::{AlphaSchedule, AssetOrder, Band, RunConfig, RunResult, solve_ordered, statistics};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Loaded, config_error, parse_order};
use crate::output::{CSV_SCHEMA, RunManifest, write_csv, write_json};

/// Sweeps with more runs than this need `--confirm`.
pub const CONFIRM_THRESHOLD: usize = 200;

/// Label for the time columns: classical simulation time, not device time.
pub const TIME_KIND: &str = "simulation-wall-clock";

fn default_alphas() -> Vec<f64> {
    vec![0.25]
}

fn default_layers() -> Vec<usize> {
    vec![1]
}

fn default_orders() -> Vec<String> {
    vec!["original".into()]
}

fn default_variant() -> String {
    "ccc".into()
}

fn default_seeds() -> usize {
    5
}

fn default_pool_seed() -> u64 {
    1000
}

fn default_risk() -> f64 {
    0.5
}

fn default_days() -> usize {
    252
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Output name: the sweep writes `<table>.csv`.
    pub table: String,
    pub assets: Vec<usize>,
    pub budgets: Vec<usize>,
    /// Constant CVaR confidence levels; each replaces the run's schedule.
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_layers")]
    pub layers: Vec<usize>,
    #[serde(default = "default_orders")]
    pub orders: Vec<String>,
    #[serde(default = "default_variant")]
    pub variant: String,
    /// Pools per cell; pool `s` uses seed `pool_seed + s`.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "default_pool_seed")]
    pub pool_seed: u64,
    #[serde(default = "default_risk")]
    pub risk: f64,
    #[serde(default = "default_days")]
    pub days: usize,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub layers: usize,
    pub order: AssetOrder,
}

impl Cell {
    fn id(&self) -> String {
        format!("n{}-k{}-a{}-l{}-{}", self.n, self.k, self.alpha, self.layers, self.order.label())
    }
}

impl SweepConfig {
    pub fn cells(&self) -> Result<Vec<Cell>> {
        if self.table.is_empty() || !self.table.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(config_error(format!("table: `{}` must be a plain file stem", self.table)));
        }
        if self.seeds == 0 {
            return Err(config_error("seeds: need at least one pool per cell"));
        }
        let variant: Variant = self.variant.parse().map_err(|e| config_error(format!("variant: {e}")))?;
        let orders: Vec<AssetOrder> = self.orders.iter().map(|s| parse_order(s)).collect::<Result<_>>()?;
        let mut cells = Vec::new();
        for &n in &self.assets {
            for &k in &self.budgets {
                if k == 0 || k >= n {
                    return Err(config_error(format!("budgets: k = {k} needs 1 ≤ k < n = {n}")));
                }
                for &alpha in &self.alphas {
                    if !(alpha > 0.0 && alpha <= 1.0) {
                        return Err(config_error(format!("alphas: {alpha} outside (0, 1]")));
                    }
                    for &layers in &self.layers {
                        AnsatzSpec::new(variant, n, k).with_layers(layers).validate().map_err(|e| config_error(format!("layers: {e}")))?;
                        for &order in &orders {
                            cells.push(Cell { n, k, alpha, layers, order });
                        }
                    }
                }
            }
        }
        if cells.is_empty() {
            return Err(config_error("the sweep has no cells"));
        }
        self.run.validate().map_err(|e| config_error(format!("run: {e}")))?;
        Ok(cells)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub schema: &'static str,
    pub table: String,
    pub variant: String,
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub layers: usize,
    pub order: String,
    pub runs: usize,
    pub p_opt_mean: Option<f64>,
    pub p_opt_min: Option<f64>,
    pub p_opt_max: Option<f64>,
    pub p_feasible_mean: Option<f64>,
    pub p_feasible_min: Option<f64>,
    pub p_feasible_max: Option<f64>,
    pub found_optimum: f64,
    pub found_feasible: f64,
    pub time_mean: f64,
    pub time_min: f64,
    pub time_max: f64,
    pub time_kind: &'static str,
}

#[derive(Serialize)]
struct CellRecord<'a> {
    cell: String,
    pool_seed: u64,
    run_seed: u64,
    result: &'a RunResult,
}

pub struct Plan {
    pub cfg: SweepConfig,
    pub cells: Vec<Cell>,
}

pub fn prepare(loaded: &Loaded, seed: Option<u64>, confirm: bool) -> Result<Plan> {
    let mut cfg: SweepConfig = loaded.parse()?;
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    let cells = cfg.cells()?;
    let runs = cells.len() * cfg.seeds;
    if runs > CONFIRM_THRESHOLD && !confirm {
        return Err(config_error(format!("the sweep has {runs} runs (more than {CONFIRM_THRESHOLD}); pass --confirm to run it")));
    }
    Ok(Plan { cfg, cells })
}

fn one_run(cfg: &SweepConfig, cell: &Cell, s: usize) -> Result<(u64, u64, RunResult)> {
    let pool_seed = cfg.pool_seed + s as u64;
    let run_seed = cfg.run.seed.wrapping_add(s as u64);
    let pool = generate_pool(pool_seed, cell.n, cfg.days)?;
    let problem = PortfolioProblem::from_pool(&pool, cfg.risk, cell.k)?;
    let variant: Variant = cfg.variant.parse()?;
    let spec = AnsatzSpec::new(variant, cell.n, cell.k).with_layers(cell.layers);
    let run = RunConfig { schedule: AlphaSchedule::constant(cell.alpha), seed: run_seed, ..cfg.run.clone() };
    Ok((pool_seed, run_seed, solve_ordered(&problem, &spec, &run, cell.order)?))
}

/// Runs every (cell, pool) pair on the current rayon pool. Each run's record
/// lands in `cells/` as soon as it finishes; the table is written last.
pub fn execute(plan: &Plan, out: &Path) -> Result<Vec<BenchRow>> {
    let cfg = &plan.cfg;
    let manifest = RunManifest::start(
        "bench",
        serde_json::to_value(cfg)?,
        (0..cfg.seeds as u64).flat_map(|s| [cfg.pool_seed + s, cfg.run.seed.wrapping_add(s)]).collect(),
    );
    let cell_dir = out.join("cells");
    let work: Vec<(usize, usize)> = (0..plan.cells.len()).flat_map(|c| (0..cfg.seeds).map(move |s| (c, s))).collect();
    let done: Vec<(usize, PathBuf, RunResult)> = work
        .par_iter()
        .map(|&(c, s)| -> Result<(usize, PathBuf, RunResult)> {
            let cell = &plan.cells[c];
            let (pool_seed, run_seed, r) = one_run(cfg, cell, s)?;
            let path = cell_dir.join(format!("{}-s{s}.json", cell.id()));
            write_json(&path, &CellRecord { cell: cell.id(), pool_seed, run_seed, result: &r })?;
            Ok((c, path, r))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (c, cell) in plan.cells.iter().enumerate() {
        let results: Vec<RunResult> = done.iter().filter(|d| d.0 == c).map(|d| d.2.clone()).collect();
        let st = statistics(&results)?;
        let band = |b: Option<Band>| (b.map(|b| b.mean), b.map(|b| b.min), b.map(|b| b.max));
        let (pm, pn, px) = band(st.p_opt);
        let (fm, fnn, fx) = band(st.p_feasible);
        rows.push(BenchRow {
            schema: CSV_SCHEMA,
            table: cfg.table.clone(),
            variant: cfg.variant.clone(),
            n: cell.n,
            k: cell.k,
            alpha: cell.alpha,
            layers: cell.layers,
            order: cell.order.label(),
            runs: st.runs,
            p_opt_mean: pm,
            p_opt_min: pn,
            p_opt_max: px,
            p_feasible_mean: fm,
            p_feasible_min: fnn,
            p_feasible_max: fx,
            found_optimum: st.found_optimum,
            found_feasible: st.found_feasible,
            time_mean: st.wall_seconds.mean,
            time_min: st.wall_seconds.min,
            time_max: st.wall_seconds.max,
            time_kind: TIME_KIND,
        });
    }
    let table = out.join(format!("{}.csv", cfg.table));
    write_csv(&table, &rows)?;
    let mut outputs = vec![table];
    outputs.extend(done.into_iter().map(|d| d.1));
    manifest.finish(&out.join("manifest.json"), outputs)?;
    Ok(rows)
}

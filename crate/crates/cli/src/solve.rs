use std::path::{Path, PathBuf};

use anyhow::{Result, bail};
use dicke_vqe::bits;
use dicke_vqe::portfolio::EnergyForm;
use dicke_vqe::portfolio::PortfolioProblem;
use dicke_vqe::vqe::{Ansatz, AssetOrder, RunResult, run, solve_ordered};
use serde::Serialize;

use crate::config::{AnsatzChoice, Loaded, SolveConfig, config_error};
use crate::output::{CSV_SCHEMA, RunManifest, write_csv, write_json};

/// One row of `summary.csv`.
#[derive(Clone, Debug, Serialize)]
pub struct SummaryRow {
    pub schema: &'static str,
    pub order: String,
    pub variant: String,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub best_bitstring: String,
    pub best_energy: f64,
    pub optimum: Option<String>,
    pub found_optimum: Option<bool>,
    pub p_opt: Option<f64>,
    pub p_feasible: Option<f64>,
    pub answer_feasible: Option<bool>,
    pub evaluations: usize,
    pub final_alpha: f64,
    pub final_cvar: f64,
    /// Wall-clock time of the classical simulation, a proxy for device time.
    pub sim_wall_seconds: f64,
}

impl SummaryRow {
    fn new(order: &AssetOrder, variant: &str, seed: u64, r: &RunResult) -> Self {
        SummaryRow {
            schema: CSV_SCHEMA,
            order: order.label(),
            variant: variant.into(),
            n: r.n,
            k: r.k,
            seed,
            best_bitstring: r.best_bitstring_text(),
            best_energy: r.best_energy,
            optimum: r.optimum.map(|x| bits::to_string(x, r.n)),
            found_optimum: r.optimum.map(|_| r.found_optimum()),
            p_opt: r.p_opt,
            p_feasible: r.p_feasible,
            answer_feasible: r.answer_feasible,
            evaluations: r.evaluations,
            final_alpha: r.final_alpha,
            final_cvar: r.final_cvar,
            sim_wall_seconds: r.wall_seconds,
        }
    }
}

#[derive(Serialize)]
struct Trace<'a> {
    config: &'a SolveConfig,
    runs: Vec<TraceRun<'a>>,
}

#[derive(Serialize)]
struct TraceRun<'a> {
    order: String,
    result: &'a RunResult,
}

pub struct Prepared {
    pub cfg: SolveConfig,
    pub problem: PortfolioProblem<f64>,
    pub ansatz: AnsatzChoice,
    pub orders: Vec<AssetOrder>,
}

/// Resolves and validates everything a solve needs before any output exists.
pub fn prepare(loaded: &Loaded, seed: Option<u64>) -> Result<Prepared> {
    let mut cfg: SolveConfig = loaded.parse()?;
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    cfg.run.validate().map_err(|e| config_error(format!("run: {e}")))?;
    let problem = cfg.problem.build(&loaded.base_dir)?;
    let ansatz = cfg.ansatz.resolve(problem.n(), problem.k())?;
    let orders = cfg.orders()?;
    if matches!(ansatz, AnsatzChoice::HardwareEfficient { .. }) && orders != [AssetOrder::Original] {
        return Err(config_error("orders: the hardware-efficient baseline runs in the original order only"));
    }
    Ok(Prepared { cfg, problem, ansatz, orders })
}

pub fn dry_run(p: &Prepared) -> Result<String> {
    let mut text = String::from("# resolved configuration\n");
    text.push_str(&toml::to_string(&p.cfg)?);
    text.push_str(&format!(
        "\n# problem: n = {}, k = {}, q = {}, beta = {}\n# orders: {}\n",
        p.problem.n(),
        p.problem.k(),
        p.problem.q(),
        p.problem.beta(),
        p.orders.iter().map(AssetOrder::label).collect::<Vec<_>>().join(", ")
    ));
    Ok(text)
}

pub fn execute(p: &Prepared, out: &Path) -> Result<Vec<SummaryRow>> {
    let manifest = RunManifest::start("solve", serde_json::to_value(&p.cfg)?, vec![p.cfg.run.seed, p.cfg.problem.pool_seed]);
    let mut results = Vec::new();
    for order in &p.orders {
        let r = match &p.ansatz {
            AnsatzChoice::Dicke(spec) => solve_ordered(&p.problem, spec, &p.cfg.run, *order)?,
            AnsatzChoice::HardwareEfficient { layers } => {
                // The baseline leaves the weight class, so it always optimizes the penalized energy.
                let cfg = dicke_vqe::vqe::RunConfig { form: EnergyForm::Soft, ..p.cfg.run.clone() };
                run(&p.problem, &Ansatz::HardwareEfficient { n: p.problem.n(), layers: *layers }, &cfg)?
            }
        };
        results.push((*order, r));
    }
    if results.is_empty() {
        bail!("no runs");
    }
    let rows: Vec<SummaryRow> = results.iter().map(|(o, r)| SummaryRow::new(o, &p.cfg.ansatz.variant, p.cfg.run.seed, r)).collect();
    let summary = out.join("summary.csv");
    let trace = out.join("trace.json");
    write_csv(&summary, &rows)?;
    write_json(&trace, &Trace { config: &p.cfg, runs: results.iter().map(|(o, r)| TraceRun { order: o.label(), result: r }).collect() })?;
    let outputs: Vec<PathBuf> = vec![summary, trace];
    manifest.finish(&out.join("manifest.json"), outputs)?;
    Ok(rows)
}

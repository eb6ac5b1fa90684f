mod bench;
mod config;
mod output;
mod solve;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dicke_vqe::ansatz::{AnsatzSpec, Variant, build, count_resources};
use dicke_vqe::bits;
use dicke_vqe::hdc::{DEFAULT_FRAGMENT_WIDTH, PlanKind, cut, default_cuts, plan_subcircuits, plan_with};
use dicke_vqe::portfolio::generate_pool;
use serde_json::json;

use crate::config::ConfigError;

// Stdout writes that stop quietly when the reader goes away (`| head`).
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        if let Err(e) = write!(std::io::stdout(), $($t)*) {
            if e.kind() != std::io::ErrorKind::BrokenPipe {
                return Err(e.into());
            }
        }
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        out!($($t)*);
        out!("\n");
    }};
}
use crate::output::{RunManifest, atomic_with, write_json};

/// Dicke-state VQE for budget-constrained portfolio selection.
///
/// Exit codes: 0 success, 1 runtime failure (or a failed verify check),
/// 2 configuration or usage error.
///
/// Every flag with an env name can be set through the environment. Config
/// keys are overridden with DICKE_VQE_<SECTION>__<KEY>=<toml value>, for
/// example DICKE_VQE_RUN__OPTIMIZER__MAX_ITERATIONS=200.
#[derive(Debug, Parser)]
#[command(name = "dicke-vqe", version)]
struct Cli {
    /// Worker threads for sweeps and parallel simulation (default: all cores).
    #[arg(long, global = true, env = "DICKE_VQE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded random-walk price file.
    GenData(GenData),
    /// Run the VQE on one problem as described by a config file.
    Solve(RunArgs),
    /// Run a self-check suite and print a JSON report.
    Verify(VerifyArgs),
    /// Run a parameter sweep and write one CSV table.
    Bench(BenchArgs),
    /// Inspect ansatz circuits.
    #[command(subcommand)]
    Ansatz(AnsatzCmd),
    /// Inspect distributed execution plans.
    #[command(subcommand)]
    Hdc(HdcCmd),
}

#[derive(Debug, Args)]
struct GenData {
    #[arg(long, env = "DICKE_VQE_SEED", default_value_t = 1000)]
    seed: u64,
    /// Number of assets.
    #[arg(long, short = 'n')]
    assets: usize,
    #[arg(long, default_value_t = 252)]
    days: usize,
    /// Output CSV; a `.manifest.json` is written next to it.
    #[arg(long, env = "DICKE_VQE_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, env = "DICKE_VQE_CONFIG")]
    config: PathBuf,
    /// Overrides the run seed in the config.
    #[arg(long, env = "DICKE_VQE_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "DICKE_VQE_OUT", default_value = "out/solve")]
    out: PathBuf,
    /// Print the resolved configuration and exit without writing anything.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, env = "DICKE_VQE_CONFIG")]
    config: PathBuf,
    #[arg(long, env = "DICKE_VQE_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "DICKE_VQE_OUT", default_value = "out/bench")]
    out: PathBuf,
    #[arg(long)]
    dry_run: bool,
    /// Allow sweeps above the run-count threshold.
    #[arg(long, env = "DICKE_VQE_CONFIRM")]
    confirm: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: verify::Suite,
    /// Also write the report here.
    #[arg(long, env = "DICKE_VQE_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Ccc,
    Cc,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Ccc => Variant::Ccc,
            VariantArg::Cc => Variant::Cc,
        }
    }
}

#[derive(Debug, Args)]
struct SpecArgs {
    #[arg(long, value_enum, default_value = "ccc")]
    variant: VariantArg,
    #[arg(short = 'n', long)]
    n: usize,
    #[arg(short = 'k', long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    layers: usize,
    /// Use the two-CNOT compiled blocks.
    #[arg(long)]
    compiled: bool,
    #[arg(long)]
    symmetric_partition: bool,
}

impl SpecArgs {
    fn spec(&self) -> Result<AnsatzSpec> {
        let s = AnsatzSpec::new(self.variant.into(), self.n, self.k)
            .with_layers(self.layers)
            .compiled(self.compiled)
            .with_symmetric_partition(self.symmetric_partition);
        s.validate().map_err(|e| config::config_error(e.to_string()))?;
        Ok(s)
    }
}

#[derive(Debug, Subcommand)]
enum AnsatzCmd {
    /// Print a circuit with its gate counts.
    Dump {
        #[command(flatten)]
        spec: SpecArgs,
        /// Print JSON instead of the circuit text format.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlanArg {
    Columns,
    HalfSplit,
}

#[derive(Debug, Subcommand)]
enum HdcCmd {
    /// Print the subcircuit split and the cut fragments of each subcircuit.
    Plan {
        #[command(flatten)]
        spec: SpecArgs,
        /// Plan kind; defaults to the kind chosen for the spec.
        #[arg(long, value_enum)]
        kind: Option<PlanArg>,
        /// Largest fragment width.
        #[arg(long, default_value_t = DEFAULT_FRAGMENT_WIDTH)]
        width: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<ConfigError>()) { ExitCode::from(2) } else { ExitCode::from(1) }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(config::config_error("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("starting the worker pool")?;
    }
    match cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Solve(a) => {
            let loaded = config::load(&a.config)?;
            let p = solve::prepare(&loaded, a.seed)?;
            if a.dry_run {
                out!("{}", solve::dry_run(&p)?);
                return Ok(ExitCode::SUCCESS);
            }
            let rows = solve::execute(&p, &a.out)?;
            for r in &rows {
                let found = match r.found_optimum {
                    Some(true) => "optimum found",
                    Some(false) => "optimum missed",
                    None => "no reference",
                };
                outln!("{} {} n={} k={} answer={} energy={:.6} ({found})", r.variant, r.order, r.n, r.k, r.best_bitstring, r.best_energy);
            }
            outln!("wrote {}", a.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(a) => {
            let report = verify::run(a.suite)?;
            for c in &report.checks {
                eprintln!("{:<6} {:?}/{}: {}", format!("{:?}", c.status).to_lowercase(), c.suite, c.name, c.detail);
            }
            outln!("{}", serde_json::to_string_pretty(&report)?);
            if let Some(p) = &a.out {
                write_json(p, &report)?;
            }
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Bench(a) => {
            let loaded = config::load(&a.config)?;
            let plan = bench::prepare(&loaded, a.seed, a.confirm || a.dry_run)?;
            if a.dry_run {
                out!("# resolved sweep\n{}", toml::to_string(&plan.cfg)?);
                outln!("# {} cells x {} pools = {} runs", plan.cells.len(), plan.cfg.seeds, plan.cells.len() * plan.cfg.seeds);
                return Ok(ExitCode::SUCCESS);
            }
            let rows = bench::execute(&plan, &a.out)?;
            outln!("wrote {} rows to {}", rows.len(), a.out.join(format!("{}.csv", plan.cfg.table)).display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Ansatz(AnsatzCmd::Dump { spec, json }) => {
            let s = spec.spec()?;
            let c = build(&s)?;
            if json {
                let counts = if s.layers == 1 { Some(count_resources(&s)?) } else { None };
                let doc = json!({
                    "spec": s,
                    "qubits": c.n_qubits(),
                    "params": c.param_count(),
                    "cnots": c.cnot_count(),
                    "two_qubit_depth": c.two_qubit_depth(),
                    "formula": counts,
                    "circuit": c.to_text(),
                });
                outln!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                outln!(
                    "# {} n={} k={}: {} params, {} CNOTs, two-qubit depth {}",
                    s.variant,
                    s.n,
                    s.k,
                    c.param_count(),
                    c.cnot_count(),
                    c.two_qubit_depth()
                );
                out!("{}", c.to_text());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Hdc(HdcCmd::Plan { spec, kind, width }) => {
            let s = spec.spec()?;
            let plan = match kind {
                None => plan_subcircuits(&s),
                Some(PlanArg::Columns) => plan_with(&s, PlanKind::Columns),
                Some(PlanArg::HalfSplit) => plan_with(&s, PlanKind::HalfSplit),
            }
            .map_err(|e| config::config_error(e.to_string()))?;
            let mut subs = Vec::new();
            for sub in &plan.subcircuits {
                let cp = cut(sub, &default_cuts(sub, width).map_err(|e| config::config_error(e.to_string()))?)?;
                subs.push(json!({
                    "columns": sub.columns.iter().map(|c| bits::to_string(*c, s.n)).collect::<Vec<_>>(),
                    "offset": sub.offset,
                    "width": sub.width(),
                    "params": sub.param_count(),
                    "bridge": sub.bridge.is_some(),
                    "mirror_of": sub.mirror_of,
                    "wire_cuts": cp.wire_cuts(),
                    "fragment_widths": cp.widths(),
                }));
            }
            let doc = json!({ "spec": s, "kind": plan.kind, "subcircuits": subs.len(), "params": plan.param_count(), "overlap": plan.overlap, "plan": subs });
            outln!("{}", serde_json::to_string_pretty(&doc)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn gen_data(a: GenData) -> Result<ExitCode> {
    let manifest = RunManifest::start("gen-data", json!({ "seed": a.seed, "assets": a.assets, "days": a.days }), vec![a.seed]);
    let pool = generate_pool(a.seed, a.assets, a.days).map_err(|e| config::config_error(e.to_string()))?;
    atomic_with(&a.out, |tmp| Ok(pool.to_csv(tmp)?))?;
    let mut side = a.out.clone().into_os_string();
    side.push(".manifest.json");
    manifest.finish(&PathBuf::from(side), vec![a.out.clone()])?;
    outln!("wrote {} ({} assets, {} days)", a.out.display(), a.assets, a.days);
    Ok(ExitCode::SUCCESS)
}

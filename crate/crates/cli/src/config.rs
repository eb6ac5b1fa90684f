//! TOML configuration with `include` support and environment overrides.
//!
//! A file may name other files under `include` (a string or an array); they
//! are merged first, in order, and the including file wins. Environment
//! variables `DICKE_VQE_<SECTION>__<KEY>=<toml value>` override keys after
//! all includes are resolved.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Result;
use dicke_vqe::ansatz::{AnsatzSpec, Variant};
use dicke_vqe::portfolio::{AssetPool, PortfolioProblem, generate_pool};
use dicke_vqe::vqe::{AssetOrder, RunConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

pub const ENV_PREFIX: &str = "DICKE_VQE_";

/// A problem with the configuration rather than with the run; exits with code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// A merged configuration table and the directory relative paths resolve against.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub table: Table,
    pub base_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl Loaded {
    pub fn parse<T: DeserializeOwned>(&self) -> Result<T> {
        let origin = self.files.first().map_or_else(|| "<config>".to_string(), |p| p.display().to_string());
        self.table.clone().try_into().map_err(|e| config_error(format!("{origin}: {}", e.to_string().trim_end())))
    }
}

pub fn load(path: &Path) -> Result<Loaded> {
    let mut files = Vec::new();
    let mut table = load_file(path, &mut Vec::new(), &mut files)?;
    apply_env(&mut table, std::env::vars())?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { table, base_dir, files })
}

fn load_file(path: &Path, stack: &mut Vec<PathBuf>, files: &mut Vec<PathBuf>) -> Result<Table> {
    let canon = path.canonicalize().map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    if stack.contains(&canon) {
        return Err(config_error(format!("{}: include cycle", path.display())));
    }
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let mut table: Table = toml::from_str(&text).map_err(|e| config_error(format!("{}: {}", path.display(), e.to_string().trim_end())))?;
    files.push(path.to_path_buf());

    let includes = match table.remove("include") {
        None => Vec::new(),
        Some(Value::String(s)) => vec![s],
        Some(Value::Array(items)) => items
            .into_iter()
            .map(|v| match v {
                Value::String(s) => Ok(s),
                other => Err(config_error(format!("{}: include entries must be strings, got {other}", path.display()))),
            })
            .collect::<Result<_>>()?,
        Some(other) => return Err(config_error(format!("{}: include must be a string or array, got {other}", path.display()))),
    };
    stack.push(canon);
    let dir = path.parent().unwrap_or(Path::new(""));
    let mut merged = Table::new();
    for inc in includes {
        let sub = load_file(&dir.join(inc), stack, files)?;
        merge(&mut merged, sub);
    }
    stack.pop();
    merge(&mut merged, table);
    Ok(merged)
}

/// Deep merge: tables merge key by key, anything else in `over` replaces.
pub fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Applies `DICKE_VQE_A__B=value` as `a.b = value`. Values parse as TOML and
/// fall back to plain strings.
pub fn apply_env(table: &mut Table, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
    for (key, raw) in vars {
        let Some(rest) = key.strip_prefix(ENV_PREFIX) else { continue };
        if !rest.contains("__") {
            continue;
        }
        let path: Vec<String> = rest.split("__").map(str::to_ascii_lowercase).collect();
        if path.iter().any(String::is_empty) {
            return Err(config_error(format!("{key}: empty key segment")));
        }
        let value = toml::from_str::<Table>(&format!("v = {raw}")).ok().and_then(|mut t| t.remove("v")).unwrap_or(Value::String(raw));
        set_path(table, &path, value).map_err(|m| config_error(format!("{key}: {m}")))?;
    }
    Ok(())
}

fn set_path(table: &mut Table, path: &[String], value: Value) -> std::result::Result<(), String> {
    let (last, parents) = path.split_last().expect("nonempty path");
    let mut t = table;
    for p in parents {
        let slot = t.entry(p.clone()).or_insert_with(|| Value::Table(Table::new()));
        t = match slot {
            Value::Table(inner) => inner,
            _ => return Err(format!("`{p}` is not a table")),
        };
    }
    t.insert(last.clone(), value);
    Ok(())
}

fn default_risk() -> f64 {
    0.5
}

fn default_days() -> usize {
    252
}

fn default_pool_seed() -> u64 {
    1000
}

/// Where the portfolio comes from: explicit `mu`/`cov`, a price CSV, or a
/// generated pool of `assets` assets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// Number of assets to select (`k`).
    pub budget: usize,
    #[serde(default = "default_risk")]
    pub risk: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assets: Option<usize>,
    #[serde(default = "default_days")]
    pub days: usize,
    #[serde(default = "default_pool_seed")]
    pub pool_seed: u64,
}

impl ProblemSection {
    pub fn build(&self, base_dir: &Path) -> Result<PortfolioProblem<f64>> {
        let sources = [self.mu.is_some() || self.cov.is_some(), self.csv.is_some(), self.assets.is_some()];
        if sources.iter().filter(|s| **s).count() != 1 {
            return Err(config_error("problem: give exactly one of `mu`/`cov`, `csv` or `assets`"));
        }
        let problem = if let (Some(mu), Some(cov)) = (&self.mu, &self.cov) {
            if cov.len() != mu.len() || cov.iter().any(|r| r.len() != mu.len()) {
                return Err(config_error(format!("problem: `cov` must be {0} × {0} to match `mu`", mu.len())));
            }
            PortfolioProblem::new(mu.clone(), cov.concat(), self.risk, self.budget)
        } else if self.mu.is_some() || self.cov.is_some() {
            return Err(config_error("problem: `mu` and `cov` go together"));
        } else {
            let pool = self.pool(base_dir)?;
            PortfolioProblem::from_pool(&pool, self.risk, self.budget)
        };
        let problem = problem.map_err(|e| config_error(format!("problem: {e}")))?;
        Ok(match self.beta {
            Some(b) => problem.with_beta(b),
            None => problem,
        })
    }

    fn pool(&self, base_dir: &Path) -> Result<AssetPool> {
        if let Some(csv) = &self.csv {
            let path = base_dir.join(csv);
            return AssetPool::from_csv(&path).map_err(|e| config_error(format!("problem.csv {}: {e}", path.display())));
        }
        let n = self.assets.expect("checked by caller");
        generate_pool(self.pool_seed, n, self.days).map_err(|e| config_error(format!("problem: {e}")))
    }
}

fn default_variant() -> String {
    "ccc".into()
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    /// `ccc`, `cc` or `hardware_efficient`.
    #[serde(default = "default_variant")]
    pub variant: String,
    #[serde(default = "one")]
    pub layers: usize,
    #[serde(default)]
    pub compile_blocks: bool,
    #[serde(default)]
    pub symmetric_partition: bool,
}

impl Default for AnsatzSection {
    fn default() -> Self {
        AnsatzSection { variant: default_variant(), layers: 1, compile_blocks: false, symmetric_partition: false }
    }
}

pub enum AnsatzChoice {
    Dicke(AnsatzSpec),
    HardwareEfficient { layers: Option<usize> },
}

impl AnsatzSection {
    pub fn resolve(&self, n: usize, k: usize) -> Result<AnsatzChoice> {
        if self.variant == "hardware_efficient" {
            // `layers = 1` is the default, so only an explicit other value overrides ⌈log2 n⌉.
            return Ok(AnsatzChoice::HardwareEfficient { layers: (self.layers != 1).then_some(self.layers) });
        }
        let variant: Variant = self.variant.parse().map_err(|e| config_error(format!("ansatz.variant: {e}")))?;
        let spec = AnsatzSpec::new(variant, n, k)
            .with_layers(self.layers)
            .compiled(self.compile_blocks)
            .with_symmetric_partition(self.symmetric_partition);
        spec.validate().map_err(|e| config_error(format!("ansatz: {e}")))?;
        Ok(AnsatzChoice::Dicke(spec))
    }
}

fn default_orders() -> Vec<String> {
    vec!["original".into()]
}

/// `original`, `reversed`, `shift` or `random:<seed>`.
pub fn parse_order(s: &str) -> Result<AssetOrder> {
    match s {
        "original" => Ok(AssetOrder::Original),
        "reversed" => Ok(AssetOrder::Reversed),
        "shift" => Ok(AssetOrder::Shift),
        _ => match s.strip_prefix("random:").map(str::parse) {
            Some(Ok(seed)) => Ok(AssetOrder::Random { seed }),
            _ => Err(config_error(format!("unknown asset order `{s}` (original, reversed, shift, random:<seed>)"))),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub run: RunConfig,
    /// Asset orders to solve under; each gives one row of the summary.
    #[serde(default = "default_orders")]
    pub orders: Vec<String>,
}

impl SolveConfig {
    pub fn orders(&self) -> Result<Vec<AssetOrder>> {
        if self.orders.is_empty() {
            return Err(config_error("orders: need at least one asset order"));
        }
        self.orders.iter().map(|s| parse_order(s)).collect()
    }
}

//! CCC and CC Dicke-state ansatz circuits.
//!
//! Both families extract weight-`k` columns of the staircase unitary `U_n`.
//! CCC chains weight-preserving 3C blocks (`CNOT·CRy·CNOT`) and prepares the
//! exact Dicke support; CC uses the cheaper 2C block (`CRy·CNOT`) and admits a
//! few extra states of weight `k − 2i` for `3 ≤ k ≤ n − 3`.

mod blocks;
mod build;
mod resources;
mod support;

pub use blocks::{BlockKind, compile_block, raw_block};
pub(crate) use blocks::{push_compiled, push_raw};
pub(crate) use build::{Skeleton, cc_skeleton, ccc_skeleton};
pub use build::{build, build_cc, build_ccc, build_hardware_efficient, column_selector, hardware_efficient_layers};
pub use resources::{ResourceCount, count_resources};
pub use support::{SUPPORT_EPS, SupportReport, generic_theta, verify_support};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Ccc,
    Cc,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Ccc => "ccc",
            Variant::Cc => "cc",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ccc" => Ok(Variant::Ccc),
            "cc" => Ok(Variant::Cc),
            other => Err(Error::InvalidSpec(format!("unknown variant `{other}`"))),
        }
    }
}

/// Declarative ansatz description.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AnsatzSpec {
    pub variant: Variant,
    pub n: usize,
    pub k: usize,
    /// Number of `U_n` staircases; values above 1 append full staircases.
    pub layers: usize,
    /// Emit the two-CNOT compiled block forms instead of the raw blocks.
    pub compile_blocks: bool,
    /// Prune the staircase next to `U_n` (CC only).
    pub symmetric_partition: bool,
    /// Restricts distributed plans to the subcircuits covering these columns.
    pub column_subset: Option<Vec<u64>>,
}

impl AnsatzSpec {
    pub fn new(variant: Variant, n: usize, k: usize) -> Self {
        AnsatzSpec { variant, n, k, layers: 1, compile_blocks: false, symmetric_partition: false, column_subset: None }
    }

    pub fn ccc(n: usize, k: usize) -> Self {
        Self::new(Variant::Ccc, n, k)
    }

    pub fn cc(n: usize, k: usize) -> Self {
        Self::new(Variant::Cc, n, k)
    }

    pub fn with_layers(mut self, layers: usize) -> Self {
        self.layers = layers;
        self
    }

    pub fn compiled(mut self, on: bool) -> Self {
        self.compile_blocks = on;
        self
    }

    pub fn with_symmetric_partition(mut self, on: bool) -> Self {
        self.symmetric_partition = on;
        self
    }

    pub fn with_columns(mut self, columns: Vec<u64>) -> Self {
        self.column_subset = Some(columns);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n > 63 {
            return Err(Error::InvalidSpec(format!("n = {} outside 2..=63", self.n)));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::InvalidSpec(format!("k = {} outside 1..={}", self.k, self.n - 1)));
        }
        if self.layers == 0 {
            return Err(Error::InvalidSpec("layers must be at least 1".into()));
        }
        if self.symmetric_partition && self.variant != Variant::Cc {
            return Err(Error::InvalidSpec("symmetric partition requires the CC variant".into()));
        }
        if self.symmetric_partition && self.reduced_k() < 2 {
            return Err(Error::InvalidSpec("symmetric partition needs a staircase besides U_n (k ≥ 2 and k ≤ n − 2)".into()));
        }
        Ok(())
    }

    /// The weight the builder actually prepares before the optional complement.
    pub fn reduced_k(&self) -> usize {
        if self.complemented() { self.n - self.k } else { self.k }
    }

    /// Whether the builder prepares weight `n − k` and flips every qubit.
    pub fn complemented(&self) -> bool {
        self.k > self.n / 2
    }
}

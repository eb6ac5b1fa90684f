//! Mean-variance portfolio selection with a fixed budget of `k` assets.
//!
//! Asset `i` is qubit `i`, so the selection `x` reads MSB-first: `0011` on
//! four assets selects assets 2 and 3.

mod brute;
mod cvar;
mod pool;
mod problem;
mod spin;

pub use brute::{FeasibilityRule, brute_force, feasible_threshold};
pub use cvar::{cvar, cvar_dist, cvar_weighted, tail_size};
pub use pool::{AssetPool, generate_pool};
pub use problem::{EnergyForm, EnergyTable, PortfolioProblem};
pub use spin::SpinModel;

//! The variational loop: derivative-free minimizers, CVaR confidence
//! schedules, starting points, execution modes, restarts and order sweeps.
//!
//! One objective evaluation runs the ansatz (whole, as uncut subcircuits, or
//! through cut fragments), pools the subcircuit outputs with equal weight and
//! returns the CVaR at the scheduled α.

mod exec;
mod init;
mod optimizer;
mod schedule;
mod solve;
mod sweep;

pub use exec::{Ansatz, Execution, Executor, LayoutOptions, NoiseConfig, Outcome};
pub use init::{InitStrategy, UNIFORM_FIT_BUDGET, uniform_fit_init};
pub use optimizer::{Method, Minimum, OptimizerConfig, StopReason, minimize};
pub use schedule::{AlphaSchedule, HARDWARE_SETUP, Ramp, hardware_setup};
pub use solve::{ORACLE_LIMIT, RunConfig, RunResult, TracePoint, run, solve, solve_hardware_efficient};
pub use sweep::{AssetOrder, Band, Summary, best_of, order_sweep, solve_ordered, statistics, to_original};

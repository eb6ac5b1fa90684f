//! Dicke-state ansatz toolkit for budget-constrained portfolio optimization.
//!
//! The pipeline runs bottom-up through these modules:
//!
//! - [`sim`]: statevector simulation of the small gate alphabet, sampling and
//!   readout-noise injection.
//! - [`ansatz`]: CCC and CC staircase ansatz builders, block compilation and
//!   resource counting.
//! - [`portfolio`]: mean-variance problem, spin mapping, energies, CVaR and the
//!   brute-force oracle.
//! - [`hdc`]: column subcircuit plans, single-wire cutting, reduced-channel
//!   reconstruction and the sampling protocols.
//! - [`mitigation`]: Hamming-weight restricted readout mitigation.
//! - [`vqe`]: derivative-free optimizers, CVaR schedules and the solve loop.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common `f64` instantiations.

pub mod ansatz;
pub mod bits;
pub mod error;
pub mod hdc;
pub mod mitigation;
pub mod portfolio;
pub mod real;
pub mod sim;
pub mod vqe;

pub use error::{Error, Result};
pub use real::Real;

pub type StateVector = sim::StateVector<f64>;
pub type StateVector32 = sim::StateVector<f32>;
pub type ProbDist = sim::ProbDist<f64>;
pub type PortfolioProblem = portfolio::PortfolioProblem<f64>;
pub type SpinModel = portfolio::SpinModel<f64>;
pub type AssignmentMatrix = mitigation::AssignmentMatrix<f64>;

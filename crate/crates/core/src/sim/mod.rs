//! Statevector simulation of the ansatz gate alphabet.

mod circuit;
mod dist;
mod noise;
pub mod rng;
mod sample;
mod state;

pub use circuit::{Angle, Circuit, Gate};
pub use dist::ProbDist;
pub use noise::{DEVICE_FIDELITIES, ReadoutNoiseModel, apply_readout_noise};
pub use sample::{SampleSet, sample, sample_dist};
pub use state::{DEFAULT_MAX_QUBITS, Simulator, StateVector, simulate};

//! Hybrid distributed execution of the staircase ansatze.
//!
//! An ansatz is first split classically into subcircuits, each extracting a
//! few columns of `U_n`. Each subcircuit is then cut into fragments that share
//! exactly one wire with their neighbour. Because every fragment outputs
//! strings whose measured part fixes the forwarded bit, the cut only needs the
//! `|0⟩⟨0|` and `|1⟩⟨1|` sub-channels, and fragments can be sampled one after
//! another with `2p + 1` submissions for `p` cuts.

mod cache;
mod cut;
mod mitigated;
mod plan;
mod reconstruct;
mod sampling;
mod shotlog;

pub use cache::{CacheKey, CachedResult, FragmentCache, reuse_filter};
pub use cut::{BridgeBlock, CutPlan, CutPoint, Fragment, cut, cut_circuit, default_cuts, wire_cut};
pub use mitigated::mitigated_recombine;
pub use plan::{BridgeSite, PlanKind, Subcircuit, SubcircuitPlan, plan_subcircuits, plan_with, structural_support};
pub use reconstruct::{FragmentDists, PauliReference, exact_fragment_dists, pauli_reference, recombine, reconstruct_exact};
pub use sampling::{
    SampledRun, Streams, Submission, combine_recorded, combine_streams, noisy_streams, sequential_sample, simultaneous_sample,
    simultaneous_streams, stream_key,
};
pub use shotlog::{MAGIC, ShotRecord, read_shot_log, records_from_streams, streams_from_records, write_shot_log};

/// Default fragment width, matching the three-qubit fragments of the hardware runs.
pub const DEFAULT_FRAGMENT_WIDTH: usize = 3;

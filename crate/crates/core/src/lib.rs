//! Simulation and decoding of transversal-CNOT circuits on surface and
//! repetition codes.
//!
//! The pipeline is: build a [`LogicalCircuitSpec`] into a noisy [`Circuit`],
//! sample detection events with a [`FrameSampler`], and decode each shot
//! with an [`IterativeDecoder`] built on the per-patch [`MatchingGraph`].
//! [`experiment`] wraps this into logical-error-rate estimates.

pub mod circuit;
pub mod error;
pub mod experiment;
pub mod iterative;
pub mod matching_graph;
pub mod mwpm;
pub mod pauli;
pub mod sampler;

pub use circuit::{
    Basis, Circuit, CodeFamily, LogicalCircuit, LogicalCircuitSpec, NoiseModel, PatchLayout,
};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentResult};
pub use iterative::{DecodeOutcome, IterativeConfig, IterativeDecoder, Termination};
pub use matching_graph::{EdgeKind, MatchingGraph};
pub use mwpm::Mwpm;
pub use pauli::{Pauli, PauliFrame};
pub use sampler::{FrameSampler, ShotResult};

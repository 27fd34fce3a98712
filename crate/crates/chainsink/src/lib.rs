//! Energy transport in a linear chain of coupled two-level systems terminated
//! by a sink.
//!
//! The chain evolves under one of two Lindblad master equations: a *quantum*
//! scenario where neighbouring sites are coupled coherently through an
//! excitation-hopping Hamiltonian, and a *classical* scenario where the same
//! coupling strength drives incoherent bidirectional hopping instead. The
//! crate propagates both, in the full 2^(N+1) Hilbert space or in the reduced
//! single-excitation subspace, and derives the quantities used to compare
//! them: transport efficiency, relative entropy of coherence, integrated
//! coherence, intersection time, and the coupling threshold at which the two
//! scenarios break even.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod operators;
pub mod sweep;

pub use analysis::{
    find_lambda_qc, integrated_coherence, intersection_time, max_coherence,
    relative_entropy_of_coherence, run_point, IntegratedCoherence, LambdaQcResult, RunSummary,
};
pub use dynamics::{
    efficiency, propagate, sink_population, Efficiency, PropagationControls, TMax, Trajectory,
};
pub use error::{Error, Result};
pub use model::{
    build_classical_generator, build_hamiltonian, build_quantum_generator,
    build_reduced_generator, dissipator, BaseParams, ChainSpec, Generator, Scenario,
};
pub use operators::{
    embed_site_op, initial_state, von_neumann_entropy, CMatrix, DensityState, Representation,
    SiteIndex,
};

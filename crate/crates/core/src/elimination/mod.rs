//! Adiabatic elimination of the fast subsystem `B` by projection onto
//! `rho_A ⊗ rho_b`.

mod blocks;
mod generator;
mod inverse;
mod projectors;

pub use blocks::{decompose, decompose_model, BlockDecomposition};
pub use generator::{
    effective_generator, effective_propagate, eliminate, generator_from_parts, EffectiveGenerator,
    EliminationResult, MAX_RESOLVENT_CONDITION,
};
pub use inverse::{invert_qlq, InversionMethod, QlqInverse, QLQ_RANK_TOL};
pub use projectors::{build_projectors, ProjectorPair};

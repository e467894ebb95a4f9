//! A laboratory for locality-explicit multi-prover interactive proofs.

pub mod attacks;
pub mod bfl;
pub mod boxes;
pub mod commitments;
pub mod committed_eval;
pub mod fields;
pub mod runtime;
pub mod simulators;
pub mod stats;
pub mod zk_protocol;

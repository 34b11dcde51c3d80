//! Exact simulation of affine-automaton verifiers interacting with provers.
//!
//! Verifiers are finite automata with affine registers (rational vectors summing to 1)
//! that talk to an all-powerful prover over public coins. Everything is evaluated with
//! exact rational arithmetic: honest runs, optimal cheating provers, restart rounds and
//! seeded Monte Carlo sampling.

pub mod affine;
pub mod encoders;
pub mod engine;
pub mod machine;
pub mod rational;
pub mod tm;
pub mod protocols;

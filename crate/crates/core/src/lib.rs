//! Simulation toolkit for a measurement-feedback stabilized discrete time crystal.

pub mod analysis;
pub mod automaton;
pub mod compiler;
pub mod dense;
pub mod ensemble;
pub mod harness;
pub mod lattice;
pub mod protocol;
pub mod rng;
pub mod stabilizer;

//! Structured single-step quantum search for random k-SAT.
//!
//! The crate simulates the phase-and-mix search algorithm exactly on state
//! vectors, evaluates its success probability averaged over the random k-SAT
//! ensemble by exact counting, and computes the asymptotic exponential decay
//! rate by steepest descent, along with classical baselines for comparison.

pub mod asymptotics;
pub mod baselines;
pub mod combin;
pub mod error;
pub mod exact;
pub mod rng;
pub mod sat;
pub mod sim;

pub use error::{Error, Result};

//! Exact state-vector simulation of the phase-and-mix search.

mod grover;
mod mixing;
mod montecarlo;
mod partial;
mod run;
mod schedule;
mod state;
mod walsh;

pub use grover::{amplification_cost, optimal_iterations, unstructured_cost, unstructured_psoln};
pub use mixing::{apply_mixing, linear_phase_table, mixing_coefficient, mixing_coefficient_direct};
pub(crate) use montecarlo::psoln_samples;
pub use montecarlo::{monte_carlo_mean, MonteCarloStats};
pub use partial::{
    run_partial, run_partial_with, PartialOptions, PartialOutcome, MAX_PARTIAL_VARS,
};
pub use run::{apply_conflict_phase, p_solution, run, Simulator};
pub use schedule::{LinearRule, PhaseSchedule, Step};
pub use state::{StateVector, MAX_QUBITS};
pub use walsh::fast_walsh;

//! Large-n behavior of the ensemble-averaged success probability.
//!
//! With group sizes scaled by `n`, `E[Psoln]` becomes an integral of
//! `exp(n F)` whose stationary point gives the decay rate `A = -F` and the
//! Gaussian prefactor.

mod exponent;
mod limits;
mod optimize;
mod saddle;

pub use exponent::{scaled_counts, Exponent, ExponentKind, ScaledCounts, ScaledPoint};
pub use limits::{
    reference_rates, strong_limit, weak_limit, ReferenceRates, StrongLimit, WeakLimit,
};
pub use optimize::{
    optimize_parameters, optimize_parameters_with, rate_grid, sweep_mu, unstructured_crossing,
    OptimizeOptions, Optimum, Seed,
};
pub use saddle::{
    decay_rate, decay_rate_with, find_stationary_point, DecayResult, HESSIAN_STEP,
    MAX_NEWTON_ITERATIONS, STATIONARY_TOLERANCE,
};

//! Cost models for unstructured search and amplitude amplification.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Success probability `sin^2((2j + 1) theta)` after `j` Grover iterations,
/// with `sin(theta) = sqrt(S / N)`.
pub fn unstructured_psoln(solutions: u64, states: u64, iterations: u64) -> Result<f64> {
    if states == 0 || solutions > states {
        return Err(Error::usage(format!(
            "need 0 <= S <= N, got S = {solutions}, N = {states}"
        )));
    }
    if solutions == 0 {
        return Ok(0.0);
    }
    let theta = (solutions as f64 / states as f64).sqrt().asin();
    Ok(((2 * iterations + 1) as f64 * theta).sin().powi(2))
}

/// Iteration count `round((pi / (2 theta) - 1) / 2)`, which puts
/// `(2j + 1) theta` nearest `pi / 2`.
pub fn optimal_iterations(solutions: u64, states: u64) -> Result<u64> {
    if solutions == 0 || solutions > states {
        return Err(Error::usage("optimal iteration count needs 0 < S <= N"));
    }
    let theta = (solutions as f64 / states as f64).sqrt().asin();
    Ok(((PI / (2.0 * theta) - 1.0) / 2.0).round().max(0.0) as u64)
}

/// Expected steps when amplitude amplification boosts a procedure that
/// succeeds with known probability `p` per trial of `steps_per_trial` steps:
/// `(pi / 4) steps_per_trial sqrt(1 / p)`.
///
/// When `p` is unknown the schedule of Boyer et al. costs up to four times
/// this.
pub fn amplification_cost(p: f64, steps_per_trial: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!(
            "amplification cost undefined for p = {p}"
        )));
    }
    Ok(PI / 4.0 * steps_per_trial * (1.0 / p).sqrt())
}

/// Expected number of solution tests for unstructured search with known `S`:
/// independent trials of `j` iterations plus one final test, repeated until
/// success, minimized over `j` up to the optimal iteration count.
pub fn unstructured_cost(solutions: u64, states: u64) -> Result<f64> {
    if solutions == 0 {
        return Err(Error::domain(
            "unstructured cost undefined without solutions",
        ));
    }
    let best = optimal_iterations(solutions, states)?;
    let mut cost = f64::INFINITY;
    for j in 0..=best {
        let p = unstructured_psoln(solutions, states, j)?;
        cost = cost.min((j + 1) as f64 / p);
    }
    Ok(cost)
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::Simulator;
use super::schedule::PhaseSchedule;
use crate::error::Result;
use crate::rng;
use crate::sat::{sample_problem, EnsembleSpec};

/// Sample statistics of `Psoln` over independently drawn problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloStats {
    pub samples: usize,
    pub mean: f64,
    pub std_error: f64,
    pub mean_square: f64,
    /// Fraction of drawn problems with at least one solution.
    pub soluble_fraction: f64,
}

/// Average `Psoln` over `samples` problems from `ensemble`.
///
/// Problem `i` is drawn from stream `i` of the ensemble seed. With
/// `soluble_only` insoluble draws are rejected (each rejection advances to
/// the next stream) and the statistics are conditional on solubility.
pub fn monte_carlo_mean(
    ensemble: &EnsembleSpec,
    schedule: &PhaseSchedule,
    samples: usize,
    soluble_only: bool,
) -> Result<MonteCarloStats> {
    ensemble.validate()?;
    schedule.validate()?;
    let draws = psoln_samples(ensemble, schedule, samples, soluble_only)?;
    let values: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let attempts: u64 = draws.iter().map(|d| d.1).sum();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mean_square = values.iter().map(|v| v * v).sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let soluble = if soluble_only {
        samples as f64 / attempts as f64
    } else {
        draws.iter().filter(|d| d.2).count() as f64 / n
    };
    Ok(MonteCarloStats {
        samples,
        mean,
        std_error: (var / n).sqrt(),
        mean_square,
        soluble_fraction: soluble,
    })
}

/// `(Psoln, draws used, soluble)` per sample, in sample order.
pub(crate) fn psoln_samples(
    ensemble: &EnsembleSpec,
    schedule: &PhaseSchedule,
    samples: usize,
    soluble_only: bool,
) -> Result<Vec<(f64, u64, bool)>> {
    // With rejection each sample owns a disjoint block of streams.
    const BLOCK: u64 = 1 << 20;
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut attempt = 0u64;
            loop {
                let stream = if soluble_only {
                    i as u64 * BLOCK + attempt
                } else {
                    i as u64
                };
                let mut r = rng::stream(ensemble.seed, stream);
                let problem = sample_problem(ensemble, &mut r)?;
                let sim = Simulator::new(&problem)?;
                attempt += 1;
                let soluble = sim.solution_count() > 0;
                if soluble_only && !soluble {
                    continue;
                }
                let p = sim.run_p_solution(schedule)?;
                return Ok((p, attempt, soluble));
            }
        })
        .collect()
}

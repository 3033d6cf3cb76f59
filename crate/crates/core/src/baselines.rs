//! Classical reference methods and per-instance cost records.
//!
//! GSAT here is the bare best-flip local search: start from a uniformly
//! random assignment and repeatedly flip the variable giving the fewest
//! conflicts (ties broken uniformly, sideways and uphill moves allowed),
//! giving up after `2n` flips.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::sat::{sample_problem, EnsembleSpec, SatProblem};
use crate::sim::{amplification_cost, psoln_samples, unstructured_cost, PhaseSchedule, Simulator};

/// Outcome of one GSAT trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GsatTrial {
    pub success: bool,
    /// Flips made before success or the limit.
    pub steps: u32,
}

/// Literal occurrence lists for incremental conflict bookkeeping.
struct Occurrences {
    // per variable: (clause index, literal is negated)
    by_var: Vec<Vec<(u32, bool)>>,
}

impl Occurrences {
    fn new(problem: &SatProblem) -> Self {
        let mut by_var = vec![Vec::new(); problem.n() as usize];
        for (ci, c) in problem.clauses().iter().enumerate() {
            for (v, neg) in c.literals() {
                by_var[v as usize].push((ci as u32, neg));
            }
        }
        Occurrences { by_var }
    }
}

fn gsat_run<R: Rng + ?Sized>(problem: &SatProblem, occ: &Occurrences, rng: &mut R) -> GsatTrial {
    let n = problem.n() as usize;
    let mut bits: u64 = if n == 64 {
        rng.next_u64()
    } else {
        rng.next_u64() & ((1u64 << n) - 1)
    };
    let lit_true = |bits: u64, v: usize, neg: bool| (bits >> v & 1 == 1) != neg;
    let mut true_count: Vec<u32> = problem
        .clauses()
        .iter()
        .map(|c| {
            c.literals()
                .filter(|&(v, neg)| lit_true(bits, v as usize, neg))
                .count() as u32
        })
        .collect();
    let mut conflicts = true_count.iter().filter(|&&t| t == 0).count() as i64;
    let limit = 2 * n as u32;
    let mut best = Vec::with_capacity(n);
    for step in 0..=limit {
        if conflicts == 0 {
            return GsatTrial {
                success: true,
                steps: step,
            };
        }
        if step == limit {
            break;
        }
        best.clear();
        let mut best_delta = i64::MAX;
        for (v, lits) in occ.by_var.iter().enumerate() {
            let mut delta = 0i64;
            for &(ci, neg) in lits {
                let t = true_count[ci as usize];
                if t == 0 {
                    delta -= 1;
                } else if t == 1 && lit_true(bits, v, neg) {
                    delta += 1;
                }
            }
            if delta < best_delta {
                best_delta = delta;
                best.clear();
            }
            if delta == best_delta {
                best.push(v);
            }
        }
        let v = best[rng.gen_range(0..best.len())];
        for &(ci, neg) in &occ.by_var[v] {
            if lit_true(bits, v, neg) {
                true_count[ci as usize] -= 1;
            } else {
                true_count[ci as usize] += 1;
            }
        }
        bits ^= 1 << v;
        conflicts += best_delta;
    }
    GsatTrial {
        success: false,
        steps: limit,
    }
}

/// One GSAT trial with a limit of `2n` flips.
pub fn gsat_trial<R: Rng + ?Sized>(problem: &SatProblem, rng: &mut R) -> GsatTrial {
    gsat_run(problem, &Occurrences::new(problem), rng)
}

/// Per-trial GSAT success probability with its Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsatEstimate {
    pub trials: usize,
    pub successes: usize,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Flips per solution when trials stop at success: total flips over
    /// successes (infinite without successes).
    pub classical_cost: f64,
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959963984540054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + Z * Z / n;
    let centre = (p + Z * Z / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + Z * Z / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// Minimum trial count accepted by [`gsat_success_probability`].
pub const MIN_GSAT_TRIALS: usize = 100;

/// Estimates the GSAT success probability from `trials` independent trials.
/// Trial `t` uses stream `t` of a key drawn from `rng`.
pub fn gsat_success_probability<R: Rng + ?Sized>(
    problem: &SatProblem,
    trials: usize,
    rng: &mut R,
) -> Result<GsatEstimate> {
    if trials < MIN_GSAT_TRIALS {
        return Err(Error::usage(format!(
            "need at least {MIN_GSAT_TRIALS} GSAT trials, got {trials}"
        )));
    }
    let key = rng.next_u64();
    let occ = Occurrences::new(problem);
    let outcomes: Vec<GsatTrial> = (0..trials as u64)
        .into_par_iter()
        .map(|t| gsat_run(problem, &occ, &mut rng::stream(key, t)))
        .collect();
    let successes = outcomes.iter().filter(|o| o.success).count();
    let flips: u64 = outcomes.iter().map(|o| o.steps as u64).sum();
    let (ci_low, ci_high) = wilson_interval(successes, trials);
    // a successful trial also spends one evaluation on the starting point
    let classical_cost = if successes == 0 {
        f64::INFINITY
    } else {
        (flips + trials as u64) as f64 / successes as f64
    };
    Ok(GsatEstimate {
        trials,
        successes,
        p: successes as f64 / trials as f64,
        ci_low,
        ci_high,
        classical_cost,
    })
}

/// Costs of the compared methods for one instance, in expected steps.
///
/// The amplified costs assume the success probability is known; without
/// that knowledge amplitude amplification needs up to four times as many
/// steps. Insoluble instances carry infinite costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRecord {
    pub instance: u64,
    pub n: u32,
    pub m: usize,
    pub solutions: u64,
    pub p_quantum: f64,
    pub p_gsat: f64,
    pub p_gsat_low: f64,
    pub p_gsat_high: f64,
    pub cost_quantum_aa: f64,
    pub cost_gsat_aa: f64,
    pub cost_gsat_classical: f64,
    pub cost_unstructured: f64,
}

/// Column names of the CSV form of [`CostRecord`], in order.
pub const COST_COLUMNS: [&str; 12] = [
    "instance",
    "n",
    "m",
    "solutions",
    "p_quantum",
    "p_gsat",
    "p_gsat_low",
    "p_gsat_high",
    "cost_quantum_aa",
    "cost_gsat_aa",
    "cost_gsat_classical",
    "cost_unstructured",
];

fn amplified(p: f64, steps: f64) -> f64 {
    amplification_cost(p, steps).unwrap_or(f64::INFINITY)
}

/// Builds the cost record of one instance.
pub fn instance_costs<R: Rng + ?Sized>(
    instance: u64,
    problem: &SatProblem,
    schedule: &PhaseSchedule,
    gsat_trials: usize,
    rng: &mut R,
) -> Result<CostRecord> {
    let sim = Simulator::new(problem)?;
    let p_quantum = sim.run_p_solution(schedule)?;
    let gsat = gsat_success_probability(problem, gsat_trials, rng)?;
    let n = problem.n();
    let solutions = sim.solution_count();
    let cost_unstructured = if solutions == 0 {
        f64::INFINITY
    } else {
        unstructured_cost(solutions, 1u64 << n)?
    };
    Ok(CostRecord {
        instance,
        n,
        m: problem.m(),
        solutions,
        p_quantum,
        p_gsat: gsat.p,
        p_gsat_low: gsat.ci_low,
        p_gsat_high: gsat.ci_high,
        cost_quantum_aa: amplified(p_quantum, schedule.len() as f64),
        cost_gsat_aa: amplified(gsat.p, 2.0 * n as f64),
        cost_gsat_classical: gsat.classical_cost,
        cost_unstructured,
    })
}

/// Cost records for `count` soluble instances drawn from `ensemble`.
/// Instance `i` is drawn exactly as sample `i` of a soluble-only
/// Monte-Carlo run, and its GSAT trials use a key derived from `i`.
pub fn soluble_cost_records(
    ensemble: &EnsembleSpec,
    schedule: &PhaseSchedule,
    count: usize,
    gsat_trials: usize,
) -> Result<Vec<CostRecord>> {
    ensemble.validate()?;
    schedule.validate()?;
    const BLOCK: u64 = 1 << 20;
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            for attempt in 0..BLOCK {
                let mut r = rng::stream(ensemble.seed, i * BLOCK + attempt);
                let problem = sample_problem(ensemble, &mut r)?;
                if problem.count_solutions()? == 0 {
                    continue;
                }
                let mut trial_rng = rng::stream(ensemble.seed ^ 0x9e37_79b9_7f4a_7c15, i);
                return instance_costs(i, &problem, schedule, gsat_trials, &mut trial_rng);
            }
            Err(Error::capacity(format!(
                "no soluble instance within {BLOCK} draws"
            )))
        })
        .collect()
}

/// Success-probability aggregates over instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub instances: usize,
    /// `1 / E[Psoln]`
    pub inv_mean: f64,
    /// `median(1 / Psoln)`
    pub median_inv: f64,
    /// `E[1 / Psoln]`
    pub mean_inv: f64,
}

pub fn summarize_psoln(p: &[f64]) -> Result<CostSummary> {
    if p.is_empty() {
        return Err(Error::usage("no instances to summarize"));
    }
    let n = p.len() as f64;
    let mut inv: Vec<f64> = p.iter().map(|&v| 1.0 / v).collect();
    inv.sort_by(f64::total_cmp);
    let mid = inv.len() / 2;
    let median_inv = if inv.len() % 2 == 1 {
        inv[mid]
    } else {
        0.5 * (inv[mid - 1] + inv[mid])
    };
    Ok(CostSummary {
        instances: p.len(),
        inv_mean: n / p.iter().sum::<f64>(),
        median_inv,
        mean_inv: inv.iter().sum::<f64>() / n,
    })
}

/// `Psoln` aggregates over `count` soluble instances (no GSAT trials).
pub fn soluble_psoln_summary(
    ensemble: &EnsembleSpec,
    schedule: &PhaseSchedule,
    count: usize,
) -> Result<CostSummary> {
    ensemble.validate()?;
    schedule.validate()?;
    let p: Vec<f64> = psoln_samples(ensemble, schedule, count, true)?
        .into_iter()
        .map(|s| s.0)
        .collect();
    summarize_psoln(&p)
}

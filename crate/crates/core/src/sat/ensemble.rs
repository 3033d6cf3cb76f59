//! The random k-SAT ensemble (m distinct clauses chosen uniformly) and the
//! ensemble with a prespecified solution, with their exact statistics.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::clause::{clause_pool_size, Assignment};
use super::problem::SatProblem;
use crate::combin::{binomial, binomial_u64, unrank_subset, LnFactorials};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnsembleKind {
    Random,
    /// Clauses are drawn only from those the stored solution satisfies.
    Prespecified {
        solution: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    pub n: u32,
    pub k: u32,
    pub m: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn random(n: u32, k: u32, m: usize, seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::Random,
            n,
            k,
            m,
            seed,
        }
    }

    pub fn prespecified(solution: Assignment, k: u32, m: usize, seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::Prespecified {
                solution: solution.bits,
            },
            n: solution.n,
            k,
            m,
            seed,
        }
    }

    /// Number of clauses available for selection.
    pub fn pool_size(&self) -> u64 {
        let total = clause_pool_size(self.n, self.k);
        match self.kind {
            EnsembleKind::Random => total,
            EnsembleKind::Prespecified { .. } => total - binomial_u64(self.n as u64, self.k as u64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 64 || self.k == 0 || self.k > self.n || self.k > 16 {
            return Err(Error::usage(format!(
                "invalid sizes n = {}, k = {}",
                self.n, self.k
            )));
        }
        if let EnsembleKind::Prespecified { solution } = self.kind {
            Assignment::new(solution, self.n)?;
        }
        let pool = self.pool_size();
        if self.m as u64 > pool {
            return Err(Error::capacity(format!(
                "m = {} exceeds the {pool} admissible clauses",
                self.m
            )));
        }
        Ok(())
    }
}

/// Map an index into the admissible pool onto a clause rank.
fn admissible_rank(spec: &EnsembleSpec, index: u64, scratch: &mut Vec<u32>) -> u64 {
    match spec.kind {
        EnsembleKind::Random => index,
        EnsembleKind::Prespecified { solution } => {
            let per_subset = (1u64 << spec.k) - 1;
            let subset = index / per_subset;
            let mut pattern = index % per_subset;
            unrank_subset(spec.n, spec.k, subset, scratch);
            let forbidden = scratch
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &v)| acc | (solution >> v & 1) << i);
            if pattern >= forbidden {
                pattern += 1;
            }
            (subset << spec.k) | pattern
        }
    }
}

/// Draw one problem: `m` distinct clauses uniformly without replacement from
/// the admissible pool (Floyd's algorithm over pool indices).
pub fn sample_problem<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<SatProblem> {
    spec.validate()?;
    let pool = spec.pool_size();
    let m = spec.m as u64;
    let mut chosen: HashSet<u64> = HashSet::with_capacity(spec.m);
    let mut order = Vec::with_capacity(spec.m);
    for j in pool - m..pool {
        let t = rng.gen_range(0..=j);
        let pick = if chosen.contains(&t) { j } else { t };
        chosen.insert(pick);
        order.push(pick);
    }
    let mut scratch = Vec::new();
    let ranks = order
        .into_iter()
        .map(|i| admissible_rank(spec, i, &mut scratch))
        .collect();
    Ok(SatProblem::from_ranks(spec.n, spec.k, ranks))
}

/// Largest number of problems [`enumerate_problems`] will walk.
pub const MAX_ENUMERATED_PROBLEMS: u128 = 10_000_000;

/// Every problem with `m` distinct clauses, each exactly once.
pub fn enumerate_problems(n: u32, k: u32, m: usize) -> Result<ProblemIter> {
    EnsembleSpec::random(n, k, m, 0).validate()?;
    let pool = clause_pool_size(n, k);
    let count = binomial(pool, m as u64).unwrap_or(u128::MAX);
    if count > MAX_ENUMERATED_PROBLEMS {
        return Err(Error::capacity(format!(
            "C({pool}, {m}) = {count} problems exceeds the enumeration limit"
        )));
    }
    Ok(ProblemIter {
        n,
        k,
        pool,
        current: Some((0..m as u64).collect()),
    })
}

/// Iterator over m-subsets of the clause pool in lexicographic order.
pub struct ProblemIter {
    n: u32,
    k: u32,
    pool: u64,
    current: Option<Vec<u64>>,
}

impl Iterator for ProblemIter {
    type Item = SatProblem;

    fn next(&mut self) -> Option<SatProblem> {
        let cur = self.current.as_mut()?;
        let problem = SatProblem::from_ranks(self.n, self.k, cur.clone());
        let m = cur.len();
        let mut i = m;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if cur[i] < self.pool - (m - i) as u64 {
                cur[i] += 1;
                for j in i + 1..m {
                    cur[j] = cur[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            self.current = None;
        }
        Some(problem)
    }
}

/// Probability that a fixed assignment solves a problem from the ensemble.
///
/// For the random ensemble this is `C(M - C(n,k), m) / C(M, m)`; for the
/// prespecified ensemble it is the expected solution count over `2^n`.
pub fn solution_fraction(n: u32, k: u32, m: usize, kind: EnsembleKind) -> Result<f64> {
    let spec = EnsembleSpec {
        kind,
        n,
        k,
        m,
        seed: 0,
    };
    spec.validate()?;
    let total = clause_pool_size(n, k) as usize;
    let per = binomial_u64(n as u64, k as u64) as usize;
    let lf = LnFactorials::new(total);
    Ok(match kind {
        EnsembleKind::Random => (lf.ln_binomial(total - per, m) - lf.ln_binomial(total, m)).exp(),
        EnsembleKind::Prespecified { .. } => {
            // r at distance d from the solution: both falsify C(n-d, k) clauses.
            let ln_problems = lf.ln_binomial(total - per, m);
            let mut sum = 0.0;
            for d in 0..=n as usize {
                let shared = binomial_u64((n as usize - d) as u64, k as u64) as usize;
                let free = total - 2 * per + shared;
                let ln_w = lf.ln_binomial(n as usize, d) + lf.ln_binomial(free, m)
                    - ln_problems
                    - n as f64 * std::f64::consts::LN_2;
                sum += ln_w.exp();
            }
            sum
        }
    })
}

/// Large-`n` form `(1 - 2^-k)^m` of the random-ensemble solution fraction.
pub fn solution_fraction_asymptotic(k: u32, m: usize) -> f64 {
    (1.0 - (-(k as f64)).exp2()).powi(m as i32)
}

/// Conflict-count statistics over the random ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictMoments {
    /// `m 2^-k`, identical for every problem.
    pub mean: f64,
    /// Ensemble average of the per-problem variance of `c(s)`.
    pub expected_variance: f64,
    /// Large-`n` limit `mean (1 - 2^-k)`.
    pub asymptotic_variance: f64,
}

pub fn conflict_moments(n: u32, k: u32, m: usize) -> Result<ConflictMoments> {
    EnsembleSpec::random(n, k, m, 0).validate()?;
    let two_k = (-(k as f64)).exp2();
    let mean = m as f64 * two_k;
    let asymptotic_variance = mean * (1.0 - two_k);
    if m == 0 {
        return Ok(ConflictMoments {
            mean,
            expected_variance: 0.0,
            asymptotic_variance,
        });
    }
    let big_m = clause_pool_size(n, k) as f64;
    let second = if big_m > 1.0 {
        mean * (1.0 + (m as f64 - 1.0) * (big_m * two_k - 1.0) / (big_m - 1.0))
    } else {
        mean
    };
    Ok(ConflictMoments {
        mean,
        expected_variance: second - mean * mean,
        asymptotic_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_problems(3, 2, 3).unwrap().count(), 220);
        assert_eq!(enumerate_problems(3, 2, 2).unwrap().count(), 66);
        assert_eq!(enumerate_problems(2, 1, 0).unwrap().count(), 1);
        let all: HashSet<SatProblem> = enumerate_problems(3, 2, 3).unwrap().collect();
        assert_eq!(all.len(), 220);
        assert!(matches!(
            enumerate_problems(10, 3, 20),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn complete_problem() {
        let mut r = rng::from_seed(0);
        let p = sample_problem(&EnsembleSpec::random(3, 2, 12, 0), &mut r).unwrap();
        assert_eq!(p.m(), 12);
        assert_eq!(p.count_solutions().unwrap(), 0);
        assert!(matches!(
            sample_problem(&EnsembleSpec::random(3, 2, 13, 0), &mut r),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn prespecified_samples_keep_solution() {
        let sol = Assignment::new(0, 3).unwrap();
        let spec = EnsembleSpec::prespecified(sol, 2, 3, 1);
        assert_eq!(spec.pool_size(), 9);
        let mut r = rng::from_seed(1);
        for _ in 0..1000 {
            let p = sample_problem(&spec, &mut r).unwrap();
            assert!(p.is_solution(sol).unwrap());
        }
        let full = EnsembleSpec::prespecified(Assignment::new(0b101, 3).unwrap(), 2, 9, 0);
        let p = sample_problem(&full, &mut r).unwrap();
        assert_eq!(p.count_solutions().unwrap(), 1);
        assert!(sample_problem(&EnsembleSpec { m: 10, ..full }, &mut r).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = EnsembleSpec::random(20, 3, 80, 7);
        let a = sample_problem(&spec, &mut rng::from_seed(7)).unwrap();
        let b = sample_problem(&spec, &mut rng::from_seed(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn solution_fraction_values() {
        let f = solution_fraction(4, 3, 4, EnsembleKind::Random).unwrap();
        assert!((f - 491400.0 / 863040.0).abs() < 1e-12);
        assert_eq!(
            solution_fraction(5, 3, 0, EnsembleKind::Random).unwrap(),
            1.0
        );
        assert!((solution_fraction_asymptotic(3, 4) - 0.586181640625).abs() < 1e-12);
    }

    #[test]
    fn prespecified_fraction_matches_enumeration() {
        // n=3,k=2,m=3 with solution 000: average S over all C(9,3) problems
        let n = 3;
        let mut total = 0u64;
        let mut count = 0u64;
        for p in enumerate_problems(n, 2, 3).unwrap() {
            if p.is_solution(Assignment::new(0, n).unwrap()).unwrap() {
                total += p.count_solutions().unwrap();
                count += 1;
            }
        }
        assert_eq!(count, 84);
        let expected = total as f64 / count as f64 / 8.0;
        let got = solution_fraction(n, 2, 3, EnsembleKind::Prespecified { solution: 0 }).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn moments_match_enumeration() {
        let mm = conflict_moments(3, 2, 3).unwrap();
        let vars: Vec<f64> = enumerate_problems(3, 2, 3)
            .unwrap()
            .map(|p| p.conflict_variance())
            .collect();
        let avg = vars.iter().sum::<f64>() / vars.len() as f64;
        assert!((mm.expected_variance - avg).abs() < 1e-12);
        assert_eq!(conflict_moments(10, 3, 80).unwrap().mean, 10.0);
        assert_eq!(conflict_moments(10, 3, 0).unwrap().expected_variance, 0.0);
    }
}

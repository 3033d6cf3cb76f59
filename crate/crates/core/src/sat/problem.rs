use std::collections::HashSet;

use rayon::prelude::*;

use super::clause::{clause_pool_size, Assignment, Clause};
use crate::error::{Error, Result};

/// Largest `n` for which full-spectrum tables over all `2^n` assignments are built.
pub const MAX_ENUMERATION_VARS: u32 = 30;

/// A k-SAT instance: `m` distinct clauses of width `k` over `n` variables.
///
/// Clauses are stored sorted by canonical rank, so two problems with the same
/// clause set compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SatProblem {
    n: u32,
    k: u32,
    clauses: Vec<Clause>,
    patterns: Vec<(u64, u64)>,
}

impl SatProblem {
    pub fn new(n: u32, k: u32, mut clauses: Vec<Clause>) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::usage(format!("n = {n} outside 1..=64")));
        }
        if k == 0 || k > n {
            return Err(Error::usage(format!(
                "clause width k = {k} invalid for n = {n}"
            )));
        }
        let mut seen = HashSet::with_capacity(clauses.len());
        for c in &clauses {
            if c.k() != k {
                return Err(Error::usage(format!(
                    "clause `{c}` has width {} not {k}",
                    c.k()
                )));
            }
            if c.vars().iter().any(|&v| v >= n) {
                return Err(Error::usage(format!(
                    "clause `{c}` references a variable beyond n = {n}"
                )));
            }
            if !seen.insert(c.rank(n)) {
                return Err(Error::usage(format!("duplicate clause `{c}`")));
            }
        }
        clauses.sort_unstable_by_key(|c| c.rank(n));
        let patterns = clauses.iter().map(Clause::conflict_pattern).collect();
        Ok(SatProblem {
            n,
            k,
            clauses,
            patterns,
        })
    }

    /// Build from canonical clause ranks (no duplicate check beyond sorting).
    pub(crate) fn from_ranks(n: u32, k: u32, mut ranks: Vec<u64>) -> Self {
        ranks.sort_unstable();
        let clauses: Vec<Clause> = ranks.iter().map(|&r| Clause::from_rank(n, k, r)).collect();
        let patterns = clauses.iter().map(Clause::conflict_pattern).collect();
        SatProblem {
            n,
            k,
            clauses,
            patterns,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Mean conflict count over all assignments, `m / 2^k`.
    pub fn mean_conflicts(&self) -> f64 {
        self.m() as f64 / (1u64 << self.k) as f64
    }

    pub fn clause_ratio(&self) -> f64 {
        self.m() as f64 / self.n as f64
    }

    pub fn max_clauses(&self) -> u64 {
        clause_pool_size(self.n, self.k)
    }

    fn check_width(&self, s: Assignment) -> Result<()> {
        if s.n != self.n {
            return Err(Error::usage(format!(
                "assignment width {} does not match n = {}",
                s.n, self.n
            )));
        }
        Ok(())
    }

    /// Number of clauses `s` falsifies, `c(s)`.
    pub fn conflicts(&self, s: Assignment) -> Result<usize> {
        self.check_width(s)?;
        Ok(self.conflicts_raw(s.bits))
    }

    #[inline]
    pub(crate) fn conflicts_raw(&self, s: u64) -> usize {
        self.patterns
            .iter()
            .filter(|&&(mask, pat)| s & mask == pat)
            .count()
    }

    pub fn is_solution(&self, s: Assignment) -> Result<bool> {
        Ok(self.conflicts(s)? == 0)
    }

    fn check_enumerable(&self) -> Result<()> {
        if self.n > MAX_ENUMERATION_VARS {
            return Err(Error::capacity(format!(
                "full enumeration needs n <= {MAX_ENUMERATION_VARS}, got {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Conflict count for every assignment, indexed by the assignment integer.
    ///
    /// Built by scattering each clause over the `2^(n-k)` assignments it
    /// falsifies.
    pub fn conflict_table(&self) -> Result<Vec<u32>> {
        self.check_enumerable()?;
        let full = if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        };
        let mut table = vec![0u32; 1usize << self.n];
        for &(mask, pat) in &self.patterns {
            let free = full & !mask;
            // enumerate all submasks of `free`
            let mut t = 0u64;
            loop {
                table[(t | pat) as usize] += 1;
                t = t.wrapping_sub(free) & free;
                if t == 0 {
                    break;
                }
            }
        }
        Ok(table)
    }

    /// Number of solutions `S`, by full enumeration.
    pub fn count_solutions(&self) -> Result<u64> {
        self.check_enumerable()?;
        if self.n <= 16 {
            return Ok(self.conflict_table()?.iter().filter(|&&c| c == 0).count() as u64);
        }
        let count = (0..1u64 << self.n)
            .into_par_iter()
            .filter(|&s| self.conflicts_raw(s) == 0)
            .count();
        Ok(count as u64)
    }

    /// Variance of `c(s)` over uniformly random assignments, computed exactly
    /// from clause pairs: two clauses sharing `delta` variables with agreeing
    /// signs are jointly falsified by a `2^(delta - 2k)` fraction of assignments.
    pub fn conflict_variance(&self) -> f64 {
        let k = self.k as i32;
        let mut second = 0.0;
        for (i, a) in self.patterns.iter().enumerate() {
            second += (-k as f64).exp2();
            for b in &self.patterns[i + 1..] {
                let common = a.0 & b.0;
                if (a.1 ^ b.1) & common == 0 {
                    let delta = common.count_ones() as i32;
                    second += 2.0 * ((delta - 2 * k) as f64).exp2();
                }
            }
        }
        let mean = self.mean_conflicts();
        second - mean * mean
    }
}
